#include "logdyn/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "logdyn/error.hpp"

namespace logdyn {

void validate(const Trajectory& traj) {
  const auto bad = [](const std::string& msg) {
    fail(ErrorKind::InvariantViolation, "trajectory: " + msg);
  };
  const std::size_t T = traj.token_ids.size();
  if (T < 1) bad("needs at least one step");
  if (traj.dim < 1) bad("hidden dimension must be >= 1");
  if (traj.p_realized.size() != T) bad("p_realized length differs from token_ids");
  if (traj.hidden.size() != T * traj.dim) bad("hidden size is not T*d");
  if (!std::all_of(traj.hidden.begin(), traj.hidden.end(),
                   [](float x) { return std::isfinite(x); }))
    bad("non-finite hidden entry");
  for (std::size_t t = 0; t < T; ++t) {
    const float p = traj.p_realized[t];
    if (!(p > 0.0f && p <= 1.0f))
      bad("p_realized[" + std::to_string(t) + "] = " + std::to_string(p) +
          " outside (0, 1]");
  }
  if (traj.vocab < 1) bad("vocab must be >= 1");
  for (std::size_t t = 0; t < T; ++t)
    if (traj.token_ids[t] >= traj.vocab)
      bad("token id " + std::to_string(traj.token_ids[t]) + " >= vocab " +
          std::to_string(traj.vocab));
  if (traj.head) {
    if (traj.head->hidden_dim() != traj.dim) bad("head hidden_dim differs from d");
    if (traj.head->vocab_size() != traj.vocab) bad("head vocab differs from vocab");
  }
  if (!traj.notes.is_object()) bad("notes must be a JSON object");
}

}  // namespace logdyn
