#include "logdyn/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "logdyn/error.hpp"

namespace logdyn {

Interpolation interpolate_unique_tokens(const UnembeddingHead& head,
                                        std::span<const double> h_a,
                                        std::span<const double> h_b, std::size_t grid_n) {
  require(h_a.size() == h_b.size() && h_a.size() == head.hidden_dim(),
          ErrorKind::DimensionMismatch, "interpolation endpoints must match the head dimension");
  require(grid_n >= 2, ErrorKind::InvalidArgument, "interpolation grid needs >= 2 points");
  Interpolation out;
  out.tokens.reserve(grid_n);
  const double denom = static_cast<double>(grid_n - 1);
  Vec h(h_a.size());
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double wa = static_cast<double>(grid_n - 1 - i) / denom;
    const double wb = static_cast<double>(i) / denom;
    for (std::size_t c = 0; c < h.size(); ++c) h[c] = wa * h_a[c] + wb * h_b[c];
    out.tokens.push_back(static_cast<std::uint32_t>(argmax_lowest(head.logits(h))));
  }
  std::vector<std::uint32_t> sorted = out.tokens;
  std::sort(sorted.begin(), sorted.end());
  out.unique_count = static_cast<std::size_t>(
      std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  return out;
}

ProbeResult probe_trajectory(const Trajectory& traj, std::size_t grid_n) {
  require(traj.head.has_value(), ErrorKind::InvalidArgument,
          "attractor probe needs a trajectory with an attached head");
  require(traj.steps() >= 2, ErrorKind::InvalidArgument, "attractor probe needs T >= 2");
  require(grid_n >= 2, ErrorKind::InvalidArgument, "interpolation grid needs >= 2 points");
  require(traj.head->hidden_dim() == traj.dim && traj.hidden.size() == traj.steps() * traj.dim,
          ErrorKind::DimensionMismatch, "attractor probe: head and states differ in dimension");
  const std::size_t pairs = traj.steps() - 1;
  ProbeResult res;
  res.per_pair_counts.resize(pairs);
  const auto n = static_cast<std::int64_t>(pairs);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto t = static_cast<std::size_t>(k);
    res.per_pair_counts[t] =
        interpolate_unique_tokens(*traj.head, to_vec(traj.state(t)), to_vec(traj.state(t + 1)),
                                  grid_n)
            .unique_count;
  }
  double sum = 0;
  for (std::size_t c : res.per_pair_counts) sum += static_cast<double>(c);
  res.mean_unique = sum / static_cast<double>(pairs);
  double ss = 0;
  for (std::size_t c : res.per_pair_counts)
    ss += (static_cast<double>(c) - res.mean_unique) * (static_cast<double>(c) - res.mean_unique);
  res.std_unique = std::sqrt(ss / static_cast<double>(pairs));
  return res;
}

}  // namespace logdyn
