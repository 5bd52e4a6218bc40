#pragma once

#include <cstdint>
#include <string>

#include "logdyn/random.hpp"
#include "logdyn/trajectory.hpp"

namespace logdyn::testing {

// Valid trajectory with random shape; the head is attached half the time.
inline Trajectory random_trajectory(NormalSource& rng, bool with_head) {
  Trajectory t;
  const std::size_t T = 1 + rng.bits() % 20;
  t.dim = 1 + rng.bits() % 12;
  t.vocab = 1 + rng.bits() % 40;
  t.hidden = rng.vec_f32(T * t.dim, 3.0);
  for (std::size_t i = 0; i < T; ++i) {
    t.token_ids.push_back(static_cast<std::uint32_t>(rng.bits() % t.vocab));
    // (0, 1], including exactly 1 sometimes
    const double u = rng.uniform();
    t.p_realized.push_back(u < 0.1 ? 1.0f : static_cast<float>(0.001 + 0.999 * u));
  }
  t.model_id = "rand-" + std::to_string(rng.bits() % 1000);
  t.context_len = static_cast<std::uint32_t>(rng.bits() % 100);
  if (with_head)
    t.head.emplace(t.vocab, t.dim, rng.vec_f32(t.vocab * t.dim, 1.0), rng.vec_f32(t.vocab, 1.0));
  if (rng.uniform() < 0.5) t.notes["source"] = {{"k", rng.bits() % 7}, {"label", "xé"}};
  return t;
}

}  // namespace logdyn::testing
