#pragma once

// Neighboring-attractor probe: count distinct argmax tokens along the
// straight segment between consecutive hidden states.

#include <cstdint>
#include <span>
#include <vector>

#include "logdyn/head.hpp"
#include "logdyn/trajectory.hpp"

namespace logdyn {

inline constexpr std::size_t kDefaultGrid = 11;  // alpha = 0, 0.1, ..., 1

struct Interpolation {
  std::size_t unique_count = 0;
  std::vector<std::uint32_t> tokens;  // argmax at each grid point, ties -> lowest id
};

/// Grid point i mixes (grid_n-1-i)/(grid_n-1) of h_a with i/(grid_n-1) of
/// h_b; both weights are formed the same way so swapping the endpoints
/// mirrors the grid exactly.
Interpolation interpolate_unique_tokens(const UnembeddingHead& head,
                                        std::span<const double> h_a,
                                        std::span<const double> h_b,
                                        std::size_t grid_n = kDefaultGrid);

struct ProbeResult {
  double mean_unique = 0;
  double std_unique = 0;  // population
  std::vector<std::size_t> per_pair_counts;
};

/// Applies the interpolation to every consecutive pair (h_t, h_{t+1}).
ProbeResult probe_trajectory(const Trajectory& traj, std::size_t grid_n = kDefaultGrid);

}  // namespace logdyn
