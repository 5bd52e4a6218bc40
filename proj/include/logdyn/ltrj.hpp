#pragma once

// LTRJ v1 trajectory interchange format.
//
//   bytes 0..7    magic "LTRJv001"
//   bytes 8..11   u32 header length N (little-endian)
//   bytes 12..    N bytes of UTF-8 JSON header:
//                 {model_id, d, vocab, T, context_len, has_head, dtype:"f32"[, notes]}
//   payload       hidden      T*d f32, step-major
//                 token_ids   T   u32
//                 p_realized  T   f32
//                 weights     V*d f32, row-major   (iff has_head)
//                 bias        V   f32              (iff has_head)
//
// All multi-byte values are little-endian. The header is emitted with sorted
// keys and no whitespace so equal trajectories give identical bytes.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "logdyn/trajectory.hpp"

namespace logdyn {

inline constexpr std::string_view kLtrjMagic = "LTRJv001";

std::vector<std::byte> encode_trajectory(const Trajectory& traj);
Trajectory decode_trajectory(std::span<const std::byte> bytes);

/// Validates first; nothing is written if the trajectory is invalid.
void write_trajectory(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory(std::istream& in);

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace logdyn
