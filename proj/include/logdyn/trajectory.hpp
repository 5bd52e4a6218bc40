#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "logdyn/head.hpp"

namespace logdyn {

/// A generated sequence: one hidden state per position that produced a
/// realized next token. Storage is 32-bit float to match the interchange
/// format exactly.
struct Trajectory {
  std::size_t dim = 0;                 // d
  std::size_t vocab = 0;               // V; equals head->vocab_size() when a head is attached
  std::vector<float> hidden;           // T x d, step-major
  std::vector<std::uint32_t> token_ids;
  std::vector<float> p_realized;
  std::string model_id;
  std::uint32_t context_len = 0;
  std::optional<UnembeddingHead> head;
  // Free-form provenance carried in the file header (generator config,
  // prompt ids). Must be a JSON object.
  nlohmann::json notes = nlohmann::json::object();

  std::size_t steps() const noexcept { return token_ids.size(); }
  std::span<const float> state(std::size_t t) const noexcept {
    return {hidden.data() + t * dim, dim};
  }
  /// Point perplexity 1 / p_realized[t].
  double perplexity(std::size_t t) const { return 1.0 / p_realized[t]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Throws Error(InvariantViolation) describing the first violated invariant.
void validate(const Trajectory& traj);

/// Per-step mechanical record for step t >= 1.
struct StepMechanics {
  std::size_t t = 0;
  Vec velocity;            // h_t - h_{t-1}; momentum under unit mass
  double speed_sq_half = 0;
  double kinetic = 0;      // K_t = ln(speed_sq_half)
  double potential = 0;    // V_t = -ln p
  double lagrangian = 0;   // K_t - V_t
  double log_energy = 0;   // H_t = K_t + V_t
  double energy = 0;       // exp(H_t)
};

struct MechanicsSummary {
  std::size_t n_steps = 0;
  std::size_t n_trajectories = 0;
  double mean_logE = 0;
  double global_cv = 0;
  double avg_traj_cv = 0;
  double kv_ratio = 0;
  double mean_drift = 0;
  double mean_abs_jump = 0;
  double drift_ratio = 0;
  std::optional<double> mean_entropy;
};

}  // namespace logdyn
