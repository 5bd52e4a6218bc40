#pragma once

// A small pre-layer-norm decoder-only transformer with seeded random
// weights. It is the in-repo testbed: trajectories generated here carry the
// exact head that produced their probabilities.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "logdyn/head.hpp"
#include "logdyn/trajectory.hpp"

namespace logdyn::toy {

inline constexpr std::uint32_t kBosToken = 256;

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 4;
  std::size_t d_ff = 256;
  std::size_t vocab = 257;  // 256 bytes + BOS
  std::size_t max_seq = 256;
  std::uint64_t seed = 0;
  double init_std = 0.02;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void validate(const ModelConfig& cfg);

nlohmann::json to_json(const ModelConfig& cfg);
/// Requires exactly the ModelConfig fields, no more and no fewer.
ModelConfig config_from_json(const nlohmann::json& j);
ModelConfig load_config(const std::filesystem::path& path);

struct LayerParams {
  std::vector<float> ln1_gain, ln1_bias;
  std::vector<float> w_qkv, b_qkv;    // 3d x d, 3d
  std::vector<float> w_out, b_out;    // d x d, d
  std::vector<float> ln2_gain, ln2_bias;
  std::vector<float> w_fc, b_fc;      // d_ff x d, d_ff
  std::vector<float> w_proj, b_proj;  // d x d_ff, d

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ForwardResult {
  std::size_t n = 0;
  std::vector<float> hidden;  // n x d, final-layer-norm output (head input)
  std::vector<float> logits;  // n x V

  std::span<const float> hidden_at(std::size_t t, std::size_t d) const {
    return {hidden.data() + t * d, d};
  }
  std::span<const float> logits_at(std::size_t t, std::size_t V) const {
    return {logits.data() + t * V, V};
  }
};

class Model {
 public:
  const ModelConfig& config() const noexcept { return config_; }
  const UnembeddingHead& head() const noexcept { return head_; }
  std::span<const float> token_embedding() const noexcept { return tok_emb_; }
  std::span<const float> position_embedding() const noexcept { return pos_emb_; }
  std::span<const LayerParams> layers() const noexcept { return layers_; }
  std::span<const float> final_norm_gain() const noexcept { return lnf_gain_; }
  std::span<const float> final_norm_bias() const noexcept { return lnf_bias_; }

  /// Every parameter in initialization order; used for determinism checks.
  std::vector<float> flat_parameters() const;

  friend bool operator==(const Model&, const Model&) = default;
  friend Model init_model(const ModelConfig& config);

 private:
  ModelConfig config_;
  std::vector<float> tok_emb_;  // V x d
  std::vector<float> pos_emb_;  // max_seq x d
  std::vector<LayerParams> layers_;
  std::vector<float> lnf_gain_, lnf_bias_;
  UnembeddingHead head_;
};

/// Weights ~ N(0, init_std^2) from a platform-independent generator seeded
/// with config.seed; linear biases 0, layer-norm gains 1 and biases 0.
Model init_model(const ModelConfig& config);

ForwardResult forward_hidden(const Model& model, std::span<const std::uint32_t> tokens);

/// Greedy decoding; ties go to the lowest token id. The trajectory records
/// the head input at each generating position, the chosen token and its
/// softmax probability, and carries the model's head plus generator notes.
Trajectory generate_greedy(const Model& model, std::span<const std::uint32_t> prompt,
                           std::size_t steps);

/// BOS followed by the raw bytes of `text`.
std::vector<std::uint32_t> encode_bytes(std::string_view text);

/// Notes written by generate_greedy: {"generator": {"config": {...}, "prompt_ids": [...]}}.
nlohmann::json generator_notes(const ModelConfig& cfg, std::span<const std::uint32_t> prompt);
/// Recovers (config, prompt) from generator notes; throws if absent.
std::pair<ModelConfig, std::vector<std::uint32_t>> parse_generator_notes(const nlohmann::json& notes);

/// FNV-1a over the bit patterns; golden-value helper.
std::uint64_t checksum(std::span<const float> values);

}  // namespace logdyn::toy
