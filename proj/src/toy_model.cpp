#include "logdyn/toy_model.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "logdyn/error.hpp"
#include "logdyn/kernels.hpp"
#include "logdyn/random.hpp"

namespace logdyn::toy {
namespace {

using nlohmann::json;

constexpr float kLayerNormEps = 1e-5f;

void layer_norm(std::span<const float> x, std::size_t n, std::size_t d,
                std::span<const float> gain, std::span<const float> bias,
                std::span<float> y) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* xi = x.data() + i * d;
    float* yi = y.data() + i * d;
    float mean = 0.0f;
    for (std::size_t c = 0; c < d; ++c) mean += xi[c];
    mean /= static_cast<float>(d);
    float var = 0.0f;
    for (std::size_t c = 0; c < d; ++c) var += (xi[c] - mean) * (xi[c] - mean);
    var /= static_cast<float>(d);
    const float inv = 1.0f / std::sqrt(var + kLayerNormEps);
    for (std::size_t c = 0; c < d; ++c) yi[c] = (xi[c] - mean) * inv * gain[c] + bias[c];
  }
}

void gelu(std::span<float> x) {
  constexpr float k = 0.7978845608028654f;  // sqrt(2/pi)
  for (float& v : x) v = 0.5f * v * (1.0f + std::tanh(k * (v + 0.044715f * v * v * v)));
}

void add_inplace(std::span<float> x, std::span<const float> y) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
}

std::uint64_t json_uint(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned())
    fail(ErrorKind::InvalidArgument, std::string("config field '") + key +
                                         "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

void validate(const ModelConfig& cfg) {
  const auto bad = [](const std::string& msg) {
    fail(ErrorKind::InvalidArgument, "model config: " + msg);
  };
  if (cfg.d_model < 1) bad("d_model must be positive");
  if (cfg.n_heads < 1 || cfg.d_model % cfg.n_heads != 0) bad("n_heads must divide d_model");
  if (cfg.d_ff < 1) bad("d_ff must be positive");
  if (cfg.vocab < 1) bad("vocab must be positive");
  if (cfg.max_seq < 2) bad("max_seq must be >= 2");
  if (!(std::isfinite(cfg.init_std) && cfg.init_std >= 0)) bad("init_std must be finite and >= 0");
}

json to_json(const ModelConfig& cfg) {
  return json{{"d_model", cfg.d_model}, {"n_heads", cfg.n_heads},
              {"n_layers", cfg.n_layers}, {"d_ff", cfg.d_ff},
              {"vocab", cfg.vocab},       {"max_seq", cfg.max_seq},
              {"seed", cfg.seed},         {"init_std", cfg.init_std}};
}

ModelConfig config_from_json(const json& j) {
  static const std::set<std::string> kFields = {"d_model", "n_heads", "n_layers", "d_ff",
                                                "vocab",   "max_seq", "seed",     "init_std"};
  require(j.is_object(), ErrorKind::InvalidArgument, "model config must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(kFields.count(key) == 1, ErrorKind::InvalidArgument,
            "model config: unknown field '" + key + "'");
  for (const auto& key : kFields)
    require(j.contains(key), ErrorKind::InvalidArgument,
            "model config: missing field '" + key + "'");
  ModelConfig cfg;
  cfg.d_model = json_uint(j, "d_model");
  cfg.n_heads = json_uint(j, "n_heads");
  cfg.n_layers = json_uint(j, "n_layers");
  cfg.d_ff = json_uint(j, "d_ff");
  cfg.vocab = json_uint(j, "vocab");
  cfg.max_seq = json_uint(j, "max_seq");
  cfg.seed = json_uint(j, "seed");
  require(j.at("init_std").is_number(), ErrorKind::InvalidArgument,
          "model config: init_std must be a number");
  cfg.init_std = j.at("init_std").get<double>();
  validate(cfg);
  return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

Model init_model(const ModelConfig& config) {
  validate(config);
  const std::size_t d = config.d_model, V = config.vocab, F = config.d_ff;
  const double s = config.init_std;
  NormalSource rng(config.seed);

  Model m;
  m.config_ = config;
  m.tok_emb_ = rng.vec_f32(V * d, s);
  m.pos_emb_ = rng.vec_f32(config.max_seq * d, s);
  m.layers_.resize(config.n_layers);
  for (auto& L : m.layers_) {
    L.ln1_gain.assign(d, 1.0f);
    L.ln1_bias.assign(d, 0.0f);
    L.w_qkv = rng.vec_f32(3 * d * d, s);
    L.b_qkv.assign(3 * d, 0.0f);
    L.w_out = rng.vec_f32(d * d, s);
    L.b_out.assign(d, 0.0f);
    L.ln2_gain.assign(d, 1.0f);
    L.ln2_bias.assign(d, 0.0f);
    L.w_fc = rng.vec_f32(F * d, s);
    L.b_fc.assign(F, 0.0f);
    L.w_proj = rng.vec_f32(d * F, s);
    L.b_proj.assign(d, 0.0f);
  }
  m.lnf_gain_.assign(d, 1.0f);
  m.lnf_bias_.assign(d, 0.0f);
  m.head_ = UnembeddingHead(V, d, rng.vec_f32(V * d, s), std::vector<float>(V, 0.0f));
  return m;
}

std::vector<float> Model::flat_parameters() const {
  std::vector<float> out;
  const auto append = [&](std::span<const float> v) { out.insert(out.end(), v.begin(), v.end()); };
  append(tok_emb_);
  append(pos_emb_);
  for (const auto& L : layers_) {
    for (const auto* v : {&L.ln1_gain, &L.ln1_bias, &L.w_qkv, &L.b_qkv, &L.w_out, &L.b_out,
                          &L.ln2_gain, &L.ln2_bias, &L.w_fc, &L.b_fc, &L.w_proj, &L.b_proj})
      append(*v);
  }
  append(lnf_gain_);
  append(lnf_bias_);
  append(head_.weights());
  append(head_.bias());
  return out;
}

ForwardResult forward_hidden(const Model& model, std::span<const std::uint32_t> tokens) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = tokens.size(), d = cfg.d_model, V = cfg.vocab, F = cfg.d_ff;
  require(n >= 1, ErrorKind::InvalidArgument, "forward_hidden: empty token sequence");
  require(n <= cfg.max_seq, ErrorKind::LengthOverflow,
          "sequence length " + std::to_string(n) + " exceeds max_seq " +
              std::to_string(cfg.max_seq));
  for (std::uint32_t id : tokens)
    if (id >= V)
      fail(ErrorKind::InvalidArgument,
           "token id " + std::to_string(id) + " out of range for vocab " + std::to_string(V));

  std::vector<float> x(n * d);
  const auto tok = model.token_embedding();
  const auto pos = model.position_embedding();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c)
      x[i * d + c] = tok[tokens[i] * d + c] + pos[i * d + c];

  std::vector<float> a(n * d), qkv(n * 3 * d), att(n * d), proj(n * d), ff(n * F);
  for (const auto& L : model.layers()) {
    layer_norm(x, n, d, L.ln1_gain, L.ln1_bias, a);
    kernels::linear(a, n, d, L.w_qkv, L.b_qkv, 3 * d, qkv);
    kernels::causal_attention(qkv, n, d, cfg.n_heads, att);
    kernels::linear(att, n, d, L.w_out, L.b_out, d, proj);
    add_inplace(x, proj);

    layer_norm(x, n, d, L.ln2_gain, L.ln2_bias, a);
    kernels::linear(a, n, d, L.w_fc, L.b_fc, F, ff);
    gelu(ff);
    kernels::linear(ff, n, F, L.w_proj, L.b_proj, d, proj);
    add_inplace(x, proj);
  }

  ForwardResult out;
  out.n = n;
  out.hidden.resize(n * d);
  layer_norm(x, n, d, model.final_norm_gain(), model.final_norm_bias(), out.hidden);
  out.logits.resize(n * V);
  // Same per-row accumulation as UnembeddingHead::logits_f32, so
  // logits[t] == W hidden[t] + b bit-for-bit.
  kernels::linear(out.hidden, n, d, model.head().weights(), model.head().bias(), V, out.logits);
  return out;
}

Trajectory generate_greedy(const Model& model, std::span<const std::uint32_t> prompt,
                           std::size_t steps) {
  const ModelConfig& cfg = model.config();
  require(!prompt.empty(), ErrorKind::InvalidArgument, "generate_greedy: empty prompt");
  require(steps >= 1, ErrorKind::InvalidArgument, "generate_greedy: steps must be positive");
  require(prompt.size() + steps <= cfg.max_seq, ErrorKind::LengthOverflow,
          "prompt length " + std::to_string(prompt.size()) + " + steps " +
              std::to_string(steps) + " exceeds max_seq " + std::to_string(cfg.max_seq));

  const std::size_t d = cfg.d_model, V = cfg.vocab;
  Trajectory traj;
  traj.dim = d;
  traj.vocab = V;
  traj.model_id = "toy-d" + std::to_string(d) + "-h" + std::to_string(cfg.n_heads) + "-L" +
                  std::to_string(cfg.n_layers) + "-s" + std::to_string(cfg.seed);
  traj.context_len = static_cast<std::uint32_t>(prompt.size());
  traj.head = model.head();
  traj.notes = generator_notes(cfg, prompt);

  std::vector<std::uint32_t> seq(prompt.begin(), prompt.end());
  for (std::size_t s = 0; s < steps; ++s) {
    const ForwardResult fwd = forward_hidden(model, seq);
    const std::size_t last = seq.size() - 1;
    const auto z = fwd.logits_at(last, V);
    std::size_t best = 0;
    for (std::size_t j = 1; j < V; ++j)
      if (z[j] > z[best]) best = j;
    double denom = 0.0;
    for (std::size_t j = 0; j < V; ++j)
      denom += std::exp(static_cast<double>(z[j]) - static_cast<double>(z[best]));
    const auto h = fwd.hidden_at(last, d);
    traj.hidden.insert(traj.hidden.end(), h.begin(), h.end());
    traj.token_ids.push_back(static_cast<std::uint32_t>(best));
    traj.p_realized.push_back(static_cast<float>(1.0 / denom));
    seq.push_back(static_cast<std::uint32_t>(best));
  }
  return traj;
}

std::vector<std::uint32_t> encode_bytes(std::string_view text) {
  std::vector<std::uint32_t> ids;
  ids.reserve(text.size() + 1);
  ids.push_back(kBosToken);
  for (char c : text) ids.push_back(static_cast<unsigned char>(c));
  return ids;
}

json generator_notes(const ModelConfig& cfg, std::span<const std::uint32_t> prompt) {
  return json{{"generator", {{"config", to_json(cfg)},
                             {"prompt_ids", std::vector<std::uint32_t>(prompt.begin(), prompt.end())}}}};
}

std::pair<ModelConfig, std::vector<std::uint32_t>> parse_generator_notes(const json& notes) {
  if (!notes.is_object() || !notes.contains("generator"))
    fail(ErrorKind::InvalidArgument,
         "trajectory notes carry no generator record; the model cannot be reconstructed");
  try {
    const auto& g = notes.at("generator");
    return {config_from_json(g.at("config")), g.at("prompt_ids").get<std::vector<std::uint32_t>>()};
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed generator notes: ") + e.what());
  }
}

std::uint64_t checksum(std::span<const float> values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace logdyn::toy
