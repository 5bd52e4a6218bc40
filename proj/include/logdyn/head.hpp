#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace logdyn {

using Vec = std::vector<double>;

/// Affine unembedding z(h) = W h + b followed by softmax.
///
/// Weights are stored in 32-bit floats (the interchange dtype); every
/// analysis-side evaluation accumulates in double.
class UnembeddingHead {
 public:
  UnembeddingHead() = default;
  /// `weights` is row-major vocab x hidden_dim. Throws on shape mismatch or
  /// non-finite entries.
  UnembeddingHead(std::size_t vocab, std::size_t hidden_dim,
                  std::vector<float> weights, std::vector<float> bias);

  std::size_t vocab_size() const noexcept { return vocab_; }
  std::size_t hidden_dim() const noexcept { return dim_; }
  std::span<const float> weights() const noexcept { return weights_; }
  std::span<const float> bias() const noexcept { return bias_; }
  std::span<const float> row(std::size_t j) const noexcept {
    return {weights_.data() + j * dim_, dim_};
  }

  Vec logits(std::span<const double> h) const;
  /// Float path with sequential accumulation; the toy model uses this so that
  /// its logits equal W h + b bit-for-bit.
  std::vector<float> logits_f32(std::span<const float> h) const;

  friend bool operator==(const UnembeddingHead&, const UnembeddingHead&) = default;

 private:
  std::size_t vocab_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> weights_;
  std::vector<float> bias_;
};

/// softmax(W h + b) with max subtraction.
Vec head_probs(const UnembeddingHead& head, std::span<const double> h);

/// p_j(h) for a single token.
double token_prob(const UnembeddingHead& head, std::span<const double> h,
                  std::uint32_t token);

/// Stable softmax of an arbitrary logit vector.
Vec softmax(std::span<const double> logits);

/// Lowest index among the maximal entries.
std::size_t argmax_lowest(std::span<const double> values);

Vec to_vec(std::span<const float> v);

}  // namespace logdyn
