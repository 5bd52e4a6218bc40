#include "logdyn/head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logdyn/error.hpp"
#include "logdyn/kernels.hpp"

namespace logdyn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InvariantViolation: return "invariant violation";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::DegenerateDynamics: return "degenerate dynamics";
    case ErrorKind::SingularDynamics: return "singular dynamics";
    case ErrorKind::UndefinedStatistic: return "undefined statistic";
    case ErrorKind::LengthOverflow: return "length overflow";
    case ErrorKind::SteeringStalled: return "steering stalled";
    case ErrorKind::SteeringSaturated: return "steering saturated";
  }
  return "unknown";
}

UnembeddingHead::UnembeddingHead(std::size_t vocab, std::size_t hidden_dim,
                                 std::vector<float> weights,
                                 std::vector<float> bias)
    : vocab_(vocab), dim_(hidden_dim), weights_(std::move(weights)),
      bias_(std::move(bias)) {
  require(vocab_ >= 1 && dim_ >= 1, ErrorKind::InvariantViolation,
          "head needs vocab >= 1 and hidden_dim >= 1");
  require(weights_.size() == vocab_ * dim_, ErrorKind::DimensionMismatch,
          "head weights size " + std::to_string(weights_.size()) +
              " != vocab*hidden_dim " + std::to_string(vocab_ * dim_));
  require(bias_.size() == vocab_, ErrorKind::DimensionMismatch,
          "head bias length " + std::to_string(bias_.size()) +
              " != vocab " + std::to_string(vocab_));
  const auto finite = [](float x) { return std::isfinite(x); };
  require(std::all_of(weights_.begin(), weights_.end(), finite) &&
              std::all_of(bias_.begin(), bias_.end(), finite),
          ErrorKind::InvariantViolation, "head has non-finite entries");
}

Vec UnembeddingHead::logits(std::span<const double> h) const {
  require(h.size() == dim_, ErrorKind::DimensionMismatch,
          "hidden vector has dimension " + std::to_string(h.size()) +
              ", head expects " + std::to_string(dim_));
  Vec z(vocab_);
  kernels::matvec(weights_, bias_, h, z);
  return z;
}

std::vector<float> UnembeddingHead::logits_f32(std::span<const float> h) const {
  require(h.size() == dim_, ErrorKind::DimensionMismatch,
          "hidden vector has dimension " + std::to_string(h.size()) +
              ", head expects " + std::to_string(dim_));
  std::vector<float> z(vocab_);
  kernels::matvec(weights_, bias_, h, z);
  return z;
}

Vec softmax(std::span<const double> logits) {
  Vec p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& x : p) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

Vec head_probs(const UnembeddingHead& head, std::span<const double> h) {
  return softmax(head.logits(h));
}

double token_prob(const UnembeddingHead& head, std::span<const double> h,
                  std::uint32_t token) {
  require(token < head.vocab_size(), ErrorKind::InvalidArgument,
          "token id " + std::to_string(token) + " out of range for vocab " +
              std::to_string(head.vocab_size()));
  return head_probs(head, h)[token];
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Vec to_vec(std::span<const float> v) { return Vec(v.begin(), v.end()); }

}  // namespace logdyn
