#include "logdyn/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#if defined(LOGDYN_HAVE_OPENMP)
#include <omp.h>
#endif

namespace logdyn::kernels {
namespace {

// Below this many multiply-adds the parallel region costs more than it saves.
constexpr std::int64_t kParallelWork = 1 << 14;

template <typename X>
inline X row_dot(const float* w, const X* x, std::size_t cols) {
  X acc = 0;
  for (std::size_t c = 0; c < cols; ++c) acc += static_cast<X>(w[c]) * x[c];
  return acc;
}

template <typename X>
inline void matvec_row(std::span<const float> w, std::span<const float> bias,
                       std::span<const X> x, std::span<X> y, std::size_t r) {
  const std::size_t cols = x.size();
  X acc = row_dot(w.data() + r * cols, x.data(), cols);
  if (!bias.empty()) acc += static_cast<X>(bias[r]);
  y[r] = acc;
}

inline void linear_row(std::span<const float> x, std::size_t in,
                       std::span<const float> w, std::span<const float> bias,
                       std::size_t out, std::span<float> y, std::size_t i) {
  const float* xi = x.data() + i * in;
  float* yi = y.data() + i * out;
  for (std::size_t o = 0; o < out; ++o) {
    float acc = row_dot(w.data() + o * in, xi, in);
    if (!bias.empty()) acc += bias[o];
    yi[o] = acc;
  }
}

// One query position, all heads. scratch must hold at least n floats.
inline void attention_row(std::span<const float> qkv, std::size_t d,
                          std::size_t n_heads, std::span<float> out,
                          std::size_t i, float* scratch) {
  const std::size_t hd = d / n_heads;
  const std::size_t stride = 3 * d;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  for (std::size_t h = 0; h < n_heads; ++h) {
    const float* q = qkv.data() + i * stride + h * hd;
    float mx = -INFINITY;
    for (std::size_t j = 0; j <= i; ++j) {
      const float* k = qkv.data() + j * stride + d + h * hd;
      float s = row_dot(k, q, hd) * scale;
      scratch[j] = s;
      mx = std::max(mx, s);
    }
    float denom = 0.0f;
    for (std::size_t j = 0; j <= i; ++j) {
      scratch[j] = std::exp(scratch[j] - mx);
      denom += scratch[j];
    }
    float* o = out.data() + i * d + h * hd;
    std::fill(o, o + hd, 0.0f);
    for (std::size_t j = 0; j <= i; ++j) {
      const float* v = qkv.data() + j * stride + 2 * d + h * hd;
      const float a = scratch[j] / denom;
      for (std::size_t c = 0; c < hd; ++c) o[c] += a * v[c];
    }
  }
}

}  // namespace

namespace serial {

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const float> x, std::span<float> y) {
  assert(w.size() == y.size() * x.size());
  for (std::size_t r = 0; r < y.size(); ++r) matvec_row(w, bias, x, y, r);
}

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const double> x, std::span<double> y) {
  assert(w.size() == y.size() * x.size());
  for (std::size_t r = 0; r < y.size(); ++r) matvec_row(w, bias, x, y, r);
}

void linear(std::span<const float> x, std::size_t n, std::size_t in,
            std::span<const float> w, std::span<const float> bias,
            std::size_t out, std::span<float> y) {
  assert(x.size() == n * in && w.size() == out * in && y.size() == n * out);
  for (std::size_t i = 0; i < n; ++i) linear_row(x, in, w, bias, out, y, i);
}

void causal_attention(std::span<const float> qkv, std::size_t n, std::size_t d,
                      std::size_t n_heads, std::span<float> out) {
  assert(qkv.size() == n * 3 * d && out.size() == n * d && d % n_heads == 0);
  std::vector<float> scratch(n);
  for (std::size_t i = 0; i < n; ++i)
    attention_row(qkv, d, n_heads, out, i, scratch.data());
}

}  // namespace serial

namespace omp {

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const float> x, std::span<float> y) {
  assert(w.size() == y.size() * x.size());
  const auto rows = static_cast<std::int64_t>(y.size());
  [[maybe_unused]] const bool big = static_cast<std::int64_t>(w.size()) > kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t r = 0; r < rows; ++r)
    matvec_row(w, bias, x, y, static_cast<std::size_t>(r));
}

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const double> x, std::span<double> y) {
  assert(w.size() == y.size() * x.size());
  const auto rows = static_cast<std::int64_t>(y.size());
  [[maybe_unused]] const bool big = static_cast<std::int64_t>(w.size()) > kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t r = 0; r < rows; ++r)
    matvec_row(w, bias, x, y, static_cast<std::size_t>(r));
}

void linear(std::span<const float> x, std::size_t n, std::size_t in,
            std::span<const float> w, std::span<const float> bias,
            std::size_t out, std::span<float> y) {
  assert(x.size() == n * in && w.size() == out * in && y.size() == n * out);
  const auto rows = static_cast<std::int64_t>(n);
  [[maybe_unused]] const bool big =
      static_cast<std::int64_t>(n * in * out) > kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < rows; ++i)
    linear_row(x, in, w, bias, out, y, static_cast<std::size_t>(i));
}

void causal_attention(std::span<const float> qkv, std::size_t n, std::size_t d,
                      std::size_t n_heads, std::span<float> out) {
  assert(qkv.size() == n * 3 * d && out.size() == n * d && d % n_heads == 0);
  const auto rows = static_cast<std::int64_t>(n);
  [[maybe_unused]] const bool big =
      static_cast<std::int64_t>(n * n * d) > kParallelWork;
#pragma omp parallel if (big)
  {
    std::vector<float> scratch(n);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i)
      attention_row(qkv, d, n_heads, out, static_cast<std::size_t>(i),
                    scratch.data());
  }
}

}  // namespace omp

bool openmp_enabled() noexcept {
#if defined(LOGDYN_HAVE_OPENMP)
  return true;
#else
  return false;
#endif
}

}  // namespace logdyn::kernels
