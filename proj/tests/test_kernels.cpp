#include <doctest.h>

#include <cmath>
#include <vector>

#include "logdyn/kernels.hpp"
#include "logdyn/random.hpp"

using namespace logdyn;

TEST_CASE("matvec: serial and OpenMP variants are bit-identical") {
  NormalSource rng(11);
  for (std::size_t rows : {1u, 7u, 257u, 1024u}) {
    const std::size_t cols = 64;
    const auto w = rng.vec_f32(rows * cols, 1.0);
    const auto b = rng.vec_f32(rows, 1.0);
    const auto x = rng.vec_f32(cols, 1.0);
    std::vector<float> ys(rows), yo(rows);
    kernels::serial::matvec(w, b, x, ys);
    kernels::omp::matvec(w, b, x, yo);
    CHECK(ys == yo);

    const auto xd = rng.vec(cols);
    std::vector<double> zs(rows), zo(rows);
    kernels::serial::matvec(w, b, xd, zs);
    kernels::omp::matvec(w, b, xd, zo);
    CHECK(zs == zo);
    for (std::size_t r = 0; r < rows; ++r) {
      long double ref = b[r];
      for (std::size_t c = 0; c < cols; ++c) ref += static_cast<long double>(w[r * cols + c]) * xd[c];
      CHECK(zs[r] == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    }
  }
}

TEST_CASE("matvec: empty bias means zero") {
  const std::vector<float> w = {1, 2, 3, 4};
  const std::vector<float> x = {1, 1};
  std::vector<float> y(2);
  kernels::matvec(w, {}, x, y);
  CHECK(y[0] == 3.0f);
  CHECK(y[1] == 7.0f);
}

TEST_CASE("linear and causal attention: serial and OpenMP agree bit-for-bit") {
  NormalSource rng(12);
  const std::size_t n = 37, d = 32, heads = 4, out = 48;
  const auto x = rng.vec_f32(n * d, 1.0);
  const auto w = rng.vec_f32(out * d, 0.2);
  const auto b = rng.vec_f32(out, 0.1);
  std::vector<float> ys(n * out), yo(n * out);
  kernels::serial::linear(x, n, d, w, b, out, ys);
  kernels::omp::linear(x, n, d, w, b, out, yo);
  CHECK(ys == yo);

  const auto qkv = rng.vec_f32(n * 3 * d, 1.0);
  std::vector<float> as(n * d), ao(n * d);
  kernels::serial::causal_attention(qkv, n, d, heads, as);
  kernels::omp::causal_attention(qkv, n, d, heads, ao);
  CHECK(as == ao);
}

TEST_CASE("causal attention matches a double-precision brute force") {
  NormalSource rng(13);
  const std::size_t n = 9, d = 8, heads = 2, hd = d / heads;
  const auto qkv = rng.vec_f32(n * 3 * d, 1.0);
  std::vector<float> got(n * d);
  kernels::serial::causal_attention(qkv, n, d, heads, got);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<double> w(i + 1);
      double denom = 0;
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0;
        for (std::size_t c = 0; c < hd; ++c)
          s += double(qkv[i * 3 * d + h * hd + c]) * double(qkv[j * 3 * d + d + h * hd + c]);
        w[j] = std::exp(s / std::sqrt(double(hd)));
        denom += w[j];
      }
      for (std::size_t c = 0; c < hd; ++c) {
        double o = 0;
        for (std::size_t j = 0; j <= i; ++j) o += w[j] / denom * qkv[j * 3 * d + 2 * d + h * hd + c];
        CHECK(got[i * d + h * hd + c] == doctest::Approx(o).epsilon(1e-5));
      }
    }
}
