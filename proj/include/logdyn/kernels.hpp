#pragma once

// Dense inner loops shared by the head, the toy transformer and the probes.
//
// Every kernel exists twice: `serial` is the reference, `omp` parallelizes
// over independent output rows. Each output element is produced by the same
// sequential accumulation in both variants, so results are bit-identical
// regardless of thread count. The unqualified names in `kernels` dispatch to
// the OpenMP variant when the library was built with it.

#include <cstddef>
#include <span>

namespace logdyn::kernels {

// Weight matrices are row-major, `rows x cols`. An empty bias means zero.

namespace serial {

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const float> x, std::span<float> y);
void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const double> x, std::span<double> y);

// y (n x out) = x (n x in) * w^T + bias, w is out x in.
void linear(std::span<const float> x, std::size_t n, std::size_t in,
            std::span<const float> w, std::span<const float> bias,
            std::size_t out, std::span<float> y);

// qkv is n x 3d laid out [q | k | v]; out is n x d. Causal softmax attention
// with n_heads heads of width d / n_heads.
void causal_attention(std::span<const float> qkv, std::size_t n, std::size_t d,
                      std::size_t n_heads, std::span<float> out);

}  // namespace serial

namespace omp {

void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const float> x, std::span<float> y);
void matvec(std::span<const float> w, std::span<const float> bias,
            std::span<const double> x, std::span<double> y);
void linear(std::span<const float> x, std::size_t n, std::size_t in,
            std::span<const float> w, std::span<const float> bias,
            std::size_t out, std::span<float> y);
void causal_attention(std::span<const float> qkv, std::size_t n, std::size_t d,
                      std::size_t n_heads, std::span<float> out);

}  // namespace omp

bool openmp_enabled() noexcept;

#if defined(LOGDYN_HAVE_OPENMP)
using omp::causal_attention;
using omp::linear;
using omp::matvec;
#else
using serial::causal_attention;
using serial::linear;
using serial::matvec;
#endif

}  // namespace logdyn::kernels
