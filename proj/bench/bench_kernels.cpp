// Serial reference kernels against their OpenMP counterparts, plus the
// end-to-end paths that use them.

#include <benchmark/benchmark.h>

#include "logdyn/attractor.hpp"
#include "logdyn/kernels.hpp"
#include "logdyn/random.hpp"
#include "logdyn/toy_model.hpp"

using namespace logdyn;

namespace {

struct MatvecData {
  std::vector<float> w, b, x, y;
  MatvecData(std::size_t rows, std::size_t cols) : y(rows) {
    NormalSource rng(1);
    w = rng.vec_f32(rows * cols, 1.0);
    b = rng.vec_f32(rows, 1.0);
    x = rng.vec_f32(cols, 1.0);
  }
};

template <auto Fn>
void BM_matvec(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  MatvecData d(rows, 256);
  for (auto _ : state) {
    Fn(d.w, d.b, d.x, d.y);
    benchmark::DoNotOptimize(d.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * 256));
}

void serial_matvec(std::span<const float> w, std::span<const float> b, std::span<const float> x,
                   std::span<float> y) {
  kernels::serial::matvec(w, b, x, y);
}
void omp_matvec(std::span<const float> w, std::span<const float> b, std::span<const float> x,
                std::span<float> y) {
  kernels::omp::matvec(w, b, x, y);
}

template <auto Fn>
void BM_linear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 64, out = 256;
  NormalSource rng(2);
  const auto x = rng.vec_f32(n * in, 1.0), w = rng.vec_f32(out * in, 1.0), b = rng.vec_f32(out, 1.0);
  std::vector<float> y(n * out);
  for (auto _ : state) {
    Fn(x, n, in, w, b, out, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void serial_linear(std::span<const float> x, std::size_t n, std::size_t in,
                   std::span<const float> w, std::span<const float> b, std::size_t out,
                   std::span<float> y) {
  kernels::serial::linear(x, n, in, w, b, out, y);
}
void omp_linear(std::span<const float> x, std::size_t n, std::size_t in,
                std::span<const float> w, std::span<const float> b, std::size_t out,
                std::span<float> y) {
  kernels::omp::linear(x, n, in, w, b, out, y);
}

template <auto Fn>
void BM_attention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  NormalSource rng(3);
  const auto qkv = rng.vec_f32(n * 3 * d, 1.0);
  std::vector<float> out(n * d);
  for (auto _ : state) {
    Fn(qkv, n, d, 4, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void serial_attention(std::span<const float> qkv, std::size_t n, std::size_t d, std::size_t h,
                      std::span<float> out) {
  kernels::serial::causal_attention(qkv, n, d, h, out);
}
void omp_attention(std::span<const float> qkv, std::size_t n, std::size_t d, std::size_t h,
                   std::span<float> out) {
  kernels::omp::causal_attention(qkv, n, d, h, out);
}

void BM_forward_default(benchmark::State& state) {
  const toy::Model model = toy::init_model(toy::load_config(LOGDYN_FIXTURES "/toy_default.json"));
  std::vector<std::uint32_t> tokens(static_cast<std::size_t>(state.range(0)), 65);
  tokens[0] = toy::kBosToken;
  for (auto _ : state) benchmark::DoNotOptimize(toy::forward_hidden(model, tokens));
}

void BM_probe_default(benchmark::State& state) {
  const toy::Model model = toy::init_model(toy::load_config(LOGDYN_FIXTURES "/toy_default.json"));
  const Trajectory traj = toy::generate_greedy(model, toy::encode_bytes("bench"), 100);
  for (auto _ : state) benchmark::DoNotOptimize(probe_trajectory(traj));
}

}  // namespace

BENCHMARK(BM_matvec<serial_matvec>)->Name("matvec/serial")->Arg(257)->Arg(4096);
BENCHMARK(BM_matvec<omp_matvec>)->Name("matvec/omp")->Arg(257)->Arg(4096);
BENCHMARK(BM_linear<serial_linear>)->Name("linear/serial")->Arg(16)->Arg(256);
BENCHMARK(BM_linear<omp_linear>)->Name("linear/omp")->Arg(16)->Arg(256);
BENCHMARK(BM_attention<serial_attention>)->Name("attention/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_attention<omp_attention>)->Name("attention/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_forward_default)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_probe_default)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
