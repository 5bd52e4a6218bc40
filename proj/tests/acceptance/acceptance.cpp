// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "../test_util.hpp"
#include "logdyn/attractor.hpp"
#include "logdyn/error.hpp"
#include "logdyn/ltrj.hpp"
#include "logdyn/mechanics.hpp"
#include "logdyn/random.hpp"
#include "logdyn/report.hpp"
#include "logdyn/steering.hpp"
#include "logdyn/toy_model.hpp"
#include "logdyn/variational.hpp"

using namespace logdyn;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Records the first failing check; later ones only lower ok.
struct Checker {
  Outcome out;
  void expect(bool cond, const std::string& what) {
    if (!cond && out.ok) out.detail = "failed: " + what;
    out.ok = out.ok && cond;
  }
};

int failures = 0;

void criterion(const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0 && secs >= time_limit_s) {
    if (o.ok) o.detail += " (over time limit)";
    o.ok = false;
  }
  if (!o.ok) ++failures;
  char limit[32] = "";
  if (time_limit_s > 0) std::snprintf(limit, sizeof limit, " / %.0fs", time_limit_s);
  std::printf("%s  %-34s [%.3fs%s]  %s\n", o.ok ? "PASS" : "FAIL", name, secs, limit,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec unit(NormalSource& rng, std::size_t d) {
  Vec u = rng.vec(d);
  const double n = norm(u);
  for (double& x : u) x /= n;
  return u;
}

Vec moderate_velocity(NormalSource& rng, std::size_t d) {
  Vec v = unit(rng, d);
  const double s = 0.5 + 1.5 * rng.uniform();
  for (double& x : v) x *= s;
  return v;
}

UnembeddingHead random_head(NormalSource& rng, std::size_t V, std::size_t d, double std) {
  return UnembeddingHead(V, d, rng.vec_f32(V * d, std), rng.vec_f32(V, std));
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

const std::string kFix = LOGDYN_FIXTURES;

std::vector<std::uint32_t> fixture_prompt() {
  return toy::encode_bytes("The energy of a moving hidden state");
}

Outcome gradient_vs_finite_differences() {
  NormalSource rng(101);
  Checker c;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t V = 2 + rng.bits() % 31, d = 1 + rng.bits() % 16;
    const UnembeddingHead head = random_head(rng, V, d, 1.0);
    const Vec h = rng.vec(d);
    const auto j = static_cast<std::uint32_t>(rng.bits() % V);
    const Vec g = log_prob_gradient(head, h, j);
    Vec diff(d);
    for (std::size_t k = 0; k < d; ++k) {
      Vec hp = h, hm = h;
      hp[k] += 1e-4;
      hm[k] -= 1e-4;
      const double fd =
          (std::log(token_prob(head, hp, j)) - std::log(token_prob(head, hm, j))) / 2e-4;
      diff[k] = fd - g[k];
    }
    const double rel = norm(diff) / std::max(norm(g), 1e-3);
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-4, "triple " + std::to_string(i) + fmt(" relative error %.3g", rel));
  }
  if (c.out.ok) c.out.detail = fmt("100 triples, max relative error %.2e", worst);
  return c.out;
}

Outcome minimal_action() {
  NormalSource rng(102);
  Checker c;
  double lowest = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const std::size_t V = 2 + rng.bits() % 31, d = 2 + rng.bits() % 15;
    const UnembeddingHead head = random_head(rng, V, d, 1.0);
    const auto rep = minimal_action_check(head, rng.vec(d), static_cast<std::uint32_t>(rng.bits() % V),
                                          0.1, 1000, rng.bits());
    lowest = std::min(lowest, rep.min_ratio);
    c.expect(rep.min_ratio >= 1.0 - 1e-9 && rep.holds,
             "head " + std::to_string(i) + fmt(" min ratio %.12f", rep.min_ratio));
  }
  if (c.out.ok) c.out.detail = fmt("20 heads x 1000 samples, min ratio %.6f", lowest);
  return c.out;
}

Outcome steering_convergence() {
  const toy::Model model = toy::init_model(toy::load_config(kFix + "/toy_default.json"));
  const Trajectory traj = toy::generate_greedy(model, fixture_prompt(), 100);
  NormalSource rng(103);
  std::size_t runs = 0, converged = 0, monotone = 0, stalls = 0;
  for (int s = 0; s < 10; ++s) {
    const Vec h = to_vec(traj.state(rng.bits() % traj.steps()));
    const Vec logits = model.head().logits(h);
    std::vector<std::uint32_t> order(logits.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return logits[a] > logits[b]; });
    for (std::size_t r = 0; r < 100; ++r) {
      ++runs;
      try {
        const SteerResult res = steer(model.head(), h, order[r], SteerParams{});
        if (!res.converged) continue;
        ++converged;
        bool inc = true;
        double prev = res.p_initial;
        for (const auto& step : res.path) {
          inc = inc && step.p_target > prev;
          prev = step.p_target;
        }
        monotone += inc;
      } catch (const SteeringStalled&) {
        ++stalls;
      }
    }
  }
  const double rate = double(converged) / double(runs);
  Outcome o;
  o.ok = rate >= 0.95 && monotone == converged;
  o.detail = std::to_string(converged) + "/" + std::to_string(runs) + " converged (" +
             fmt("%.1f%%", 100 * rate) + "), " + std::to_string(monotone) + "/" +
             std::to_string(converged) + " strictly increasing, " + std::to_string(stalls) +
             " stalls";
  return o;
}

Outcome first_order_conservation() {
  NormalSource rng(104);
  Checker c;
  double worst_abs = 0, worst_order = INFINITY, worst_rel = 0;
  const auto eps_list = default_eps_list();
  for (int i = 0; i < 50; ++i) {
    const std::size_t V = 2 + rng.bits() % 31, d = 2 + rng.bits() % 15;
    const UnembeddingHead head = random_head(rng, V, d, 0.7);
    const Vec h = rng.vec(d);
    const auto x = static_cast<std::uint32_t>(rng.bits() % V);
    const Vec v = moderate_velocity(rng, d);
    const Vec vn = solve_next_velocity(v, log_prob_gradient(head, h, x), SignConvention::Theorem);
    Vec hp(d), hn(d);
    for (std::size_t k = 0; k < d; ++k) {
      hp[k] = h[k] - v[k];
      hn[k] = h[k] + vn[k];
    }
    const Vec eta = unit(rng, d);
    const Vec e3 = {1e-3};
    const double dH = conservation_perturbation_test(hp, h, hn, head, x, e3, eta)[0].measured;
    const double order =
        convergence_order(conservation_perturbation_test(hp, h, hn, head, x, eps_list, eta));
    worst_abs = std::max(worst_abs, std::abs(dH));
    worst_order = std::min(worst_order, order);
    c.expect(std::abs(dH) <= 1e-4, "EL-exact triple " + std::to_string(i) + fmt(" |dH| %.3g", dH));
    c.expect(order >= 1.9, "EL-exact triple " + std::to_string(i) + fmt(" order %.3f", order));
  }
  std::size_t compared = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t V = 2 + rng.bits() % 31, d = 2 + rng.bits() % 15;
    const UnembeddingHead head = random_head(rng, V, d, 0.7);
    const Vec h = rng.vec(d);
    const auto x = static_cast<std::uint32_t>(rng.bits() % V);
    const Vec v = moderate_velocity(rng, d), vn = moderate_velocity(rng, d);
    Vec hp(d), hn(d);
    for (std::size_t k = 0; k < d; ++k) {
      hp[k] = h[k] - v[k];
      hn[k] = h[k] + vn[k];
    }
    const Vec eta = unit(rng, d);
    const Vec e5 = {1e-5};
    const auto s = conservation_perturbation_test(hp, h, hn, head, x, e5, eta)[0];
    const double rel = std::abs(s.measured - s.predicted) / std::abs(s.predicted);
    worst_rel = std::max(worst_rel, rel);
    ++compared;
    c.expect(rel <= 0.05, "generic triple " + std::to_string(i) + fmt(" relative gap %.3g", rel));
  }
  if (c.out.ok)
    c.out.detail = fmt("EL-exact max |dH| %.2e", worst_abs) + fmt(", min order %.3f", worst_order) +
                   fmt(", generic max gap %.2e", worst_rel) + " over " +
                   std::to_string(compared) + " triples";
  return c.out;
}

Outcome mechanics_oracles() {
  Checker c;
  const double tol = 1e-9;
  const StepMechanics m = step_mechanics(Vec{0, 0}, Vec{3, 4}, 0.25);
  c.expect(close(m.kinetic, std::log(12.5), tol), "step K");
  c.expect(close(m.potential, std::log(4.0), tol), "step V");
  c.expect(close(m.lagrangian, std::log(12.5) - std::log(4.0), tol), "step L");
  c.expect(close(m.log_energy, std::log(50.0), tol), "step H");
  c.expect(close(m.energy, 50.0, tol), "step E");

  // 3-step fixture against pairwise evaluation
  Trajectory t;
  t.dim = 2;
  t.vocab = 4;
  t.hidden = {0.5f, -1, 2, 0.25f, -1.5f, 3};
  t.p_realized = {0.9f, 0.125f, 0.5f};
  t.token_ids = {0, 1, 2};
  const Series series = trajectory_mechanics(t);
  for (std::size_t k = 0; k < 2; ++k)
    c.expect(close(series[k].log_energy,
                   step_mechanics(to_vec(t.state(k)), to_vec(t.state(k + 1)), t.p_realized[k + 1])
                       .log_energy,
                   tol),
             "pairwise record");

  Series h123(3);
  for (std::size_t i = 0; i < 3; ++i) {
    h123[i].log_energy = double(i + 1);
    h123[i].kinetic = h123[i].potential = double(i + 1) / 2;
  }
  const std::vector<Series> one = {h123};
  c.expect(close(summarize(one).global_cv, std::sqrt(2.0 / 3.0) / 2.0, tol), "summarize CV");

  const auto ls = local_energy_stats(Vec{1.0, 1.2, 0.9});
  c.expect(close(ls.mean_drift, -0.05, tol), "mean_drift");
  c.expect(close(ls.mean_abs_jump, 0.25, tol), "mean_abs_jump");
  c.expect(close(ls.drift_ratio, -0.2, tol), "drift_ratio");

  c.expect(close(shannon_entropy(Vec{0.25, 0.25, 0.25, 0.25}), std::log(4.0), tol), "entropy uniform");
  c.expect(shannon_entropy(Vec{0, 1, 0}) == 0.0, "entropy one-hot");
  c.expect(close(shannon_entropy(Vec{0.5, 0.25, 0.25}), 1.5 * std::log(2.0), tol), "entropy mixed");

  Series ps(2);
  ps[0].velocity = {1, 0};
  ps[0].energy = 1;
  ps[1].velocity = {2, 0};
  const std::vector<Vec> f(2, Vec{0, 0});
  c.expect(close(power_series(ps, f).power[0], 2.0, tol), "power");

  const Vec xs = {135e6, 360e6, 1.7e9}, ys = {0.012, 0.0161, 0.031};
  const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  c.expect(close(pearson(xs, ys), sxy / std::sqrt(sxx * syy), tol), "pearson");
  if (c.out.ok) c.out.detail = "step, trajectory, summary, drift, entropy, power, pearson";
  return c.out;
}

Outcome involution() {
  NormalSource rng(105);
  Checker c;
  double worst = 0, worst_res = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec w = rng.vec(1 + rng.bits() % 32);
    const double scale = std::exp(3.0 * rng.next());
    for (double& x : w) x *= scale;
    const Vec back = inversion(inversion(w));
    Vec diff(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) diff[k] = back[k] - w[k];
    const double rel = norm(diff) / norm(w);
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-12, "vector " + std::to_string(i));

    const std::size_t d = 1 + rng.bits() % 16;
    const Vec v = moderate_velocity(rng, d), g = rng.vec(d, 0.5);
    for (auto conv : {SignConvention::Proposition, SignConvention::Theorem}) {
      const double r = norm(el_residual(v, solve_next_velocity(v, g, conv), g, conv));
      worst_res = std::max(worst_res, r);
      c.expect(r <= 1e-12, "residual of solved triple " + std::to_string(i));
    }
  }
  if (c.out.ok)
    c.out.detail = fmt("max relative error %.2e", worst) + fmt(", max residual %.2e", worst_res);
  return c.out;
}

Outcome attractor_bounds() {
  NormalSource rng(106);
  Checker c;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 1 + rng.bits() % 16;
    const UnembeddingHead head = random_head(rng, 2, d, 1.0);
    const auto r = interpolate_unique_tokens(head, rng.vec(d, 3.0), rng.vec(d, 3.0));
    c.expect(r.unique_count >= 1 && r.unique_count <= 2, "V = 2 pair " + std::to_string(i));
  }
  for (int i = 0; i < 1000; ++i) {
    const std::size_t V = 2 + rng.bits() % 31, d = 1 + rng.bits() % 16;
    const UnembeddingHead head = random_head(rng, V, d, 1.0);
    const Vec a = rng.vec(d, 3.0), b = rng.vec(d, 3.0);
    c.expect(interpolate_unique_tokens(head, a, b).unique_count ==
                 interpolate_unique_tokens(head, b, a).unique_count,
             "swap pair " + std::to_string(i));
  }
  if (c.out.ok) c.out.detail = "1000 binary-vocab pairs, 1000 swapped pairs";
  return c.out;
}

Outcome determinism_and_format() {
  Checker c;
  const toy::ModelConfig cfg = toy::load_config(kFix + "/toy_small.json");
  const auto first = encode_trajectory(toy::generate_greedy(toy::init_model(cfg), fixture_prompt(), 12));
  const auto second = encode_trajectory(toy::generate_greedy(toy::init_model(cfg), fixture_prompt(), 12));
  c.expect(first == second, "repeated generation differs");

  const Trajectory golden = load_trajectory(kFix + "/golden.ltrj");
  c.expect(first == encode_trajectory(golden), "generation differs from the committed fixture");
  const std::vector<std::uint32_t> ids = {82, 178, 13, 121, 171, 6, 204, 247, 243, 198, 138, 191};
  c.expect(golden.steps() == 12 && golden.dim == 16 && golden.vocab == 257 &&
               golden.context_len == 36 && golden.token_ids == ids && golden.head.has_value(),
           "golden fixture reference values");

  NormalSource rng(107);
  for (int i = 0; i < 100; ++i) {
    const Trajectory t = testing::random_trajectory(rng, i % 2 == 0);
    c.expect(decode_trajectory(encode_trajectory(t)) == t, "round trip " + std::to_string(i));
  }
  if (c.out.ok) c.out.detail = "byte-identical generation, golden fixture, 100 round trips";
  return c.out;
}

Outcome toy_regime() {
  const toy::Model model = toy::init_model(toy::load_config(kFix + "/toy_default.json"));
  const Trajectory traj = toy::generate_greedy(model, fixture_prompt(), 100);
  const std::vector<Trajectory> one = {traj};
  const Analysis a = analyze(one);
  const std::string report = emit_report(a.summary, std::span<const StepMechanics>(a.series[0]),
                                         ReportFormat::PerStepCsv);
  Checker c;
  bool finite = true;
  for (const auto& m : a.series[0]) finite = finite && std::isfinite(m.log_energy);
  c.expect(a.series[0].size() == 99, "record count");
  c.expect(finite, "non-finite H");
  c.expect(std::isfinite(a.summary.global_cv), "global CV");
  c.expect(a.summary.kv_ratio > 0.1 && a.summary.kv_ratio < 10, fmt("K/V ratio %.4f", a.summary.kv_ratio));
  c.expect(!report.empty(), "empty report");
  if (c.out.ok)
    c.out.detail = fmt("global_cv %.4f", a.summary.global_cv) +
                   fmt(", mean_H %.4f", a.summary.mean_logE) +
                   fmt(", K/V %.4f", a.summary.kv_ratio);
  return c.out;
}

}  // namespace

int main() {
  criterion("gradient-vs-finite-differences", 1, gradient_vs_finite_differences);
  criterion("minimal-action-optimality", 5, minimal_action);
  criterion("steering-convergence", 30, steering_convergence);
  criterion("first-order-conservation", 5, first_order_conservation);
  criterion("mechanics-oracles", 0, mechanics_oracles);
  criterion("involution", 0, involution);
  criterion("attractor-probe-bounds", 0, attractor_bounds);
  criterion("determinism-and-format", 0, determinism_and_format);
  criterion("toy-model-regime", 10, toy_regime);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
