#include "logdyn/steering.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logdyn/random.hpp"
#include "logdyn/variational.hpp"

namespace logdyn {
namespace {

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void validate(const SteerParams& p) {
  const auto bad = [](const std::string& msg) {
    fail(ErrorKind::InvalidArgument, "steer params: " + msg);
  };
  if (!(p.eta > 0.0 && p.eta < 1.0)) bad("eta must lie in (0, 1)");
  if (p.max_steps < 1) bad("max_steps must be positive");
  if (p.alpha0 && !(*p.alpha0 > 0.0 && std::isfinite(*p.alpha0))) bad("alpha0 must be positive");
  if (!(p.backtrack_factor > 0.0 && p.backtrack_factor < 1.0))
    bad("backtrack_factor must lie in (0, 1)");
  if (p.max_backtracks < 1) bad("max_backtracks must be positive");
}

Vec steering_direction(const UnembeddingHead& head, std::span<const double> h,
                       std::uint32_t target) {
  return log_prob_gradient(head, h, target);
}

SteerResult steer(const UnembeddingHead& head, std::span<const double> h,
                  std::uint32_t target, const SteerParams& params) {
  validate(params);
  require(target < head.vocab_size(), ErrorKind::InvalidArgument,
          "target " + std::to_string(target) + " out of range for vocab " +
              std::to_string(head.vocab_size()));
  require(std::all_of(h.begin(), h.end(), [](double x) { return std::isfinite(x); }),
          ErrorKind::InvalidArgument, "steer: state has non-finite entries");

  SteerResult res;
  Vec cur(h.begin(), h.end());
  double p = token_prob(head, cur, target);
  res.p_initial = p;
  const auto finish = [&] {
    res.h_hat = cur;
    res.p_final = p;
    res.converged = p >= params.eta;
    res.total_displacement = distance(cur, h);
  };

  Vec trial(cur.size());
  for (std::size_t k = 0; k < params.max_steps && p < params.eta; ++k) {
    const Vec g = steering_direction(head, cur, target);
    const double gn = norm(g);
    if (gn < 1e-12)
      fail(ErrorKind::SteeringSaturated,
           "steering gradient vanished (|g| = " + std::to_string(gn) + ") at p_target = " +
               std::to_string(p) + " below eta");

    double alpha = params.alpha0.value_or(std::max(0.1 * norm(cur), 1e-3));
    bool accepted = false;
    double p_trial = p;
    for (std::size_t b = 0; b <= params.max_backtracks; ++b) {
      for (std::size_t i = 0; i < cur.size(); ++i) trial[i] = cur[i] + alpha * g[i] / gn;
      p_trial = token_prob(head, trial, target);
      if (p_trial > p) {
        accepted = true;
        break;
      }
      alpha *= params.backtrack_factor;
    }
    if (!accepted) {
      finish();
      throw SteeringStalled("line search found no increase of p_target after " +
                                std::to_string(params.max_backtracks) + " backtracks at step " +
                                std::to_string(k) + " (p_target = " + std::to_string(p) + ")",
                            res);
    }
    cur.swap(trial);
    p = p_trial;
    res.path.push_back({p, alpha});
    ++res.steps_taken;
  }
  finish();
  return res;
}

double action_ratio(std::span<const double> g, double c, std::span<const double> r) {
  require(g.size() == r.size(), ErrorKind::DimensionMismatch, "action_ratio: dimension mismatch");
  const double gr = dot(g, r);
  require(gr != 0.0, ErrorKind::InvalidArgument, "action_ratio: r is orthogonal to g");
  const double optimal = std::abs(c) / norm(g);
  return std::abs(c / gr) * norm(r) / optimal;
}

MinimalActionReport minimal_action_check(const UnembeddingHead& head,
                                         std::span<const double> h, std::uint32_t target,
                                         double c, std::size_t n_samples,
                                         std::uint64_t seed) {
  require(c > 0, ErrorKind::InvalidArgument, "minimal_action_check: c must be positive");
  require(n_samples >= 1, ErrorKind::InvalidArgument, "minimal_action_check: need samples");
  const Vec g = steering_direction(head, h, target);
  const double gn = norm(g);
  require(gn > 0, ErrorKind::SteeringSaturated, "minimal_action_check: zero gradient");

  MinimalActionReport rep;
  rep.optimal_norm = c / gn;
  rep.min_ratio = INFINITY;
  rep.holds = true;
  NormalSource rng(seed);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec r = rng.vec(g.size());
    const double gr = dot(g, r);
    if (std::abs(gr) / (gn * norm(r)) < 1e-6) {
      ++rep.n_rejected;
      continue;
    }
    const double scaled_norm = std::abs(c / gr) * norm(r);  // |r'| with g . r' = c
    rep.min_ratio = std::min(rep.min_ratio, scaled_norm / rep.optimal_norm);
    if (scaled_norm < rep.optimal_norm - 1e-9) rep.holds = false;
    ++rep.n_used;
  }
  return rep;
}

SteerContinuation steer_and_continue(const toy::Model& model, const Trajectory& traj,
                                     std::size_t step_index, std::uint32_t target,
                                     const SteerParams& params, std::size_t continue_steps) {
  auto [config, prompt] = toy::parse_generator_notes(traj.notes);
  require(config == model.config(), ErrorKind::InvalidArgument,
          "steer_and_continue: trajectory was generated by a different model config");
  require(step_index < traj.steps(), ErrorKind::InvalidArgument,
          "step index " + std::to_string(step_index) + " out of range for T = " +
              std::to_string(traj.steps()));

  SteerContinuation out;
  out.steer = steer(model.head(), to_vec(traj.state(step_index)), target, params);
  if (continue_steps == 0) return out;

  std::vector<std::uint32_t> prefix = std::move(prompt);
  prefix.insert(prefix.end(), traj.token_ids.begin(),
                traj.token_ids.begin() + static_cast<std::ptrdiff_t>(step_index));
  prefix.push_back(target);
  out.continuation = toy::generate_greedy(model, prefix, continue_steps);
  return out;
}

}  // namespace logdyn
