#include "logdyn/variational.hpp"

#include <cmath>
#include <string>

#include "logdyn/error.hpp"

namespace logdyn {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void same_dim(std::span<const double> a, std::span<const double> b, const char* what) {
  require(a.size() == b.size(), ErrorKind::DimensionMismatch,
          std::string(what) + ": vectors differ in dimension");
}

void nonzero(std::span<const double> v, const char* what) {
  if (!(dot(v, v) > 0))
    fail(ErrorKind::DegenerateDynamics, std::string(what) + ": zero velocity");
}

double sign_of(SignConvention conv) { return conv == SignConvention::Proposition ? 1.0 : -1.0; }

// ln(|a + e|^2 / |a|^2) with e = delta, computed without cancellation.
double log_sq_ratio(std::span<const double> a, std::span<const double> delta) {
  const double aa = dot(a, a);
  const double change = 2.0 * dot(a, delta) + dot(delta, delta);
  return std::log1p(change / aa);
}

}  // namespace

Vec log_prob_gradient(const UnembeddingHead& head, std::span<const double> h,
                      std::uint32_t j) {
  require(j < head.vocab_size(), ErrorKind::InvalidArgument,
          "token id " + std::to_string(j) + " out of range for vocab " +
              std::to_string(head.vocab_size()));
  const Vec p = head_probs(head, h);
  const std::size_t d = head.hidden_dim();
  Vec mean_row(d, 0.0);
  for (std::size_t k = 0; k < head.vocab_size(); ++k) {
    const auto w = head.row(k);
    for (std::size_t i = 0; i < d; ++i) mean_row[i] += p[k] * static_cast<double>(w[i]);
  }
  Vec g(d);
  const auto wj = head.row(j);
  for (std::size_t i = 0; i < d; ++i) g[i] = static_cast<double>(wj[i]) - mean_row[i];
  return g;
}

Vec inversion(std::span<const double> w) {
  const double ww = dot(w, w);
  if (!(ww > 0)) fail(ErrorKind::SingularDynamics, "inversion of the zero vector");
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = 2.0 * w[i] / ww;
  return out;
}

Vec el_residual(std::span<const double> v_t, std::span<const double> v_next,
                std::span<const double> grad, SignConvention conv) {
  same_dim(v_t, v_next, "el_residual");
  same_dim(v_t, grad, "el_residual");
  nonzero(v_t, "el_residual");
  nonzero(v_next, "el_residual");
  const Vec a = inversion(v_next);
  const Vec b = inversion(v_t);
  const double s = sign_of(conv);
  Vec r(v_t.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i] - s * grad[i];
  return r;
}

Vec solve_next_velocity(std::span<const double> v_t, std::span<const double> grad,
                        SignConvention conv) {
  same_dim(v_t, grad, "solve_next_velocity");
  nonzero(v_t, "solve_next_velocity");
  Vec u = inversion(v_t);
  const double s = sign_of(conv);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += s * grad[i];
  if (!(dot(u, u) > 0))
    fail(ErrorKind::SingularDynamics,
         "solve_next_velocity: 2v/|v|^2 and the gradient term cancel, no finite next velocity");
  return inversion(u);
}

double conservation_first_order(std::span<const double> v_t,
                                std::span<const double> v_next,
                                std::span<const double> grad,
                                std::span<const double> direction) {
  same_dim(v_t, v_next, "conservation_first_order");
  same_dim(v_t, grad, "conservation_first_order");
  same_dim(v_t, direction, "conservation_first_order");
  nonzero(v_t, "conservation_first_order");
  nonzero(v_next, "conservation_first_order");
  require(std::abs(std::sqrt(dot(direction, direction)) - 1.0) <= 1e-9,
          ErrorKind::InvalidArgument, "conservation_first_order: direction must be a unit vector");
  const Vec a = inversion(v_t);
  const Vec b = inversion(v_next);
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - grad[i] - b[i]) * direction[i];
  return s;
}

std::vector<PerturbationSample> conservation_perturbation_test(
    std::span<const double> h_prev, std::span<const double> h_t,
    std::span<const double> h_next, const UnembeddingHead& head, std::uint32_t x_t,
    std::span<const double> eps_list, std::span<const double> direction) {
  same_dim(h_prev, h_t, "conservation_perturbation_test");
  same_dim(h_next, h_t, "conservation_perturbation_test");
  same_dim(direction, h_t, "conservation_perturbation_test");
  require(head.hidden_dim() == h_t.size(), ErrorKind::DimensionMismatch,
          "conservation_perturbation_test: head dimension differs from states");
  const std::size_t d = h_t.size();
  Vec v_t(d), v_next(d);
  for (std::size_t i = 0; i < d; ++i) {
    v_t[i] = h_t[i] - h_prev[i];
    v_next[i] = h_next[i] - h_t[i];
  }
  const Vec grad = log_prob_gradient(head, h_t, x_t);
  const double bracket = conservation_first_order(v_t, v_next, grad, direction);

  // ln p_x(h + e) - ln p_x(h) = e.W_x - ln sum_k p_k exp(e.W_k), exactly,
  // because the logits are affine in h.
  const Vec p = head_probs(head, h_t);
  Vec w_dot_dir(head.vocab_size());
  for (std::size_t k = 0; k < head.vocab_size(); ++k) {
    const auto w = head.row(k);
    double s = 0;
    for (std::size_t i = 0; i < d; ++i) s += static_cast<double>(w[i]) * direction[i];
    w_dot_dir[k] = s;
  }

  std::vector<PerturbationSample> out;
  out.reserve(eps_list.size());
  Vec delta(d), neg_delta(d);
  for (double eps : eps_list) {
    for (std::size_t i = 0; i < d; ++i) {
      delta[i] = eps * direction[i];
      neg_delta[i] = -delta[i];
    }
    PerturbationSample s{eps, 0.0, eps * bracket};
    if (eps != 0.0) {
      double lse_shift = 0;
      for (std::size_t k = 0; k < p.size(); ++k) lse_shift += p[k] * std::expm1(eps * w_dot_dir[k]);
      const double d_log_p = eps * w_dot_dir[x_t] - std::log1p(lse_shift);
      const double d_kin_t = log_sq_ratio(v_t, delta);
      const double d_kin_next = log_sq_ratio(v_next, neg_delta);
      if (!std::isfinite(d_kin_t) || !std::isfinite(d_kin_next))
        fail(ErrorKind::DegenerateDynamics,
             "perturbation eps=" + std::to_string(eps) + " produces zero velocity");
      s.measured = d_kin_t - d_log_p + d_kin_next;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<double> default_eps_list() {
  std::vector<double> eps;
  for (double e = 1e-2; e >= 0.9e-5; e *= 0.5) eps.push_back(e);
  return eps;
}

double convergence_order(std::span<const PerturbationSample> samples) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.eps <= 0 || s.measured == 0) continue;
    const double x = std::log(s.eps), y = std::log(std::abs(s.measured));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, ErrorKind::UndefinedStatistic, "convergence_order needs two usable samples");
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  require(denom > 0, ErrorKind::UndefinedStatistic, "convergence_order needs distinct eps values");
  return (nn * sxy - sx * sy) / denom;
}

std::vector<Vec> trajectory_forces(const Trajectory& traj) {
  require(traj.head.has_value(), ErrorKind::InvalidArgument, "forces need an attached head");
  std::vector<Vec> out;
  for (std::size_t t = 1; t < traj.steps(); ++t)
    out.push_back(log_prob_gradient(*traj.head, to_vec(traj.state(t)), traj.token_ids[t]));
  return out;
}

std::vector<double> trajectory_el_residual_norms(const Trajectory& traj,
                                                 SignConvention conv) {
  require(traj.head.has_value(), ErrorKind::InvalidArgument,
          "EL residuals need an attached head");
  std::vector<double> out;
  for (std::size_t t = 1; t + 1 < traj.steps(); ++t) {
    const Vec prev = to_vec(traj.state(t - 1)), cur = to_vec(traj.state(t)),
              next = to_vec(traj.state(t + 1));
    Vec v(cur.size()), vn(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      v[i] = cur[i] - prev[i];
      vn[i] = next[i] - cur[i];
    }
    const Vec r = el_residual(v, vn, log_prob_gradient(*traj.head, cur, traj.token_ids[t]), conv);
    out.push_back(std::sqrt(dot(r, r)));
  }
  return out;
}

}  // namespace logdyn
