#include "logdyn/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "logdyn/error.hpp"

namespace logdyn {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum_sorted(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

StepMechanics step_mechanics(std::span<const double> h_prev,
                             std::span<const double> h_curr, double p_realized,
                             std::size_t t) {
  require(h_prev.size() == h_curr.size(), ErrorKind::DimensionMismatch,
          "step " + std::to_string(t) + ": states differ in dimension");
  require(p_realized > 0.0 && p_realized <= 1.0, ErrorKind::InvalidArgument,
          "step " + std::to_string(t) + ": p_realized must lie in (0, 1]");
  StepMechanics m;
  m.t = t;
  m.velocity.resize(h_curr.size());
  for (std::size_t i = 0; i < h_curr.size(); ++i) m.velocity[i] = h_curr[i] - h_prev[i];
  m.speed_sq_half = 0.5 * dot(m.velocity, m.velocity);
  if (!(m.speed_sq_half > 0.0))
    fail(ErrorKind::DegenerateDynamics,
         "step " + std::to_string(t) + ": zero velocity, log-kinetic term undefined");
  m.kinetic = std::log(m.speed_sq_half);
  m.potential = -std::log(p_realized);
  m.lagrangian = m.kinetic - m.potential;
  m.log_energy = m.kinetic + m.potential;
  m.energy = m.speed_sq_half / p_realized;
  return m;
}

Series trajectory_mechanics(const Trajectory& traj) {
  const std::size_t T = traj.steps();
  require(T >= 2, ErrorKind::InvalidArgument,
          "trajectory_mechanics needs T >= 2, got " + std::to_string(T));
  require(traj.hidden.size() == T * traj.dim, ErrorKind::InvariantViolation,
          "trajectory hidden size is not T*d");
  Series out(T - 1);
  const auto n = static_cast<std::int64_t>(T - 1);
  std::int64_t first_bad = n;
  std::optional<Error> bad;
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    const std::size_t t = static_cast<std::size_t>(k) + 1;
    try {
      out[k] = step_mechanics(to_vec(traj.state(t - 1)), to_vec(traj.state(t)),
                              traj.p_realized[t], t);
    } catch (const Error& e) {
#pragma omp critical(logdyn_mechanics_error)
      if (k < first_bad) {
        first_bad = k;
        bad = e;
      }
    }
  }
  if (bad) throw *bad;
  return out;
}

std::vector<double> log_energies(std::span<const StepMechanics> series) {
  std::vector<double> h(series.size());
  std::transform(series.begin(), series.end(), h.begin(),
                 [](const StepMechanics& m) { return m.log_energy; });
  return h;
}

LocalEnergyStats local_energy_stats(std::span<const double> log_energy) {
  require(log_energy.size() >= 2, ErrorKind::InvalidArgument,
          "local_energy_stats needs at least two records");
  double sum = 0, sum_abs = 0;
  for (std::size_t i = 0; i + 1 < log_energy.size(); ++i) {
    const double d = log_energy[i + 1] - log_energy[i];
    sum += d;
    sum_abs += std::abs(d);
  }
  const double n = static_cast<double>(log_energy.size() - 1);
  return {sum / n, sum_abs / n, sum_abs > 0 ? sum / sum_abs : 0.0};
}

LocalEnergyStats local_energy_stats(std::span<const StepMechanics> series) {
  return local_energy_stats(log_energies(series));
}

Moments population_moments(std::vector<double> values) {
  Moments m;
  m.n = values.size();
  if (m.n == 0) return m;
  m.mean = sum_sorted(values) / static_cast<double>(m.n);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [&](double x) { return (x - m.mean) * (x - m.mean); });
  m.stddev = std::sqrt(sum_sorted(sq) / static_cast<double>(m.n));
  return m;
}

double coefficient_of_variation(const Moments& m) {
  require(m.n > 0, ErrorKind::UndefinedStatistic, "CV of an empty series");
  require(m.mean != 0.0, ErrorKind::UndefinedStatistic, "CV undefined: mean is zero");
  return m.stddev / std::abs(m.mean);
}

MechanicsSummary summarize(std::span<const Series> series_per_trajectory) {
  std::vector<double> pooled_H, pooled_K, pooled_V;
  for (const auto& s : series_per_trajectory)
    for (const auto& m : s) {
      pooled_H.push_back(m.log_energy);
      pooled_K.push_back(m.kinetic);
      pooled_V.push_back(m.potential);
    }
  require(!pooled_H.empty(), ErrorKind::InvalidArgument,
          "summarize needs at least one nonempty series");

  MechanicsSummary out;
  out.n_steps = pooled_H.size();
  const Moments global = population_moments(std::move(pooled_H));
  out.mean_logE = global.mean;
  out.global_cv = coefficient_of_variation(global);

  const double mean_K = population_moments(std::move(pooled_K)).mean;
  const double mean_V = population_moments(std::move(pooled_V)).mean;
  require(mean_V != 0.0, ErrorKind::UndefinedStatistic,
          "K/V ratio undefined: mean log-potential is zero");
  out.kv_ratio = mean_K / mean_V;

  double cv_sum = 0, drift = 0, jump = 0, ratio = 0;
  std::size_t n_drift = 0;
  for (const auto& s : series_per_trajectory) {
    if (s.empty()) continue;
    ++out.n_trajectories;
    cv_sum += coefficient_of_variation(population_moments(log_energies(s)));
    if (s.size() >= 2) {
      const auto st = local_energy_stats(std::span<const StepMechanics>(s));
      drift += st.mean_drift;
      jump += st.mean_abs_jump;
      ratio += st.drift_ratio;
      ++n_drift;
    }
  }
  out.avg_traj_cv = cv_sum / static_cast<double>(out.n_trajectories);
  if (n_drift > 0) {
    const double n = static_cast<double>(n_drift);
    out.mean_drift = drift / n;
    out.mean_abs_jump = jump / n;
    out.drift_ratio = ratio / n;
  }
  return out;
}

double shannon_entropy(std::span<const double> p) {
  double total = 0;
  for (double x : p) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::InvalidArgument,
            "shannon_entropy: entries must be finite and nonnegative");
    total += x;
  }
  require(!p.empty() && std::abs(total - 1.0) <= 1e-6, ErrorKind::InvalidArgument,
          "shannon_entropy: probabilities must sum to 1");
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return std::max(h, 0.0);
}

double mean_entropy(const Trajectory& traj) {
  require(traj.head.has_value(), ErrorKind::InvalidArgument,
          "entropy needs a trajectory with an attached head");
  require(traj.steps() >= 2, ErrorKind::InvalidArgument, "entropy needs T >= 2");
  double sum = 0;
  for (std::size_t t = 1; t < traj.steps(); ++t)
    sum += shannon_entropy(head_probs(*traj.head, to_vec(traj.state(t))));
  return sum / static_cast<double>(traj.steps() - 1);
}

PowerSeries power_series(std::span<const StepMechanics> series,
                         std::span<const Vec> forces) {
  require(forces.size() == series.size(), ErrorKind::DimensionMismatch,
          "power_series: forces length " + std::to_string(forces.size()) +
              " != series length " + std::to_string(series.size()));
  PowerSeries out;
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    const Vec& v = series[t].velocity;
    const Vec& v_next = series[t + 1].velocity;
    require(v_next.size() == v.size() && forces[t].size() == v.size(),
            ErrorKind::DimensionMismatch, "power_series: vector dimensions differ");
    double va = 0, vv = 0, fv = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      va += v[i] * (v_next[i] - v[i]);
      vv += v[i] * v[i];
      fv += forces[t][i] * v[i];
    }
    out.power.push_back(series[t].energy * (2.0 * va / vv - fv));
    out.delta_H.push_back(series[t + 1].log_energy - series[t].log_energy);
  }
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), ErrorKind::DimensionMismatch,
          "pearson: inputs differ in length");
  require(xs.size() >= 2, ErrorKind::InvalidArgument, "pearson needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(sxx > 0 && syy > 0, ErrorKind::UndefinedStatistic,
          "pearson undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<StepIndexStat> step_index_cv(std::span<const Series> series_per_trajectory) {
  std::size_t longest = 0;
  for (const auto& s : series_per_trajectory) longest = std::max(longest, s.size());
  std::vector<StepIndexStat> out;
  for (std::size_t k = 0; k < longest; ++k) {
    std::vector<double> column;
    for (const auto& s : series_per_trajectory)
      if (k < s.size()) column.push_back(s[k].log_energy);
    const Moments m = population_moments(std::move(column));
    const double cv = m.mean != 0.0 ? m.stddev / std::abs(m.mean)
                                    : std::numeric_limits<double>::quiet_NaN();
    out.push_back({k, m.n, m.mean, cv});
  }
  return out;
}

Analysis analyze(std::span<const Trajectory> trajectories) {
  require(!trajectories.empty(), ErrorKind::InvalidArgument, "analyze: no trajectories");
  Analysis a;
  a.series.reserve(trajectories.size());
  for (const auto& tr : trajectories) {
    try {
      a.series.push_back(trajectory_mechanics(tr));
    } catch (const Error& e) {
      throw Error(e.kind(), (tr.model_id.empty() ? "trajectory" : tr.model_id) + ": " + e.what());
    }
  }
  a.summary = summarize(a.series);
  const bool all_heads = std::all_of(trajectories.begin(), trajectories.end(),
                                     [](const Trajectory& t) { return t.head.has_value(); });
  if (all_heads) {
    double weighted = 0;
    std::size_t n = 0;
    for (const auto& tr : trajectories) {
      weighted += mean_entropy(tr) * static_cast<double>(tr.steps() - 1);
      n += tr.steps() - 1;
    }
    a.summary.mean_entropy = weighted / static_cast<double>(n);
  }
  return a;
}

}  // namespace logdyn
