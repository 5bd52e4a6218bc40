#pragma once

// Per-step mechanical quantities of a trajectory and the conservation /
// drift statistics built on them. All statistics are taken on the
// log-energy H_t = K_t + V_t.

#include <cstddef>
#include <span>
#include <vector>

#include "logdyn/trajectory.hpp"

namespace logdyn {

using Series = std::vector<StepMechanics>;

/// Mechanics of the step h_prev -> h_curr whose realized token had
/// probability p_realized. Throws DegenerateDynamics on zero velocity.
StepMechanics step_mechanics(std::span<const double> h_prev,
                             std::span<const double> h_curr, double p_realized,
                             std::size_t t = 1);

/// One record per t = 1..T-1. Needs T >= 2.
Series trajectory_mechanics(const Trajectory& traj);

struct LocalEnergyStats {
  double mean_drift = 0;     // <dH>
  double mean_abs_jump = 0;  // <|dH|>
  double drift_ratio = 0;    // sum dH / sum |dH|, 0 when nothing moves
};

LocalEnergyStats local_energy_stats(std::span<const StepMechanics> series);
LocalEnergyStats local_energy_stats(std::span<const double> log_energy);

std::vector<double> log_energies(std::span<const StepMechanics> series);

/// Population mean / standard deviation / CV. Values are sorted before
/// summation so the result does not depend on input order.
struct Moments {
  std::size_t n = 0;
  double mean = 0;
  double stddev = 0;
};
Moments population_moments(std::vector<double> values);
/// sigma / |mu|; throws UndefinedStatistic when mu == 0.
double coefficient_of_variation(const Moments& m);

/// Pools every trajectory's H_t for the global CV, averages per-trajectory
/// CVs with equal weight, and averages per-trajectory drift statistics over
/// the trajectories that have at least two records. mean_entropy is left
/// empty; analyze() fills it when heads are available.
MechanicsSummary summarize(std::span<const Series> series_per_trajectory);

/// -sum p ln p in nats, 0 ln 0 = 0.
double shannon_entropy(std::span<const double> p);

/// Mean entropy of the head distribution over positions t = 1..T-1 (the
/// positions that carry a mechanics record). Requires a head.
double mean_entropy(const Trajectory& traj);

struct PowerSeries {
  std::vector<double> power;    // dE/dt estimate per step, length n-1
  std::vector<double> delta_H;  // H_{t+1} - H_t, length n-1
};

/// E_t (2 v_t.a_t / |v_t|^2 - F_t.v_t) with the discrete acceleration
/// a_t = v_{t+1} - v_t. forces[i] is the force at the state of series[i].
PowerSeries power_series(std::span<const StepMechanics> series,
                         std::span<const Vec> forces);

/// Typical per-step energy swing sigma ~ CV * mu.
inline double energy_swing(double cv, double mean) { return cv * mean; }

/// Sample Pearson correlation. Throws UndefinedStatistic on constant input.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// CV of H across trajectories at each step index (records aligned by
/// position within each series).
struct StepIndexStat {
  std::size_t index = 0;
  std::size_t n = 0;
  double mean_H = 0;
  double cv_H = 0;  // NaN when mean_H == 0
};
std::vector<StepIndexStat> step_index_cv(std::span<const Series> series_per_trajectory);

struct Analysis {
  std::vector<Series> series;
  MechanicsSummary summary;
};

/// trajectory_mechanics + summarize over a set of trajectories, plus mean
/// entropy when every trajectory carries a head.
Analysis analyze(std::span<const Trajectory> trajectories);

}  // namespace logdyn
