#pragma once

// Exact head gradients, discrete Euler-Lagrange residuals and the
// first-order conservation test for the log-energy.
//
// The stationarity condition appears with two signs of the gradient term:
//   proposition:  2v'/|v'|^2 - 2v/|v|^2 = +grad ln p
//   theorem:      2v'/|v'|^2 - 2v/|v|^2 = -grad ln p
// Only the theorem form makes the first-order energy bracket vanish. Both are
// supported; conservation checks default to `theorem`, residual reporting to
// `proposition`.

#include <cstdint>
#include <span>
#include <vector>

#include "logdyn/head.hpp"
#include "logdyn/trajectory.hpp"

namespace logdyn {

enum class SignConvention { Proposition, Theorem };

/// grad_h ln p_j(h) = W_j - sum_k p_k(h) W_k.
Vec log_prob_gradient(const UnembeddingHead& head, std::span<const double> h,
                      std::uint32_t j);

/// w -> 2w/|w|^2. An involution on nonzero vectors.
Vec inversion(std::span<const double> w);

Vec el_residual(std::span<const double> v_t, std::span<const double> v_next,
                std::span<const double> grad, SignConvention conv);

/// The unique v_next with zero residual: v_next = 2u/|u|^2 where
/// u = 2v_t/|v_t|^2 + grad (proposition) or - grad (theorem).
Vec solve_next_velocity(std::span<const double> v_t, std::span<const double> grad,
                        SignConvention conv);

/// B . direction with B = 2v_t/|v_t|^2 - grad - 2v_next/|v_next|^2.
double conservation_first_order(std::span<const double> v_t,
                                std::span<const double> v_next,
                                std::span<const double> grad,
                                std::span<const double> direction);

struct PerturbationSample {
  double eps = 0;
  double measured = 0;   // change of K_t + V_t + K_{t+1} under h_t -> h_t + eps*direction
  double predicted = 0;  // eps * (B . direction)
};

/// Perturbs h_t along `direction` for each eps, recomputing both velocities
/// and p_{x_t} through the head (no linearization).
std::vector<PerturbationSample> conservation_perturbation_test(
    std::span<const double> h_prev, std::span<const double> h_t,
    std::span<const double> h_next, const UnembeddingHead& head, std::uint32_t x_t,
    std::span<const double> eps_list, std::span<const double> direction);

/// 1e-2, 5e-3, ... halving down to just under 1e-5 (11 values).
std::vector<double> default_eps_list();

/// Least-squares slope of log|measured| against log eps. Samples with
/// measured == 0 or eps == 0 are skipped; needs two usable points.
double convergence_order(std::span<const PerturbationSample> samples);

/// Forces F_t = grad ln p_{x_t}(h_t) for t = 1..T-1 (aligned with
/// trajectory_mechanics records). Requires a head.
std::vector<Vec> trajectory_forces(const Trajectory& traj);

/// |R_t| for each interior step t = 1..T-2.
std::vector<double> trajectory_el_residual_norms(const Trajectory& traj,
                                                 SignConvention conv);

}  // namespace logdyn
