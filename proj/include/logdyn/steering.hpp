#pragma once

// Minimal-action Jacobian steering: move a hidden state along the
// normalized log-probability gradient of a target token until the head
// assigns it probability >= eta.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logdyn/error.hpp"
#include "logdyn/head.hpp"
#include "logdyn/toy_model.hpp"
#include "logdyn/trajectory.hpp"

namespace logdyn {

struct SteerParams {
  double eta = 0.5;
  std::size_t max_steps = 50;
  // Initial trial step of each line search. Unset means 0.1 * |h_k| at the
  // current iterate, floored at 1e-3.
  std::optional<double> alpha0;
  double backtrack_factor = 0.5;
  std::size_t max_backtracks = 20;
};

void validate(const SteerParams& params);

struct SteerStep {
  double p_target = 0;     // after the step
  double step_length = 0;  // accepted alpha
};

struct SteerResult {
  Vec h_hat;
  std::size_t steps_taken = 0;
  double p_initial = 0;
  double p_final = 0;
  bool converged = false;
  std::vector<SteerStep> path;
  double total_displacement = 0;
};

/// Thrown when no trial step length increases p_target; carries the path so
/// far.
class SteeringStalled : public Error {
 public:
  SteeringStalled(const std::string& what, SteerResult partial)
      : Error(ErrorKind::SteeringStalled, what), partial_(std::move(partial)) {}
  const SteerResult& partial() const noexcept { return partial_; }

 private:
  SteerResult partial_;
};

/// Identical to log_prob_gradient(head, h, target).
Vec steering_direction(const UnembeddingHead& head, std::span<const double> h,
                       std::uint32_t target);

SteerResult steer(const UnembeddingHead& head, std::span<const double> h,
                  std::uint32_t target, const SteerParams& params);

struct MinimalActionReport {
  double optimal_norm = 0;  // |c g / |g|^2|
  double min_ratio = 0;     // min over samples of |r'| / optimal_norm
  std::size_t n_used = 0;
  std::size_t n_rejected = 0;  // near-orthogonal draws
  bool holds = false;          // every |r'| >= optimal_norm - 1e-9
};

/// |r'| / |c g/|g|^2| where r' = c r / (g . r). Throws InvalidArgument when
/// g . r == 0.
double action_ratio(std::span<const double> g, double c, std::span<const double> r);

/// Samples random perturbations rescaled to the same first-order gain
/// g . r' = c and compares their norm with the gradient-parallel one.
MinimalActionReport minimal_action_check(const UnembeddingHead& head,
                                         std::span<const double> h, std::uint32_t target,
                                         double c, std::size_t n_samples,
                                         std::uint64_t seed);

struct SteerContinuation {
  SteerResult steer;
  // Empty when continue_steps == 0.
  std::optional<Trajectory> continuation;
};

/// Steers the state at `step_index` of a trajectory generated by `model`,
/// forces `target` as the realized token there and greedily regenerates
/// continue_steps tokens. The prompt is taken from the trajectory's
/// generator notes.
SteerContinuation steer_and_continue(const toy::Model& model, const Trajectory& traj,
                                     std::size_t step_index, std::uint32_t target,
                                     const SteerParams& params, std::size_t continue_steps);

}  // namespace logdyn
