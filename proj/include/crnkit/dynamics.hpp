#pragma once

#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace crn {

enum class ConvergenceDetection {
  Default,  // on for autonomous systems, off for variable-rate systems
  Enabled,
  Disabled,
};

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;  // 0: unlimited
  double t_end = 10.0;
  /// Trailing time span used for convergence detection; <= 0 selects 5% of t_end.
  double convergence_window = 0.0;
  /// Bound on sup-norm relative variation over the window.
  double convergence_eps = 1e-9;
  /// Bound on |f(x)| relative to the flux scale at the final state.
  double convergence_rhs_tol = 1e-6;
  ConvergenceDetection detect_convergence = ConvergenceDetection::Default;
  double initial_step = 0.0;  // 0: automatic
  double min_step = 1e-12;    // relative to max(1, t)
  long max_steps = 10'000'000;
  /// Nonzero disables error control and uses this constant step.
  double fixed_step = 0.0;
  /// Integration fails when the S-perp drift exceeds this.
  double drift_bound = 1e-6;
  /// Times the integrator must land on exactly (sorted, within (0, t_end]).
  std::vector<double> output_times;

  /// Throws ValidationError on nonpositive tolerances or a negative horizon.
  void validate() const;
};

enum class IntegrationStatus { Completed, StepUnderflow, PositivityFailure, MaxStepsExceeded, DriftExceeded };

std::string to_string(IntegrationStatus status);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  double conservation_drift = 0.0;
  std::optional<Eigen::VectorXd> converged_to;
  long step_count = 0;
  long rejected_steps = 0;
  IntegrationStatus status = IntegrationStatus::Completed;
  std::string message;

  bool ok() const { return status == IntegrationStatus::Completed; }
  double t_reached() const { return times.empty() ? 0.0 : times.back(); }
  const Eigen::VectorXd& final_state() const { return states.back(); }
  /// Linear interpolation between recorded samples; t is clamped to the range.
  Eigen::VectorXd state_at(double t) const;
};

/// Adaptive Dormand-Prince 5(4) solution of the mass-action system on
/// [0, t_end]. Steps that would leave the positive orthant are rejected and
/// halved. Failures are reported through Trajectory::status with the partial
/// trajectory kept.
Trajectory integrate(const ReactionNetwork& net, const RateAssignment& kappa,
                     const Eigen::Ref<const Eigen::VectorXd>& x0, const IntegratorConfig& cfg = {});

/// Same for time-dependent rates. Schedule bound violations propagate as
/// ValidationError.
Trajectory integrate_variable(const ReactionNetwork& net, const RateSchedule& schedule,
                              const Eigen::Ref<const Eigen::VectorXd>& x0, const IntegratorConfig& cfg = {});

struct DescentCheck {
  bool monotone = true;
  double max_increase = 0.0;
};

/// Evaluates V(x; x_star) along the samples. Monotone when every increase is
/// at most 1e-9 V + 1e-12.
DescentCheck lyapunov_descent_check(const ReactionNetwork& net, const RateAssignment& kappa,
                                    const Trajectory& traj, const Eigen::Ref<const Eigen::VectorXd>& x_star);

}  // namespace crn
