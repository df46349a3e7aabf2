#pragma once

#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"
#include "crnkit/structure.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <vector>

namespace crn {

/// Outflow minus inflow at each vertex: k_i. x^{y_i} - sum_j k_ji x^{y_j}.
/// All zero exactly when x is a complex-balanced steady state.
Eigen::VectorXd cb_residual(const ReactionNetwork& net, const RateAssignment& kappa,
                            const Eigen::Ref<const Eigen::VectorXd>& x);

struct TreeConstants {
  Eigen::VectorXd values;  // one per vertex
};

enum class TreeMode {
  Strict,   // non-weakly-reversible networks are rejected
  Lenient,  // vertices without a spanning in-tree get exactly 0
};

TreeConstants tree_constants(const ReactionNetwork& net, const RateAssignment& kappa,
                             TreeMode mode = TreeMode::Strict);

inline constexpr double kToricThreshold = 1e-8;

/// Outcome of the log-linear toric locus test. The witness satisfies
/// y_i . log_x = log K_i + log_c[class(i)] in the least-squares sense, with
/// the freedom in the solution spent on making log_c as small as possible.
struct ToricMembership {
  bool member = false;
  double residual = 0.0;
  Eigen::VectorXd log_x;
  Eigen::VectorXd log_c;  // per linkage class
};

/// Decides whether (net, kappa) is complex-balanced: log K must lie in
/// span(rows of Y) + span(linkage-class indicators). Requires weak reversibility.
ToricMembership toric_membership(const ReactionNetwork& net, const RateAssignment& kappa,
                                 double threshold = kToricThreshold);

struct SteadyStateOptions {
  int max_iterations = 50;
  double step_tolerance = 1e-12;
  /// Optional starting point; it is mapped onto the steady-state manifold
  /// through its log-coordinates along S-perp.
  std::optional<Eigen::VectorXd> initial_guess;
};

struct SteadyStateResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double last_step = 0.0;
  double class_residual = 0.0;  // |W^T (x - x0)|
  double rhs_residual = 0.0;    // |f(x)| / flux_scale(x)
};

/// Newton failure carrying the last iterate.
class SteadyStateConvergenceError : public NumericalError {
 public:
  SteadyStateConvergenceError(const std::string& what, SteadyStateResult last)
      : NumericalError(what), last_(std::move(last)) {}
  const SteadyStateResult& last() const { return last_; }

 private:
  SteadyStateResult last_;
};

/// The complex-balanced steady state in the compatibility class of x0, found
/// by damped Newton on x = x_ref o exp(W a) with W spanning S-perp.
SteadyStateResult solve_cb_steady_state(const ReactionNetwork& net, const RateAssignment& kappa,
                                        const Eigen::Ref<const Eigen::VectorXd>& x0,
                                        const SteadyStateOptions& options = {});
SteadyStateResult solve_cb_steady_state(const ReactionNetwork& net, const StoichAnalysis& stoich,
                                        const RateAssignment& kappa, const ToricMembership& toric,
                                        const Eigen::Ref<const Eigen::VectorXd>& x0,
                                        const SteadyStateOptions& options = {});

inline constexpr double kCentreThreshold = 1e-8;

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by |Re| ascending
  std::vector<std::complex<double>> centre;       // n - s smallest |Re|
  std::vector<std::complex<double>> transverse;   // the remaining s
  bool centre_consistent = false;  // every centre eigenvalue has |Re| <= threshold
  bool stable = false;             // every transverse eigenvalue has Re < -threshold
};

/// Eigenvalues of the Jacobian at a steady state, split into the n - s centre
/// directions (transverse to compatibility classes) and the s in-class ones.
/// Throws PreconditionError unless |f(x_star)| <= steady_tol * flux_scale.
StabilityReport linear_stability(const ReactionNetwork& net, const RateAssignment& kappa,
                                 const Eigen::Ref<const Eigen::VectorXd>& x_star, const StoichAnalysis& stoich,
                                 double centre_threshold = kCentreThreshold, double steady_tol = 1e-8);

struct CBReport {
  TreeConstants tree_constants;
  bool is_complex_balanced = false;
  double membership_residual = 0.0;
  std::optional<Eigen::VectorXd> steady_state;
  /// Evaluated at the steady state when balanced, otherwise at the
  /// least-squares witness.
  Eigen::VectorXd per_vertex_residuals;
  std::vector<std::complex<double>> spectrum;
  std::optional<StabilityReport> stability;
};

/// Full complex-balance check. Without x0 the steady state reported is the
/// witness with the smallest linkage-class scale factors.
CBReport check_complex_balance(const ReactionNetwork& net, const RateAssignment& kappa,
                               const std::optional<Eigen::VectorXd>& x0 = std::nullopt);

}  // namespace crn
