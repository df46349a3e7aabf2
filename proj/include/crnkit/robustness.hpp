#pragma once

#include "crnkit/dynamics.hpp"
#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"
#include "crnkit/structure.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crn {

/// Rate perturbation experiment around kappa_star: `trials` rate vectors drawn
/// uniformly from the Euclidean ball B(kappa_star, eps), each integrated from
/// every initial condition.
struct PerturbationPlan {
  RateAssignment kappa_star;
  double eps = 0.0;
  int trials = 20;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> initial_conditions{};  // one compatibility class
  IntegratorConfig cfg{};
  double limit_tolerance = 1e-5;  // relative pairwise distance between limits
  double window_fraction = 0.5;   // permanence window starts at this fraction of t_end

  /// Throws PreconditionError unless eps < min kappa_star, trials >= 1 and the
  /// initial conditions are positive and pairwise compatible.
  void validate(const ReactionNetwork& net, const StoichAnalysis& stoich) const;
};

/// Counter-based uniform in [0,1): a pure function of (seed, stream, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform point in the Euclidean ball of the given radius in R^dim
/// (normalised Gaussian direction, radius * U^{1/dim}).
Eigen::VectorXd sample_ball(std::uint64_t seed, std::uint64_t stream, int dim, double radius);

/// kappa_star + u with u uniform in B(0, eps); deterministic in (seed, trial).
RateAssignment perturb_sample(const PerturbationPlan& plan, int trial_index);

/// x0 followed by x0 + d for d = P_S(x0 o (exp(+-0.5 b_k) - 1)) over the basis
/// vectors b_k of S, halved until positive. All returned states lie in the
/// class of x0.
std::vector<Eigen::VectorXd> default_initial_conditions(const StoichAnalysis& stoich,
                                                        const Eigen::Ref<const Eigen::VectorXd>& x0, int count);

struct TrialResult {
  int index = 0;
  Eigen::VectorXd kappa;
  std::vector<std::optional<Eigen::VectorXd>> limits;  // per initial condition
  double max_pairwise_distance = 0.0;                   // relative, sup-norm
  bool conclusive = false;                              // every integration converged
  std::optional<Eigen::VectorXd> attractor;             // mean limit when unique
  double distance_to_reference = 0.0;                   // |attractor - x*|
  std::vector<std::string> failures;
};

struct StabilityVerdict {
  std::vector<TrialResult> per_trial;
  bool all_unique = false;
  std::vector<int> inconclusive;
  Eigen::VectorXd reference_state;  // complex-balanced steady state of kappa_star in the class
  double max_distance_to_reference = 0.0;
};

struct PermanenceEnvelope {
  double window_start = 0.0;
  Eigen::VectorXd box_lo;
  Eigen::VectorXd box_hi;
  double margin_to_boundary = 0.0;
  bool passed = false;
  std::optional<std::string> failure;
  std::optional<Eigen::VectorXd> failing_kappa;
};

struct PerturbationResult {
  StabilityVerdict verdict;
  PermanenceEnvelope envelope;
};

/// Number of worker threads: `requested` if positive, else CRN_THREADS, else
/// the hardware concurrency.
int resolve_thread_count(int requested = 0);

/// Evidence for a unique global attractor under perturbation. Requires
/// (net, kappa_star) complex-balanced. Falsification-oriented: finitely many
/// initial conditions cannot certify global stability.
StabilityVerdict global_stability_probe(const ReactionNetwork& net, const PerturbationPlan& plan, int threads = 0);

/// Late-time bounding box over all trials and initial conditions.
PermanenceEnvelope permanence_probe(const ReactionNetwork& net, const PerturbationPlan& plan, int threads = 0);

/// Both probes from one set of integrations.
PerturbationResult perturbation_experiment(const ReactionNetwork& net, const PerturbationPlan& plan,
                                           int threads = 0);

/// Oscillating schedule per trial: k_e(t) = clamp(k*_e (1 + amplitude sin(w_e t + p_e)), bound, 1/bound)
/// with w_e in [0.2, 2] and p_e in [0, 2 pi) drawn from the plan's seed.
RateSchedule oscillating_schedule(const PerturbationPlan& plan, int trial_index, double schedule_bound,
                                  double amplitude = 0.5);

/// Permanence probe for variable-rate systems with oscillating schedules.
PermanenceEnvelope permanence_probe_variable(const ReactionNetwork& net, const PerturbationPlan& plan,
                                             double schedule_bound, int threads = 0);

// ---------------------------------------------------------------------------
// One-species steady states and the cubic bifurcation scan

enum class Stability { Stable, Unstable, Degenerate };
std::string to_string(Stability s);

struct SteadyState1d {
  double root = 0.0;
  int multiplicity = 1;
  double eigenvalue = 0.0;
  Stability stability = Stability::Degenerate;
};

/// Positive steady states of a one-species mass-action system with integer
/// exponents, via companion-matrix eigenvalues polished by Newton. Clustered
/// roots are merged and reported with their multiplicity.
std::vector<SteadyState1d> steady_states_1d(const ReactionNetwork& net, const RateAssignment& kappa);

struct BifurcationPoint {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  std::vector<SteadyState1d> steady_states;
};

/// The network 0 <-> X, 2X <-> 3X in edge order 0->X, X->0, 2X->3X, 3X->2X.
/// Returns the edge indices of those four reactions in `net`, or throws
/// PreconditionError when the network has a different shape.
std::array<int, 4> cubic_switch_edges(const ReactionNetwork& net);

/// Scan over (kappa1, kappa2) with kappa4 = kappa1 and kappa3 = kappa2.
std::vector<BifurcationPoint> bifurcation_scan_1d(const ReactionNetwork& net,
                                                  const std::vector<std::pair<double, double>>& grid);

}  // namespace crn
