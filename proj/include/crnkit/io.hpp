#pragma once

#include "crnkit/complex_balance.hpp"
#include "crnkit/dynamics.hpp"
#include "crnkit/equivalence.hpp"
#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"
#include "crnkit/rational.hpp"
#include "crnkit/robustness.hpp"
#include "crnkit/structure.hpp"

#include <Eigen/Core>

#include "json.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace crn {

using Json = nlohmann::ordered_json;

/// Whole file as a string; throws Error naming the path when unreadable.
std::string read_text_file(const std::string& path);

/// Parse a network file; parse errors are rethrown with the path prepended.
ParsedNetwork load_network(const std::string& path, ValidationMode mode = ValidationMode::Integer);

/// Rate constants from a rate file. `exact` is set when every value was an
/// integer or a "p/q" string.
struct RateValues {
  RateAssignment kappa;
  std::optional<VectorX<Rational>> exact;
};

/// JSON object keyed by reaction text ("3X -> X+Y+Z"); values are positive
/// numbers or "p/q" strings. Every reaction must be listed exactly once.
RateValues parse_rates(const ReactionNetwork& net, const std::string& text);
RateValues load_rates(const ReactionNetwork& net, const std::string& path);

/// "p/q", "p" or a decimal literal; throws ParseError otherwise.
Rational parse_rational(const std::string& text);

/// Comma-separated list of doubles.
std::vector<double> parse_number_list(const std::string& text);
/// Comma-separated list, or "start:stop:step" with the end point included when hit.
std::vector<double> parse_grid(const std::string& text);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const std::vector<std::complex<double>>& eigenvalues);

Json analysis_json(const ReactionNetwork& net, const StoichAnalysis& stoich);
Json cb_report_json(const ReactionNetwork& net, const CBReport& report);
Json trajectory_metadata_json(const ReactionNetwork& net, const Trajectory& traj, const IntegratorConfig& cfg);
Json trajectory_json(const ReactionNetwork& net, const Trajectory& traj, const IntegratorConfig& cfg);
Json perturbation_json(const ReactionNetwork& net, const PerturbationPlan& plan, const PerturbationResult& result);
Json bifurcation_json(const std::vector<BifurcationPoint>& scan);
Json equivalence_json(const EquivalenceResult& result, bool exact);
Json region_json(const RegionVerdict& verdict);

/// Columns t followed by the species names; one row per recorded sample.
void write_trajectory_csv(std::ostream& os, const ReactionNetwork& net, const Trajectory& traj);
/// Columns kappa1, kappa2, num_roots, root, multiplicity, eigenvalue, stability;
/// one row per steady state, or one row with empty root fields when none exist.
void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& scan);
/// Columns kappa3, kappa4, ratio, verdict.
void write_region_csv(std::ostream& os, const std::vector<RegionVerdict>& sweep);

/// Shortest round-trip decimal form used by every CSV writer.
std::string format_double(double v);

}  // namespace crn
