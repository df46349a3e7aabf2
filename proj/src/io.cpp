#include "crnkit/io.hpp"

#include "crnkit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace crn {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParsedNetwork load_network(const std::string& path, ValidationMode mode) {
  const std::string text = read_text_file(path);
  try {
    return parse_network_text(text, mode);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0, 0);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Rational parse_rational(const std::string& text) {
  using boost::multiprecision::cpp_int;
  auto digits = [&](std::string_view s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
      throw ParseError("not a rational number: '" + text + "'", 0, 0);
    return cpp_int(std::string(s));
  };
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const cpp_int den = digits(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + text + "'", 0, 0);
    value = Rational(digits(s.substr(0, slash)), den);
  } else {
    long exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view ex = s.substr(e + 1);
      bool neg_exp = false;
      if (!ex.empty() && (ex.front() == '-' || ex.front() == '+')) {
        neg_exp = ex.front() == '-';
        ex.remove_prefix(1);
      }
      exponent = static_cast<long>(digits(ex));
      if (neg_exp) exponent = -exponent;
      s = s.substr(0, e);
    }
    std::string mantissa(s);
    if (const auto dot = mantissa.find('.'); dot != std::string::npos) {
      exponent -= static_cast<long>(mantissa.size() - dot - 1);
      mantissa.erase(dot, 1);
    }
    value = Rational(digits(mantissa));
    const Rational ten_pow = Rational(boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::labs(exponent))));
    value = exponent >= 0 ? value * ten_pow : value / ten_pow;
  }
  return negative ? Rational(-value) : value;
}

RateValues parse_rates(const ReactionNetwork& net, const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid rate file: ") + e.what(), 0, 0);
  }
  if (!doc.is_object()) throw ParseError("rate file must be a JSON object keyed by reaction", 0, 0);

  const int r = net.num_reactions();
  Eigen::VectorXd values = Eigen::VectorXd::Constant(r, std::nan(""));
  VectorX<Rational> exact(r);
  bool all_exact = true;
  for (const auto& [key, value] : doc.items()) {
    const int e = find_reaction_by_text(net, key);
    if (!std::isnan(values(e))) throw ParseError("reaction listed twice in rate file: " + key, 0, 0);
    if (value.is_number_integer()) {
      exact(e) = Rational(value.get<long long>());
      values(e) = static_cast<double>(exact(e));
    } else if (value.is_number()) {
      values(e) = value.get<double>();
      all_exact = false;
    } else if (value.is_string()) {
      exact(e) = parse_rational(value.get<std::string>());
      values(e) = static_cast<double>(exact(e));
    } else {
      throw ParseError("rate for '" + key + "' must be a number or a \"p/q\" string", 0, 0);
    }
  }
  for (int e = 0; e < r; ++e)
    if (std::isnan(values(e))) throw ValidationError("rate file has no entry for reaction " + format_reaction(net, e));

  RateValues out{RateAssignment(values), std::nullopt};
  if (all_exact) out.exact = exact;
  return out;
}

RateValues load_rates(const ReactionNetwork& net, const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_rates(net, text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0, 0);
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + item + "'", 0, 0);
    }
    if (item.find_first_not_of(' ', used) != std::string::npos) throw ParseError("not a number: '" + item + "'", 0, 0);
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("empty number list", 0, 0);
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_number_list(text);
  std::string fields = text;
  std::replace(fields.begin(), fields.end(), ':', ',');
  const auto parts = parse_number_list(fields);
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw ParseError("grid must be start:stop:step with step > 0 and stop >= start", 0, 0);
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] * (1.0 + 1e-12) + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const std::vector<std::complex<double>>& eigenvalues) {
  Json out = Json::array();
  for (const auto& z : eigenvalues) out.push_back(Json::array({z.real(), z.imag()}));
  return out;
}

namespace {

Json optional_vector(const std::optional<Eigen::VectorXd>& v) { return v ? to_json(*v) : Json(nullptr); }

Json partition_json(const ReactionNetwork& net, const Partition& p) {
  Json out = Json::array();
  for (const auto& block : p.blocks) {
    Json names = Json::array();
    for (int v : block) names.push_back(format_complex(net, v));
    out.push_back(std::move(names));
  }
  return out;
}

Json network_json(const ReactionNetwork& net) {
  Json complexes = Json::array(), reactions = Json::array();
  for (int i = 0; i < net.num_complexes(); ++i) complexes.push_back(format_complex(net, i));
  for (int e = 0; e < net.num_reactions(); ++e) reactions.push_back(format_reaction(net, e));
  return {{"species", net.species()}, {"complexes", complexes}, {"reactions", reactions}};
}

Json integrator_json(const IntegratorConfig& cfg) {
  return {{"rel_tol", cfg.rel_tol},
          {"abs_tol", cfg.abs_tol},
          {"max_step", cfg.max_step},
          {"min_step", cfg.min_step},
          {"max_steps", cfg.max_steps},
          {"t_end", cfg.t_end},
          {"convergence_window", cfg.convergence_window > 0.0 ? cfg.convergence_window : 0.05 * cfg.t_end},
          {"convergence_eps", cfg.convergence_eps},
          {"convergence_rhs_tol", cfg.convergence_rhs_tol},
          {"drift_bound", cfg.drift_bound}};
}

}  // namespace

Json analysis_json(const ReactionNetwork& net, const StoichAnalysis& stoich) {
  Json out = network_json(net);
  out["n"] = net.num_species();
  out["m"] = net.num_complexes();
  out["r"] = net.num_reactions();
  out["l"] = stoich.linkage_classes.size();
  out["dimS"] = stoich.dim_s;
  out["deficiency"] = stoich.deficiency;
  out["weakly_reversible"] = stoich.weakly_reversible;
  out["linkage_classes"] = partition_json(net, stoich.linkage_classes);
  out["strong_components"] = partition_json(net, stoich.strong_components);
  out["tolerances"] = {{"rank_threshold", kRankThreshold}};
  return out;
}

Json cb_report_json(const ReactionNetwork& net, const CBReport& report) {
  Json out = network_json(net);
  out["complex_balanced"] = report.is_complex_balanced;
  out["membership_residual"] = report.membership_residual;
  out["tree_constants"] = to_json(report.tree_constants.values);
  out["steady_state"] = optional_vector(report.steady_state);
  out["per_vertex_residuals"] = to_json(report.per_vertex_residuals);
  out["spectrum"] = to_json(report.spectrum);
  if (report.stability)
    out["stability"] = {{"stable", report.stability->stable},
                        {"centre_consistent", report.stability->centre_consistent},
                        {"centre", to_json(report.stability->centre)},
                        {"transverse", to_json(report.stability->transverse)}};
  else
    out["stability"] = nullptr;
  out["tolerances"] = {{"toric_threshold", kToricThreshold},
                       {"vertex_balance_rel_tol", 1e-8},
                       {"centre_threshold", kCentreThreshold},
                       {"newton_max_iterations", SteadyStateOptions{}.max_iterations},
                       {"newton_step_tolerance", SteadyStateOptions{}.step_tolerance}};
  return out;
}

Json trajectory_metadata_json(const ReactionNetwork& net, const Trajectory& traj, const IntegratorConfig& cfg) {
  return {{"species", net.species()},
          {"status", to_string(traj.status)},
          {"ok", traj.ok()},
          {"message", traj.message},
          {"t_reached", traj.t_reached()},
          {"samples", traj.times.size()},
          {"steps", traj.step_count},
          {"rejected_steps", traj.rejected_steps},
          {"conservation_drift", traj.conservation_drift},
          {"converged", traj.converged_to.has_value()},
          {"converged_to", optional_vector(traj.converged_to)},
          {"final_state", to_json(traj.final_state())},
          {"integrator", integrator_json(cfg)}};
}

Json trajectory_json(const ReactionNetwork& net, const Trajectory& traj, const IntegratorConfig& cfg) {
  Json out = trajectory_metadata_json(net, traj, cfg);
  Json states = Json::array();
  for (const auto& x : traj.states) states.push_back(to_json(x));
  out["times"] = traj.times;
  out["states"] = std::move(states);
  return out;
}

Json perturbation_json(const ReactionNetwork& net, const PerturbationPlan& plan, const PerturbationResult& result) {
  Json ics = Json::array();
  for (const auto& x : plan.initial_conditions) ics.push_back(to_json(x));
  Json trials = Json::array();
  for (const auto& t : result.verdict.per_trial) {
    Json limits = Json::array();
    for (const auto& l : t.limits) limits.push_back(optional_vector(l));
    trials.push_back({{"index", t.index},
                      {"kappa", to_json(t.kappa)},
                      {"conclusive", t.conclusive},
                      {"max_pairwise_distance", t.max_pairwise_distance},
                      {"attractor", optional_vector(t.attractor)},
                      {"distance_to_reference", t.attractor ? Json(t.distance_to_reference) : Json(nullptr)},
                      {"limits", std::move(limits)},
                      {"failures", t.failures}});
  }
  const auto& env = result.envelope;
  return {{"species", net.species()},
          {"plan",
           {{"kappa_star", to_json(plan.kappa_star.values())},
            {"eps", plan.eps},
            {"trials", plan.trials},
            {"seed", plan.seed},
            {"ball_norm", "euclidean"},
            {"initial_conditions", std::move(ics)},
            {"limit_tolerance", plan.limit_tolerance},
            {"window_fraction", plan.window_fraction},
            {"integrator", integrator_json(plan.cfg)}}},
          {"verdict",
           {{"all_unique", result.verdict.all_unique},
            {"inconclusive", result.verdict.inconclusive},
            {"reference_state", to_json(result.verdict.reference_state)},
            {"max_distance_to_reference", result.verdict.max_distance_to_reference},
            {"trials", std::move(trials)}}},
          {"permanence",
           {{"passed", env.passed},
            {"window_start", env.window_start},
            {"box_lo", to_json(env.box_lo)},
            {"box_hi", to_json(env.box_hi)},
            {"margin_to_boundary", env.margin_to_boundary},
            {"failure", env.failure ? Json(*env.failure) : Json(nullptr)},
            {"failing_kappa", optional_vector(env.failing_kappa)}}}};
}

Json bifurcation_json(const std::vector<BifurcationPoint>& scan) {
  Json points = Json::array();
  for (const auto& p : scan) {
    Json states = Json::array();
    for (const auto& s : p.steady_states)
      states.push_back({{"root", s.root},
                        {"multiplicity", s.multiplicity},
                        {"eigenvalue", s.eigenvalue},
                        {"stability", to_string(s.stability)}});
    points.push_back({{"kappa1", p.kappa1},
                      {"kappa2", p.kappa2},
                      {"num_roots", p.steady_states.size()},
                      {"steady_states", std::move(states)}});
  }
  return {{"points", std::move(points)}};
}

Json equivalence_json(const EquivalenceResult& result, bool exact) {
  return {{"equivalent", result.equivalent},
          {"max_coeff_gap", result.max_coeff_gap},
          {"arithmetic", exact ? "exact" : "floating"},
          {"rel_tol", exact ? 0.0 : 1e-12}};
}

Json region_json(const RegionVerdict& v) {
  Json out = {{"params",
               {{"a1", v.params.a1},
                {"a5", v.params.a5},
                {"kappa2", v.params.kappa2},
                {"kappa3", v.params.kappa3},
                {"kappa4", v.params.kappa4}}},
              {"ratio", v.ratio},
              {"verdict", to_string(v.position)},
              {"consistent", v.consistent}};
  if (v.reparameterization)
    out["reparameterization"] = {{"feasible", v.reparameterization->feasible},
                                 {"kappa1", v.reparameterization->kappa1},
                                 {"kappa5", v.reparameterization->kappa5},
                                 {"kappa6", v.reparameterization->kappa6}};
  else
    out["reparameterization"] = nullptr;
  out["toric_residual"] = v.toric_residual ? Json(*v.toric_residual) : Json(nullptr);
  out["equivalence"] = v.equivalence ? equivalence_json(*v.equivalence, false) : Json(nullptr);
  return out;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const ReactionNetwork& net, const Trajectory& traj) {
  os << "t";
  for (const auto& s : net.species()) os << ',' << s;
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_double(traj.times[i]);
    for (Eigen::Index k = 0; k < traj.states[i].size(); ++k) os << ',' << format_double(traj.states[i](k));
    os << '\n';
  }
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& scan) {
  os << "kappa1,kappa2,num_roots,root,multiplicity,eigenvalue,stability\n";
  for (const auto& p : scan) {
    const std::string head = format_double(p.kappa1) + ',' + format_double(p.kappa2) + ',' +
                             std::to_string(p.steady_states.size()) + ',';
    if (p.steady_states.empty()) os << head << ",,,\n";
    for (const auto& s : p.steady_states)
      os << head << format_double(s.root) << ',' << s.multiplicity << ',' << format_double(s.eigenvalue) << ','
         << to_string(s.stability) << '\n';
  }
}

void write_region_csv(std::ostream& os, const std::vector<RegionVerdict>& sweep) {
  os << "kappa3,kappa4,ratio,verdict\n";
  for (const auto& v : sweep)
    os << format_double(v.params.kappa3) << ',' << format_double(v.params.kappa4) << ',' << format_double(v.ratio)
       << ',' << to_string(v.position) << '\n';
}

}  // namespace crn
