#include "cli.hpp"

#include "crnkit/complex_balance.hpp"
#include "crnkit/dynamics.hpp"
#include "crnkit/equivalence.hpp"
#include "crnkit/errors.hpp"
#include "crnkit/io.hpp"
#include "crnkit/robustness.hpp"
#include "crnkit/structure.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

namespace crn::cli {

namespace {

constexpr double kPerturbHorizon = 100.0;

struct Options {
  std::string net, net2, rates, rates2, out, meta, format, x0;
  bool real = false;
  bool exact = false;
  bool no_convergence = false;
  std::optional<double> t_end;
  double rel_tol = IntegratorConfig{}.rel_tol;
  double abs_tol = IntegratorConfig{}.abs_tol;
  double max_step = 0.0;
  int samples = 0;
  std::optional<double> eps;
  int trials = 20;
  std::uint64_t seed = 0;
  int ics = 5;
  int threads = 0;
  double limit_tol = 1e-5;
  std::string kappa1 = "1", kappa2;
  std::vector<std::string> positional;
  std::optional<double> a1, a5, k2;
  std::string k3, k4;
};

ValidationMode mode(const Options& o) { return o.real ? ValidationMode::Real : ValidationMode::Integer; }

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write file: " + path);
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

RateValues rates_for(const ParsedNetwork& parsed, const std::string& path) {
  if (!path.empty()) return load_rates(parsed.network, path);
  if (parsed.inline_rates) {
    const auto& v = *parsed.inline_rates;
    return {RateAssignment(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))),
            std::nullopt};
  }
  throw PreconditionError("rate constants required: pass --rates or write them inline");
}

Eigen::VectorXd state_arg(const ReactionNetwork& net, const std::string& text) {
  const auto v = parse_number_list(text);
  if (static_cast<int>(v.size()) != net.num_species())
    throw ValidationError("--x0 needs " + std::to_string(net.num_species()) + " values");
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  require_positive_state(x, net.num_species());
  return x;
}

IntegratorConfig integrator_config(const Options& o, double default_t_end) {
  IntegratorConfig cfg;
  cfg.t_end = o.t_end.value_or(default_t_end);
  cfg.rel_tol = o.rel_tol;
  cfg.abs_tol = o.abs_tol;
  cfg.max_step = o.max_step;
  if (o.no_convergence) cfg.detect_convergence = ConvergenceDetection::Disabled;
  cfg.validate();
  return cfg;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const auto parsed = load_network(o.net, mode(o));
  emit(dump(analysis_json(parsed.network, analyze(parsed.network))), o.out, out);
  return kSuccess;
}

int cmd_check_cb(const Options& o, std::ostream& out) {
  const auto parsed = load_network(o.net, mode(o));
  const auto& net = parsed.network;
  const RateValues rates = rates_for(parsed, o.rates);
  std::optional<Eigen::VectorXd> x0;
  if (!o.x0.empty()) x0 = state_arg(net, o.x0);
  const CBReport report = check_complex_balance(net, rates.kappa, x0);
  emit(dump(cb_report_json(net, report)), o.out, out);
  return report.is_complex_balanced ? kSuccess : kNegative;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto parsed = load_network(o.net, mode(o));
  const auto& net = parsed.network;
  const RateValues rates = rates_for(parsed, o.rates);
  if (o.x0.empty()) throw PreconditionError("--x0 is required");
  const Eigen::VectorXd x0 = state_arg(net, o.x0);
  IntegratorConfig cfg = integrator_config(o, 10.0);
  if (o.samples < 0) throw ValidationError("--samples must be nonnegative");
  for (int k = 1; k <= o.samples; ++k) cfg.output_times.push_back(cfg.t_end * k / o.samples);

  Trajectory traj = integrate(net, rates.kappa, x0, cfg);
  if (o.samples > 0) {
    Trajectory grid = traj;
    grid.times = {0.0};
    grid.states = {x0};
    for (double t : cfg.output_times)
      if (t <= traj.t_reached()) {
        grid.times.push_back(t);
        grid.states.push_back(traj.state_at(t));
      }
    traj = std::move(grid);
  }

  if (o.format == "json") {
    emit(dump(trajectory_json(net, traj, cfg)), o.out, out);
  } else {
    std::ostringstream csv;
    write_trajectory_csv(csv, net, traj);
    emit(csv.str(), o.out, out);
    const std::string meta = !o.meta.empty() ? o.meta : (o.out.empty() || o.out == "-" ? "" : o.out + ".json");
    if (!meta.empty()) emit(dump(trajectory_metadata_json(net, traj, cfg)), meta, out);
  }
  return traj.ok() ? kSuccess : kNumerical;
}

int cmd_perturb(const Options& o, std::ostream& out) {
  const auto parsed = load_network(o.net, mode(o));
  const auto& net = parsed.network;
  const RateValues rates = rates_for(parsed, o.rates);
  const StoichAnalysis stoich = analyze(net);
  if (!stoich.weakly_reversible) throw PreconditionError("perturbation probes require a weakly reversible network");

  Eigen::VectorXd x0;
  if (!o.x0.empty()) {
    x0 = state_arg(net, o.x0);
  } else {
    const ToricMembership toric = toric_membership(net, rates.kappa);
    if (!toric.member) throw PreconditionError("kappa_star is not complex-balanced");
    x0 = toric.log_x.array().exp().matrix();
  }

  const double eps = o.eps.value_or(0.05 * rates.kappa.values().norm());
  PerturbationPlan plan{rates.kappa, eps, o.trials, o.seed, {}, integrator_config(o, kPerturbHorizon), o.limit_tol, 0.5};
  if (o.ics < 1) throw PreconditionError("--ics must be at least 1");
  plan.initial_conditions = default_initial_conditions(stoich, x0, o.ics);

  const PerturbationResult result = perturbation_experiment(net, plan, o.threads);
  emit(dump(perturbation_json(net, plan, result)), o.out, out);

  if (result.envelope.failure) return kNumerical;
  if (!result.verdict.inconclusive.empty()) return kInconclusive;
  return result.verdict.all_unique && result.envelope.passed ? kSuccess : kNegative;
}

int cmd_bifurcate(const Options& o, std::ostream& out) {
  const auto parsed = load_network(o.net, mode(o));
  std::vector<std::pair<double, double>> grid;
  for (double k1 : parse_grid(o.kappa1))
    for (double k2 : parse_grid(o.kappa2)) grid.emplace_back(k1, k2);
  const auto scan = bifurcation_scan_1d(parsed.network, grid);
  if (o.format == "json") {
    emit(dump(bifurcation_json(scan)), o.out, out);
  } else {
    std::ostringstream csv;
    write_bifurcation_csv(csv, scan);
    emit(csv.str(), o.out, out);
  }
  return kSuccess;
}

int cmd_equiv_pair(const Options& o, std::ostream& out) {
  std::string path_a = o.net, path_b = o.net2;
  if (!o.positional.empty()) {
    if (o.positional.size() != 2 || !o.net.empty() || !o.net2.empty())
      throw PreconditionError("equiv takes two network files");
    path_a = o.positional[0];
    path_b = o.positional[1];
  }
  if (path_a.empty() || path_b.empty()) throw PreconditionError("equiv takes two network files");

  const auto a = load_network(path_a, mode(o));
  const auto b = load_network(path_b, mode(o));
  const RateValues ra = rates_for(a, o.rates);
  const RateValues rb = rates_for(b, o.rates2);
  const bool exact = o.exact || (ra.exact && rb.exact);
  EquivalenceResult result;
  if (exact) {
    if (!ra.exact || !rb.exact) throw PreconditionError("--exact needs integer or \"p/q\" rates");
    result = dynamically_equivalent(a.network, *ra.exact, b.network, *rb.exact);
  } else {
    result = dynamically_equivalent(a.network, ra.kappa, b.network, rb.kappa);
  }
  emit(dump(equivalence_json(result, exact)), o.out, out);
  return result.equivalent ? kSuccess : kNegative;
}

int cmd_equiv_region(const Options& o, std::ostream& out) {
  if (!o.a1 || !o.a5 || !o.k2 || o.k3.empty() || o.k4.empty())
    throw PreconditionError("region mode needs --a1, --a5, --kappa2, --kappa3 and --kappa4");
  SquareDiagonalParams base{*o.a1, *o.a5, *o.k2, 1.0, 1.0};
  const auto k3 = parse_grid(o.k3);
  const auto k4 = parse_grid(o.k4);
  const auto sweep = square_diagonal_sweep(base, k3, k4);
  const bool consistent = std::all_of(sweep.begin(), sweep.end(), [](const auto& v) { return v.consistent; });

  if (sweep.size() == 1 && o.format != "csv") {
    emit(dump(region_json(sweep.front())), o.out, out);
  } else if (o.format == "json") {
    Json arr = Json::array();
    for (const auto& v : sweep) arr.push_back(region_json(v));
    emit(dump(Json{{"points", arr}}), o.out, out);
  } else {
    std::ostringstream csv;
    write_region_csv(csv, sweep);
    emit(csv.str(), o.out, out);
  }
  return consistent ? kSuccess : kNumerical;
}

int cmd_equiv(const Options& o, std::ostream& out) {
  if (o.a1 || o.a5 || o.k2 || !o.k3.empty() || !o.k4.empty()) return cmd_equiv_region(o, out);
  return cmd_equiv_pair(o, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Mass-action reaction network toolkit", "crnkit"};
  app.require_subcommand(1);

  auto add_net = [&](CLI::App* c, bool required = true) {
    auto* opt = c->add_option("--net", o.net, "network file");
    if (required) opt->required();
    c->add_flag("--real", o.real, "allow real stoichiometric coefficients (0 or >= 1)");
    c->add_option("--out", o.out, "output file (default stdout)");
  };
  auto add_integrator = [&](CLI::App* c, double t_end) {
    c->add_option("--t-end", o.t_end, "integration horizon (default " + format_double(t_end) + ")");
    c->add_option("--rel-tol", o.rel_tol, "relative tolerance")->capture_default_str();
    c->add_option("--abs-tol", o.abs_tol, "absolute tolerance")->capture_default_str();
    c->add_option("--max-step", o.max_step, "largest step (0: unlimited)");
    c->add_flag("--no-convergence", o.no_convergence, "do not stop at a detected steady state");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "structural report");
  add_net(analyze_cmd);

  auto* check = app.add_subcommand("check-cb", "complex-balance report");
  add_net(check);
  check->add_option("--rates", o.rates, "rate file");
  check->add_option("--x0", o.x0, "state selecting the compatibility class");

  auto* sim = app.add_subcommand("simulate", "integrate the mass-action system");
  add_net(sim);
  sim->add_option("--rates", o.rates, "rate file");
  sim->add_option("--x0", o.x0, "initial state, comma separated")->required();
  add_integrator(sim, 10.0);
  sim->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--meta", o.meta, "metadata file for csv output (default <out>.json)");
  sim->add_option("--samples", o.samples, "report on a uniform grid of this many intervals");

  auto* pert = app.add_subcommand("perturb", "rate perturbation probe");
  add_net(pert);
  pert->add_option("--rates", o.rates, "rate file with the complex-balanced kappa*");
  pert->add_option("--eps", o.eps, "ball radius (default 0.05 |kappa*|)");
  pert->add_option("--trials", o.trials, "number of sampled rate vectors")->capture_default_str();
  pert->add_option("--seed", o.seed, "random seed")->capture_default_str();
  pert->add_option("--x0", o.x0, "base initial state (default: the complex-balanced witness)");
  pert->add_option("--ics", o.ics, "initial conditions per trial")->capture_default_str();
  pert->add_option("--threads", o.threads, "worker threads (default CRN_THREADS or all cores)");
  pert->add_option("--limit-tol", o.limit_tol, "relative tolerance between limits")->capture_default_str();
  pert->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));
  add_integrator(pert, kPerturbHorizon);

  auto* bif = app.add_subcommand("bifurcate", "steady states of 0 <-> X, 2X <-> 3X over a rate grid");
  add_net(bif);
  bif->add_option("--kappa1", o.kappa1, "list or start:stop:step")->capture_default_str();
  bif->add_option("--kappa2", o.kappa2, "list or start:stop:step")->required();
  bif->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* eq = app.add_subcommand("equiv", "dynamical equivalence");
  add_net(eq, false);
  eq->add_option("networks", o.positional, "two network files");
  eq->add_option("--net2", o.net2, "second network file");
  eq->add_option("--rates", o.rates, "rate file for the first network");
  eq->add_option("--rates2", o.rates2, "rate file for the second network");
  eq->add_flag("--exact", o.exact, "compare in rational arithmetic");
  eq->add_option("--a1", o.a1, "square-diagonal inflow to X");
  eq->add_option("--a5", o.a5, "square-diagonal inflow to X+Y");
  eq->add_option("--kappa2", o.k2, "rate of X -> X+Y");
  eq->add_option("--kappa3", o.k3, "rate of X+Y -> Y (list or start:stop:step)");
  eq->add_option("--kappa4", o.k4, "rate of Y -> 0 (list or start:stop:step)");
  eq->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(o, out);
    if (check->parsed()) return cmd_check_cb(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (pert->parsed()) return cmd_perturb(o, out);
    if (bif->parsed()) return cmd_bifurcate(o, out);
    if (eq->parsed()) return cmd_equiv(o, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace crn::cli
