#include "crnkit/robustness.hpp"

#include "crnkit/complex_balance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <map>
#include <numbers>
#include <thread>

namespace crn {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, count). Results must be written to per-index slots;
// the lowest-index exception is rethrown so failures do not depend on scheduling.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (threads == 1) {
    for (int i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) guarded(i);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double relative_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>(), 1e-300});
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

struct TrajectorySummary {
  std::optional<Eigen::VectorXd> limit;
  Eigen::VectorXd lo, hi;  // over the permanence window
  bool ok = false;
  std::string failure;
};

TrajectorySummary summarize(const Trajectory& traj, double window_start) {
  TrajectorySummary s;
  s.ok = traj.ok();
  if (!s.ok) s.failure = to_string(traj.status) + ": " + traj.message;
  s.limit = traj.converged_to;
  const auto n = traj.states.front().size();
  s.lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  s.hi = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < window_start) continue;
    s.lo = s.lo.cwiseMin(traj.states[i]);
    s.hi = s.hi.cwiseMax(traj.states[i]);
  }
  if (!std::isfinite(s.lo(0))) {
    s.lo = traj.states.back();
    s.hi = traj.states.back();
  }
  return s;
}

struct TrialRun {
  Eigen::VectorXd kappa;
  std::vector<TrajectorySummary> runs;
};

PermanenceEnvelope reduce_envelope(const std::vector<TrialRun>& trials, double window_start, int n) {
  PermanenceEnvelope env;
  env.window_start = window_start;
  env.box_lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  env.box_hi = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  for (const auto& trial : trials) {
    for (const auto& run : trial.runs) {
      if (!run.ok && !env.failure) {
        env.failure = run.failure;
        env.failing_kappa = trial.kappa;
      }
      env.box_lo = env.box_lo.cwiseMin(run.lo);
      env.box_hi = env.box_hi.cwiseMax(run.hi);
    }
  }
  env.margin_to_boundary = env.box_lo.minCoeff();
  env.passed = !env.failure && env.margin_to_boundary > 0.0 && env.box_hi.allFinite();
  return env;
}

std::vector<TrialRun> run_trials(const ReactionNetwork& net, const PerturbationPlan& plan, int threads) {
  std::vector<TrialRun> out(static_cast<std::size_t>(plan.trials));
  const double window_start = plan.window_fraction * plan.cfg.t_end;
  parallel_for(plan.trials, resolve_thread_count(threads), [&](int i) {
    const RateAssignment kappa = perturb_sample(plan, i);
    TrialRun& tr = out[static_cast<std::size_t>(i)];
    tr.kappa = kappa.values();
    for (const auto& ic : plan.initial_conditions)
      tr.runs.push_back(summarize(integrate(net, kappa, ic, plan.cfg), window_start));
  });
  return out;
}

StabilityVerdict reduce_verdict(const std::vector<TrialRun>& trials, const PerturbationPlan& plan,
                                Eigen::VectorXd reference) {
  StabilityVerdict v;
  v.reference_state = std::move(reference);
  v.all_unique = true;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    TrialResult r;
    r.index = static_cast<int>(i);
    r.kappa = trials[i].kappa;
    r.conclusive = true;
    for (const auto& run : trials[i].runs) {
      r.limits.push_back(run.limit);
      if (!run.ok) r.failures.push_back(run.failure);
      if (!run.limit) r.conclusive = false;
    }
    if (r.conclusive) {
      for (std::size_t a = 0; a < r.limits.size(); ++a)
        for (std::size_t b = a + 1; b < r.limits.size(); ++b)
          r.max_pairwise_distance = std::max(r.max_pairwise_distance, relative_distance(*r.limits[a], *r.limits[b]));
      if (r.max_pairwise_distance <= plan.limit_tolerance) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(r.limits.front()->size());
        for (const auto& l : r.limits) mean += *l;
        r.attractor = mean / static_cast<double>(r.limits.size());
        r.distance_to_reference = (*r.attractor - v.reference_state).norm();
        v.max_distance_to_reference = std::max(v.max_distance_to_reference, r.distance_to_reference);
      }
    } else {
      v.inconclusive.push_back(r.index);
    }
    v.all_unique = v.all_unique && r.conclusive && r.attractor.has_value();
    v.per_trial.push_back(std::move(r));
  }
  return v;
}

Eigen::VectorXd cb_reference(const ReactionNetwork& net, const PerturbationPlan& plan) {
  const ToricMembership toric = toric_membership(net, plan.kappa_star);
  if (!toric.member)
    throw PreconditionError("kappa_star is not complex-balanced (toric residual " + std::to_string(toric.residual) +
                            ")");
  return solve_cb_steady_state(net, analyze(net), plan.kappa_star, toric, plan.initial_conditions.front()).x;
}

}  // namespace

void PerturbationPlan::validate(const ReactionNetwork& net, const StoichAnalysis& stoich) const {
  kappa_star.check(net);
  if (!(eps >= 0.0)) throw PreconditionError("eps must be nonnegative");
  if (!(eps < kappa_star.values().minCoeff()))
    throw PreconditionError("eps must be smaller than the smallest rate constant of kappa_star");
  if (trials < 1) throw PreconditionError("at least one trial is required");
  if (initial_conditions.empty()) throw PreconditionError("at least one initial condition is required");
  if (!(window_fraction >= 0.0 && window_fraction <= 1.0))
    throw PreconditionError("window fraction must lie in [0,1]");
  for (const auto& ic : initial_conditions) {
    require_positive_state(ic, net.num_species());
    if (!compatibility_class_membership(stoich, initial_conditions.front(), ic, 1e-10))
      throw PreconditionError("initial conditions are not in one compatibility class");
  }
  cfg.validate();
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = splitmix(splitmix(seed ^ splitmix(stream)) + counter);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Eigen::VectorXd sample_ball(std::uint64_t seed, std::uint64_t stream, int dim, double radius) {
  Eigen::VectorXd g(dim);
  std::uint64_t counter = 0;
  for (int i = 0; i < dim; i += 2) {
    const double u1 = 1.0 - counter_uniform(seed, stream, counter++);  // (0,1]
    const double u2 = counter_uniform(seed, stream, counter++);
    const double r = std::sqrt(-2.0 * std::log(u1));
    g(i) = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dim) g(i + 1) = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  const double norm = g.norm();
  if (norm == 0.0 || radius == 0.0) return Eigen::VectorXd::Zero(dim);
  const double u = counter_uniform(seed, stream, counter);
  return g * (radius * std::pow(u, 1.0 / dim) / norm);
}

RateAssignment perturb_sample(const PerturbationPlan& plan, int trial_index) {
  const Eigen::VectorXd& k = plan.kappa_star.values();
  return RateAssignment(k + sample_ball(plan.seed, static_cast<std::uint64_t>(trial_index),
                                        static_cast<int>(k.size()), plan.eps));
}

std::vector<Eigen::VectorXd> default_initial_conditions(const StoichAnalysis& stoich,
                                                        const Eigen::Ref<const Eigen::VectorXd>& x0, int count) {
  require_positive_state(x0, static_cast<int>(stoich.stoich_basis.rows()));
  std::vector<Eigen::VectorXd> out{x0};
  const Eigen::MatrixXd& b = stoich.stoich_basis;
  const double amplitudes[] = {0.5, 1.0, 0.25, 1.5, 0.125};
  for (double amp : amplitudes) {
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
      for (double sign : {1.0, -1.0}) {
        if (static_cast<int>(out.size()) >= count) return out;
        const Eigen::VectorXd push = x0.array() * ((sign * amp * b.col(k)).array().exp() - 1.0);
        Eigen::VectorXd d = b * (b.transpose() * push);
        if (d.norm() <= 1e-12 * x0.norm()) continue;
        Eigen::VectorXd x = x0 + d;
        while (!(x.array() > 0.0).all()) {
          d *= 0.5;
          x = x0 + d;
        }
        out.push_back(std::move(x));
      }
    }
  }
  return out;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CRN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

StabilityVerdict global_stability_probe(const ReactionNetwork& net, const PerturbationPlan& plan, int threads) {
  return perturbation_experiment(net, plan, threads).verdict;
}

PermanenceEnvelope permanence_probe(const ReactionNetwork& net, const PerturbationPlan& plan, int threads) {
  const StoichAnalysis stoich = analyze(net);
  plan.validate(net, stoich);
  return reduce_envelope(run_trials(net, plan, threads), plan.window_fraction * plan.cfg.t_end, net.num_species());
}

PerturbationResult perturbation_experiment(const ReactionNetwork& net, const PerturbationPlan& plan, int threads) {
  const StoichAnalysis stoich = analyze(net);
  plan.validate(net, stoich);
  Eigen::VectorXd reference = cb_reference(net, plan);
  const auto trials = run_trials(net, plan, threads);
  return {reduce_verdict(trials, plan, std::move(reference)),
          reduce_envelope(trials, plan.window_fraction * plan.cfg.t_end, net.num_species())};
}

RateSchedule oscillating_schedule(const PerturbationPlan& plan, int trial_index, double schedule_bound,
                                  double amplitude) {
  const Eigen::VectorXd& k = plan.kappa_star.values();
  const std::uint64_t stream = (std::uint64_t{1} << 32) | static_cast<std::uint32_t>(trial_index);
  std::vector<RateSchedule::Function> fs;
  for (Eigen::Index e = 0; e < k.size(); ++e) {
    const auto c = static_cast<std::uint64_t>(2 * e);
    const double omega = 0.2 + 1.8 * counter_uniform(plan.seed, stream, c);
    const double phase = 2.0 * std::numbers::pi * counter_uniform(plan.seed, stream, c + 1);
    fs.emplace_back([base = k(e), omega, phase, amplitude, schedule_bound](double t) {
      return std::clamp(base * (1.0 + amplitude * std::sin(omega * t + phase)), schedule_bound,
                        1.0 / schedule_bound);
    });
  }
  return RateSchedule(std::move(fs), schedule_bound);
}

PermanenceEnvelope permanence_probe_variable(const ReactionNetwork& net, const PerturbationPlan& plan,
                                             double schedule_bound, int threads) {
  const StoichAnalysis stoich = analyze(net);
  plan.validate(net, stoich);
  const double window_start = plan.window_fraction * plan.cfg.t_end;
  std::vector<TrialRun> trials(static_cast<std::size_t>(plan.trials));
  parallel_for(plan.trials, resolve_thread_count(threads), [&](int i) {
    const RateSchedule schedule = oscillating_schedule(plan, i, schedule_bound);
    TrialRun& tr = trials[static_cast<std::size_t>(i)];
    tr.kappa = plan.kappa_star.values();
    for (const auto& ic : plan.initial_conditions)
      tr.runs.push_back(summarize(integrate_variable(net, schedule, ic, plan.cfg), window_start));
  });
  return reduce_envelope(trials, window_start, net.num_species());
}

// ---------------------------------------------------------------------------

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Degenerate: return "degenerate";
  }
  return "unknown";
}

std::vector<SteadyState1d> steady_states_1d(const ReactionNetwork& net, const RateAssignment& kappa) {
  kappa.check(net);
  if (net.num_species() != 1) throw PreconditionError("one-species network required");
  if (!net.integral()) throw PreconditionError("integer exponents required");

  // f(x) = sum_d c_d x^d
  std::map<int, double> coeff;
  for (int e = 0; e < net.num_reactions(); ++e) {
    const auto& r = net.reaction(e);
    const auto d = static_cast<int>(net.complex(r.source)(0));
    coeff[d] += kappa[e] * net.reaction_vector(e)(0);
  }
  std::erase_if(coeff, [](const auto& kv) { return kv.second == 0.0; });
  if (coeff.empty()) throw PreconditionError("vector field vanishes identically");

  const int low = coeff.begin()->first;
  const int degree = coeff.rbegin()->first - low;
  std::vector<SteadyState1d> out;
  if (degree == 0) return out;

  Eigen::VectorXd p = Eigen::VectorXd::Zero(degree + 1);  // p(x) = f(x) / x^low
  for (const auto& [d, c] : coeff) p(d - low) = c;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -p(i) / p(degree);
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);

  struct Cluster {
    std::complex<double> sum;
    int count;
    std::complex<double> centre() const { return sum / static_cast<double>(count); }
  };
  std::vector<Cluster> clusters;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
      return std::abs(c.centre() - z) <= 1e-4 * std::max(1.0, std::abs(z));
    });
    if (it == clusters.end())
      clusters.push_back({z, 1});
    else {
      it->sum += z;
      ++it->count;
    }
  }

  auto poly = [&](double x) {
    double v = 0.0, dv = 0.0;
    for (int i = degree; i >= 0; --i) {
      dv = dv * x + v;
      v = v * x + p(i);
    }
    return std::pair{v, dv};
  };

  const double k_scale = std::max(1.0, kappa.values().maxCoeff());
  for (const auto& c : clusters) {
    const std::complex<double> z = c.centre();
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z)) || z.real() <= 0.0) continue;
    double x = z.real();
    if (c.count == 1) {
      for (int it = 0; it < 30; ++it) {
        const auto [v, dv] = poly(x);
        if (dv == 0.0) break;
        const double step = v / dv;
        x -= step;
        if (std::abs(step) <= 1e-16 * std::abs(x)) break;
      }
    }
    SteadyState1d s;
    s.root = x;
    s.multiplicity = c.count;
    s.eigenvalue = jacobian_unchecked(net, kappa.values(), Eigen::VectorXd::Constant(1, x))(0, 0);
    if (c.count > 1 || std::abs(s.eigenvalue) <= 1e-9 * k_scale)
      s.stability = Stability::Degenerate;
    else
      s.stability = s.eigenvalue < 0.0 ? Stability::Stable : Stability::Unstable;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.root < b.root; });
  return out;
}

std::array<int, 4> cubic_switch_edges(const ReactionNetwork& net) {
  auto fail = [] {
    throw PreconditionError("expected the one-species network 0 <-> X, 2X <-> 3X");
  };
  if (net.num_species() != 1 || net.num_complexes() != 4 || net.num_reactions() != 4) fail();
  auto vertex = [&](double c) {
    const int v = net.find_complex(Eigen::VectorXd::Constant(1, c));
    if (v < 0) fail();
    return v;
  };
  const int v0 = vertex(0), v1 = vertex(1), v2 = vertex(2), v3 = vertex(3);
  const std::array<int, 4> edges{net.find_reaction(v0, v1), net.find_reaction(v1, v0), net.find_reaction(v2, v3),
                                 net.find_reaction(v3, v2)};
  for (int e : edges)
    if (e < 0) fail();
  return edges;
}

std::vector<BifurcationPoint> bifurcation_scan_1d(const ReactionNetwork& net,
                                                  const std::vector<std::pair<double, double>>& grid) {
  const auto edges = cubic_switch_edges(net);
  std::vector<BifurcationPoint> out;
  out.reserve(grid.size());
  for (const auto& [k1, k2] : grid) {
    Eigen::VectorXd k(4);
    k(edges[0]) = k1;
    k(edges[1]) = k2;
    k(edges[2]) = k2;
    k(edges[3]) = k1;
    out.push_back({k1, k2, steady_states_1d(net, RateAssignment(k))});
  }
  return out;
}

}  // namespace crn
