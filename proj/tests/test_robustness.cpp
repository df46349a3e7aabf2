#include <catch2/catch_amalgamated.hpp>

#include "crnkit/complex_balance.hpp"
#include "crnkit/errors.hpp"
#include "crnkit/robustness.hpp"
#include "crnkit/structure.hpp"
#include "support/fixtures.hpp"

#include <cmath>
#include <random>

using namespace crn;
using crn::test::vec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Eigen::VectorXd kCubicStar = vec({2, std::cbrt(4.0), std::cbrt(2.0)});

PerturbationPlan cubic_plan(double eps, int trials, int ics) {
  const auto net = test::cubic_triangle();
  PerturbationPlan plan{.kappa_star = test::cubic_triangle_cb_rates()};
  plan.eps = eps;
  plan.trials = trials;
  plan.seed = 7;
  plan.initial_conditions = default_initial_conditions(analyze(net), vec({3, 1, 1}), ics);
  plan.cfg.t_end = 20;
  return plan;
}

// Closed-form positive roots of k1 - k2 x + k2 x^2 - k1 x^3 = (1 - x)(k1 x^2 - (k2 - k1) x + k1).
std::vector<double> closed_form_roots(double k1, double k2) {
  std::vector<double> r{1.0};
  const double disc = (k2 - k1) * (k2 - k1) - 4 * k1 * k1;
  if (disc > 0) {
    r.push_back((k2 - k1 - std::sqrt(disc)) / (2 * k1));
    r.push_back((k2 - k1 + std::sqrt(disc)) / (2 * k1));
  }
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST_CASE("counter-based uniforms are pure functions of their inputs", "[robustness][rng]") {
  CHECK(counter_uniform(1, 2, 3) == counter_uniform(1, 2, 3));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(1, 2, 4));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(1, 3, 3));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(2, 2, 3));
  double sum = 0;
  for (std::uint64_t c = 0; c < 20000; ++c) {
    const double u = counter_uniform(42, 0, c);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK_THAT(sum / 20000, WithinAbs(0.5, 0.01));
}

TEST_CASE("ball samples are uniform in the Euclidean ball", "[robustness][rng]") {
  const int dim = 5;
  const double radius = 0.3;
  int inner = 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const Eigen::VectorXd u = sample_ball(9, s, dim, radius);
    REQUIRE(u.norm() <= radius);
    if (u.norm() <= radius * std::pow(0.5, 1.0 / dim)) ++inner;
    mean += u;
  }
  // Half the volume lies within radius * 2^{-1/dim}.
  CHECK_THAT(inner / 4000.0, WithinAbs(0.5, 0.03));
  CHECK((mean / 4000.0).norm() <= 0.02);
  CHECK(sample_ball(9, 1, dim, 0.0).isZero(0.0));
}

TEST_CASE("perturbed rates", "[robustness]") {
  auto plan = cubic_plan(0.05, 20, 5);
  for (int i = 0; i < 1000; ++i) {
    const auto k = perturb_sample(plan, i);
    CHECK((k.values() - plan.kappa_star.values()).norm() <= plan.eps);
    CHECK((k.values().array() > 0).all());
  }
  CHECK(perturb_sample(plan, 3).values() == perturb_sample(plan, 3).values());
  CHECK(perturb_sample(plan, 3).values() != perturb_sample(plan, 4).values());
  plan.eps = 0;
  CHECK(perturb_sample(plan, 3).values() == plan.kappa_star.values());
}

TEST_CASE("default initial conditions share one compatibility class", "[robustness]") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = test::random_network(rng);
    const auto a = analyze(net);
    const Eigen::VectorXd x0 = test::random_state(rng, net.num_species());
    const auto ics = default_initial_conditions(a, x0, 5);
    CHECK(ics.front() == x0);
    CHECK(ics.size() == static_cast<std::size_t>(std::min(5, 1 + 2 * 5 * a.dim_s)));
    for (const auto& x : ics) {
      CHECK((x.array() > 0).all());
      CHECK(compatibility_class_membership(a, x0, x, 1e-10 * (1 + x0.norm())));
    }
  }
}

TEST_CASE("plan validation", "[robustness][errors]") {
  const auto net = test::cubic_triangle();
  const auto a = analyze(net);
  auto plan = cubic_plan(0.05, 2, 2);
  CHECK_NOTHROW(plan.validate(net, a));
  plan.eps = 1.0;
  CHECK_THROWS_AS(plan.validate(net, a), PreconditionError);
  plan = cubic_plan(0.05, 0, 2);
  CHECK_THROWS_AS(plan.validate(net, a), PreconditionError);
  plan = cubic_plan(0.05, 2, 2);
  plan.initial_conditions.push_back(vec({1, 1, 1}));
  CHECK_THROWS_AS(plan.validate(net, a), PreconditionError);
  plan = cubic_plan(0.05, 2, 2);
  plan.kappa_star = RateAssignment{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(perturbation_experiment(net, plan), PreconditionError);
}

TEST_CASE("unperturbed probe finds the balanced steady state", "[robustness][probe]") {
  const auto net = test::cubic_triangle();
  const auto plan = cubic_plan(0.0, 2, 5);
  const auto res = perturbation_experiment(net, plan, 1);
  CHECK(res.verdict.all_unique);
  CHECK(res.verdict.inconclusive.empty());
  const auto star = solve_cb_steady_state(net, plan.kappa_star, plan.initial_conditions.front()).x;
  CHECK(test::rel_diff(res.verdict.reference_state, star) <= 1e-10);
  for (const auto& t : res.verdict.per_trial)
    for (const auto& limit : t.limits) {
      REQUIRE(limit);
      CHECK(test::rel_diff(*limit, star) <= 1e-6);
    }
  CHECK(res.envelope.passed);
  CHECK(res.envelope.margin_to_boundary > 0);
}

TEST_CASE("perturbed cubic triangle keeps a unique attractor", "[robustness][probe]") {
  const auto net = test::cubic_triangle();
  const auto plan = cubic_plan(0.05, 6, 5);
  const auto res = perturbation_experiment(net, plan);
  CHECK(res.verdict.all_unique);
  for (const auto& t : res.verdict.per_trial) {
    CHECK(t.conclusive);
    CHECK(t.max_pairwise_distance <= plan.limit_tolerance);
    REQUIRE(t.attractor);
    // Each limit is a steady state of the perturbed system.
    const RateAssignment k(t.kappa);
    CHECK(rhs(net, k, *t.attractor).norm() <= 1e-6 * flux_scale(net, t.kappa, *t.attractor));
  }
  CHECK((res.envelope.box_lo.array() <= res.envelope.box_hi.array()).all());
  CHECK(res.envelope.passed);
}

TEST_CASE("attractor distance shrinks with the perturbation radius", "[robustness][probe]") {
  const auto net = test::cubic_triangle();
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.05, 0.01}) {
    const auto v = global_stability_probe(net, cubic_plan(eps, 6, 2));
    REQUIRE(v.all_unique);
    CHECK(v.max_distance_to_reference < previous);
    previous = v.max_distance_to_reference;
  }
}

TEST_CASE("unique limits survive a longer horizon", "[robustness][probe][property]") {
  const auto net = test::cubic_triangle();
  auto plan = cubic_plan(0.05, 3, 3);
  const auto first = global_stability_probe(net, plan);
  REQUIRE(first.all_unique);
  plan.cfg.t_end *= 2;
  const auto second = global_stability_probe(net, plan);
  for (std::size_t t = 0; t < first.per_trial.size(); ++t)
    for (std::size_t i = 0; i < first.per_trial[t].limits.size(); ++i)
      CHECK(test::rel_diff(*second.per_trial[t].limits[i], *first.per_trial[t].limits[i]) <= 1e-6);
}

TEST_CASE("probe results do not depend on the thread count", "[robustness][determinism]") {
  const auto net = test::cubic_triangle();
  const auto plan = cubic_plan(0.05, 5, 3);
  const auto a = perturbation_experiment(net, plan, 1);
  const auto b = perturbation_experiment(net, plan, 3);
  REQUIRE(a.verdict.per_trial.size() == b.verdict.per_trial.size());
  for (std::size_t t = 0; t < a.verdict.per_trial.size(); ++t) {
    CHECK(a.verdict.per_trial[t].kappa == b.verdict.per_trial[t].kappa);
    CHECK(a.verdict.per_trial[t].max_pairwise_distance == b.verdict.per_trial[t].max_pairwise_distance);
    CHECK(*a.verdict.per_trial[t].attractor == *b.verdict.per_trial[t].attractor);
  }
  CHECK(a.envelope.box_lo == b.envelope.box_lo);
  CHECK(a.envelope.box_hi == b.envelope.box_hi);
  CHECK(a.verdict.max_distance_to_reference == b.verdict.max_distance_to_reference);
}

TEST_CASE("permanence envelope of a single steady trajectory is a point", "[robustness][permanence]") {
  const auto net = test::cubic_triangle();
  PerturbationPlan plan{.kappa_star = test::cubic_triangle_cb_rates()};
  plan.trials = 1;
  plan.initial_conditions = {kCubicStar};
  const auto env = permanence_probe(net, plan);
  CHECK(env.passed);
  CHECK(test::rel_diff(env.box_lo, kCubicStar) <= 1e-10);
  CHECK(test::rel_diff(env.box_hi, kCubicStar) <= 1e-10);
  CHECK_THAT(env.margin_to_boundary, WithinRel(kCubicStar.minCoeff(), 1e-10));
}

TEST_CASE("oscillating rates keep the cubic triangle permanent", "[robustness][permanence][variable]") {
  const auto net = test::cubic_triangle();
  auto plan = cubic_plan(0.0, 3, 2);
  plan.cfg.t_end = 100;
  const auto schedule = oscillating_schedule(plan, 0, 0.5);
  for (double t : {0.0, 1.0, 10.0, 77.7}) {
    const Eigen::VectorXd k = schedule.at(t);
    CHECK((k.array() >= 0.5).all());
    CHECK((k.array() <= 2.0).all());
  }
  const auto env = permanence_probe_variable(net, plan, 0.5, 1);
  CHECK(env.passed);
  CHECK(env.margin_to_boundary > 0);
  CHECK(env.box_hi.allFinite());
  const auto again = permanence_probe_variable(net, plan, 0.5, 2);
  CHECK(again.box_lo == env.box_lo);
  CHECK(again.box_hi == env.box_hi);
}

TEST_CASE("one-species steady states match the closed form", "[robustness][bifurcation]") {
  const auto net = test::bistable_1d();
  for (double k1 : {0.5, 1.0, 2.0}) {
    for (double ratio : {0.5, 1.0, 2.0, 2.9, 3.1, 4.0, 5.0, 8.0}) {
      const double k2 = ratio * k1;
      const auto states = steady_states_1d(net, RateAssignment{k1, k2, k2, k1});
      const auto want = closed_form_roots(k1, k2);
      REQUIRE(states.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK_THAT(states[i].root, WithinAbs(want[i], 1e-9));
        // f'(x) = -k2 + 2 k2 x - 3 k1 x^2
        const double x = states[i].root;
        CHECK_THAT(states[i].eigenvalue, WithinAbs(-k2 + 2 * k2 * x - 3 * k1 * x * x, 1e-9 * (1 + k2)));
      }
      const auto at_one = std::find_if(states.begin(), states.end(), [](const auto& s) { return std::abs(s.root - 1) < 1e-9; });
      REQUIRE(at_one != states.end());
      CHECK_THAT(at_one->eigenvalue, WithinAbs(k2 - 3 * k1, 1e-10));
      CHECK(at_one->stability == (k2 < 3 * k1 ? Stability::Stable : Stability::Unstable));
    }
  }
}

TEST_CASE("pitchfork point has a triple root", "[robustness][bifurcation]") {
  const auto states = steady_states_1d(test::bistable_1d(), RateAssignment{1, 3, 3, 1});
  REQUIRE(states.size() == 1);
  CHECK_THAT(states[0].root, WithinAbs(1.0, 1e-4));
  CHECK(states[0].multiplicity == 3);
  CHECK(states[0].stability == Stability::Degenerate);
}

TEST_CASE("two of three roots at kappa2 = 5", "[robustness][bifurcation]") {
  const auto states = steady_states_1d(test::bistable_1d(), RateAssignment{1, 5, 5, 1});
  REQUIRE(states.size() == 3);
  CHECK_THAT(states[0].root, WithinAbs(2 - std::sqrt(3.0), 1e-12));
  CHECK_THAT(states[1].root, WithinAbs(1.0, 1e-12));
  CHECK_THAT(states[2].root, WithinAbs(2 + std::sqrt(3.0), 1e-12));
  CHECK(states[0].stability == Stability::Stable);
  CHECK(states[1].stability == Stability::Unstable);
  CHECK(states[2].stability == Stability::Stable);
}

TEST_CASE("bifurcation scan over a grid", "[robustness][bifurcation]") {
  const auto net = test::bistable_1d();
  std::vector<std::pair<double, double>> grid;
  for (double k2 : {1.0, 2.0, 2.9, 3.1, 4.0, 5.0}) grid.emplace_back(1.0, k2);
  const auto scan = bifurcation_scan_1d(net, grid);
  REQUIRE(scan.size() == grid.size());
  const std::size_t want[] = {1, 1, 1, 3, 3, 3};
  for (std::size_t i = 0; i < scan.size(); ++i) {
    CHECK(scan[i].kappa1 == grid[i].first);
    CHECK(scan[i].kappa2 == grid[i].second);
    CHECK(scan[i].steady_states.size() == want[i]);
  }
  CHECK(scan[0].steady_states[0].eigenvalue == Catch::Approx(-2.0));

  // Edge order in the file does not matter.
  const auto shuffled = parse_network("2X -> 3X\n0 -> X\n3X -> 2X\nX -> 0\n");
  const auto s2 = bifurcation_scan_1d(shuffled, grid);
  for (std::size_t i = 0; i < scan.size(); ++i) CHECK(s2[i].steady_states.size() == want[i]);

  CHECK_THROWS_AS(bifurcation_scan_1d(test::reversible_pair(), grid), PreconditionError);
  CHECK_THROWS_AS(cubic_switch_edges(parse_network("0 <-> X\nX <-> 2X\n")), PreconditionError);
}
