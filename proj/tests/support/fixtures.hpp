#pragma once

#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace crn::test {

inline ReactionNetwork cubic_triangle() {
  return parse_network(
      "3X -> X + Y + Z\n"
      "X + Y + Z -> 3Z\n"
      "3Z -> 3X\n"
      "3Z -> 3Y\n"
      "3Y -> 3X\n");
}

// Edge order: 3X->X+Y+Z, X+Y+Z->3Z, 3Z->3X, 3Z->3Y, 3Y->3X.
inline RateAssignment cubic_triangle_cb_rates() { return {1, 2, 2, 2, 1}; }

inline ReactionNetwork bistable_1d() { return parse_network("0 <-> X\n2X <-> 3X\n"); }

inline ReactionNetwork reversible_pair() { return parse_network("X <-> Y\n"); }

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1e-300, b.lpNorm<Eigen::Infinity>());
}

struct RandomNetworkOptions {
  int species_min = 1;
  int species_max = 4;
  int complexes_min = 2;
  int complexes_max = 6;
  int max_coeff = 3;
  bool weakly_reversible = false;
  double extra_edge_probability = 0.25;
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random valid network. Weakly reversible ones are unions of classes built
/// as a directed cycle plus random chords.
inline ReactionNetwork random_network(std::mt19937_64& rng, const RandomNetworkOptions& o = {}) {
  const int n = uniform_int(rng, o.species_min, o.species_max);
  long distinct = 1;
  for (int i = 0; i < n; ++i) distinct *= o.max_coeff + 1;
  const int m = static_cast<int>(std::min<long>(uniform_int(rng, o.complexes_min, o.complexes_max), distinct));

  std::set<std::vector<int>> seen;
  Eigen::MatrixXd y(n, m);
  for (int j = 0; j < m;) {
    std::vector<int> c(static_cast<std::size_t>(n));
    for (auto& v : c) v = uniform_int(rng, 0, o.max_coeff);
    if (!seen.insert(c).second) continue;
    for (int i = 0; i < n; ++i) y(i, j) = c[static_cast<std::size_t>(i)];
    ++j;
  }

  std::set<std::pair<int, int>> edges;
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // Split into classes of at least two vertices.
  std::vector<std::vector<int>> classes;
  for (std::size_t i = 0; i < order.size();) {
    const auto left = order.size() - i;
    std::size_t size = left;
    if (left >= 4 && uniform_int(rng, 0, 1) == 1) size = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<int>(left) - 2));
    classes.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(i + size));
    i += size;
  }

  for (const auto& cls : classes) {
    const auto k = cls.size();
    if (o.weakly_reversible) {
      for (std::size_t i = 0; i < k; ++i) edges.emplace(cls[i], cls[(i + 1) % k]);
    } else {
      for (std::size_t i = 1; i < k; ++i) {
        const int other = cls[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1))];
        if (uniform_int(rng, 0, 1) == 0)
          edges.emplace(cls[i], other);
        else
          edges.emplace(other, cls[i]);
      }
    }
    for (int a : cls)
      for (int b : cls)
        if (a != b && uniform_real(rng, 0.0, 1.0) < o.extra_edge_probability) edges.emplace(a, b);
  }

  std::vector<Reaction> reactions;
  for (const auto& [s, t] : edges) reactions.push_back({s, t});
  std::shuffle(reactions.begin(), reactions.end(), rng);
  std::vector<std::string> species;
  for (int i = 0; i < n; ++i) species.push_back("S" + std::to_string(i));
  return ReactionNetwork(species, y, reactions);
}

inline RateAssignment random_rates(std::mt19937_64& rng, const ReactionNetwork& net, double lo = 0.5,
                                   double hi = 2.0) {
  Eigen::VectorXd k(net.num_reactions());
  for (auto& v : k) v = uniform_real(rng, lo, hi);
  return RateAssignment(k);
}

inline Eigen::VectorXd random_state(std::mt19937_64& rng, int n, double lo = 0.2, double hi = 3.0) {
  Eigen::VectorXd x(n);
  for (auto& v : x) v = uniform_real(rng, lo, hi);
  return x;
}

struct CBSystem {
  ReactionNetwork net;
  RateAssignment kappa;
  Eigen::VectorXd x_star;
};

/// Complex-balanced system with a known steady state: edge fluxes form a
/// positive circulation (a sum of weighted cycles, one through every edge)
/// and the rates are those fluxes divided by x*^{y_source}.
inline CBSystem random_cb_system(std::mt19937_64& rng, RandomNetworkOptions o = {}) {
  o.weakly_reversible = true;
  ReactionNetwork net = random_network(rng, o);
  const int m = net.num_complexes();
  const int r = net.num_reactions();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(m));
  for (int e = 0; e < r; ++e) out[static_cast<std::size_t>(net.reaction(e).source)].push_back(e);

  Eigen::VectorXd flux = Eigen::VectorXd::Zero(r);
  for (int e = 0; e < r; ++e) {
    // Breadth-first path from the target back to the source closes a cycle.
    const int src = net.reaction(e).source;
    std::vector<int> via(static_cast<std::size_t>(m), -1);
    std::vector<int> queue{net.reaction(e).target};
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    seen[static_cast<std::size_t>(queue.front())] = true;
    for (std::size_t q = 0; q < queue.size() && !seen[static_cast<std::size_t>(src)]; ++q)
      for (int f : out[static_cast<std::size_t>(queue[q])]) {
        const int w = net.reaction(f).target;
        if (seen[static_cast<std::size_t>(w)]) continue;
        seen[static_cast<std::size_t>(w)] = true;
        via[static_cast<std::size_t>(w)] = f;
        queue.push_back(w);
      }
    const double weight = uniform_real(rng, 0.5, 2.0);
    flux(e) += weight;
    for (int v = src; v != net.reaction(e).target;) {
      const int f = via[static_cast<std::size_t>(v)];
      flux(f) += weight;
      v = net.reaction(f).source;
    }
  }

  Eigen::VectorXd x_star = random_state(rng, net.num_species(), 0.6, 1.6);
  Eigen::VectorXd k(r);
  for (int e = 0; e < r; ++e) k(e) = flux(e) / monomial(x_star, net.complex(net.reaction(e).source));
  return {std::move(net), RateAssignment(k), x_star};
}

}  // namespace crn::test
