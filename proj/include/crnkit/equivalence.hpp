#pragma once

#include "crnkit/errors.hpp"
#include "crnkit/kinetics.hpp"
#include "crnkit/network.hpp"
#include "crnkit/rational.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crn {

/// The mass-action right-hand side collected by source monomial:
/// exponent vector -> sum over edges leaving it of k (y_target - y_source).
/// Zero coefficient vectors are never stored.
template <typename Scalar>
struct PolynomialMap {
  std::vector<std::string> species;
  std::map<std::vector<double>, VectorX<Scalar>> terms;
};

template <typename Scalar>
PolynomialMap<Scalar> polynomial_map(const ReactionNetwork& net, const VectorX<Scalar>& kappa) {
  if (kappa.size() != net.num_reactions()) throw ValidationError("expected one rate per reaction");
  const int n = net.num_species();
  PolynomialMap<Scalar> out{net.species(), {}};
  for (int e = 0; e < net.num_reactions(); ++e) {
    const auto& r = net.reaction(e);
    const auto src = net.complex(r.source);
    std::vector<double> key(src.data(), src.data() + n);
    auto [it, inserted] = out.terms.try_emplace(std::move(key), VectorX<Scalar>::Zero(n));
    const Eigen::VectorXd diff = net.reaction_vector(e);
    for (int i = 0; i < n; ++i) it->second(i) += kappa(e) * Scalar(diff(i));
  }
  std::erase_if(out.terms, [](const auto& kv) { return (kv.second.array() == Scalar(0)).all(); });
  return out;
}

inline PolynomialMap<double> polynomial_map(const ReactionNetwork& net, const RateAssignment& kappa) {
  kappa.check(net);
  return polynomial_map<double>(net, kappa.values());
}

/// Returns `map` with species (and every exponent and coefficient vector)
/// permuted into `order`. Throws PreconditionError unless the species sets agree.
template <typename Scalar>
PolynomialMap<Scalar> reorder_species(const PolynomialMap<Scalar>& map, const std::vector<std::string>& order) {
  const auto n = map.species.size();
  auto sorted_a = map.species, sorted_b = order;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  if (sorted_a != sorted_b) throw PreconditionError("species mismatch between the two systems");

  std::vector<std::size_t> from(n);  // from[i]: index in map.species of order[i]
  for (std::size_t i = 0; i < n; ++i)
    from[i] = static_cast<std::size_t>(std::find(map.species.begin(), map.species.end(), order[i]) -
                                       map.species.begin());
  PolynomialMap<Scalar> out{order, {}};
  for (const auto& [key, coeff] : map.terms) {
    std::vector<double> k(n);
    VectorX<Scalar> c(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      k[i] = key[from[i]];
      c(static_cast<Eigen::Index>(i)) = coeff(static_cast<Eigen::Index>(from[i]));
    }
    out.terms.emplace(std::move(k), std::move(c));
  }
  return out;
}

struct EquivalenceResult {
  bool equivalent = false;
  double max_coeff_gap = 0.0;  // sup-norm over all monomials
};

/// Floating point: equivalent when the gap is at most rel_tol times the largest
/// coefficient magnitude. Rational: exact comparison.
template <typename Scalar>
EquivalenceResult compare_maps(const PolynomialMap<Scalar>& a, const PolynomialMap<Scalar>& b_in,
                               double rel_tol = 1e-12) {
  const PolynomialMap<Scalar> b = reorder_species(b_in, a.species);
  const auto n = static_cast<Eigen::Index>(a.species.size());
  auto lookup = [&](const PolynomialMap<Scalar>& m, const std::vector<double>& key) -> VectorX<Scalar> {
    const auto it = m.terms.find(key);
    return it == m.terms.end() ? VectorX<Scalar>(VectorX<Scalar>::Zero(n)) : it->second;
  };
  auto to_double = [](const Scalar& v) { return static_cast<double>(v); };

  Scalar gap(0);
  double scale = 0.0;
  auto visit = [&](const std::vector<double>& key) {
    const VectorX<Scalar> ca = lookup(a, key), cb = lookup(b, key);
    for (Eigen::Index i = 0; i < n; ++i) {
      using std::abs;
      gap = std::max<Scalar>(gap, abs(Scalar(ca(i) - cb(i))));
      scale = std::max({scale, std::abs(to_double(ca(i))), std::abs(to_double(cb(i)))});
    }
  };
  for (const auto& kv : a.terms) visit(kv.first);
  for (const auto& kv : b.terms) visit(kv.first);

  EquivalenceResult out;
  out.max_coeff_gap = to_double(gap);
  if constexpr (std::is_floating_point_v<Scalar>)
    out.equivalent = gap <= rel_tol * scale;
  else
    out.equivalent = gap == Scalar(0);
  return out;
}

/// Whether two mass-action systems generate the same ODEs.
EquivalenceResult dynamically_equivalent(const ReactionNetwork& net_a, const RateAssignment& kappa_a,
                                         const ReactionNetwork& net_b, const RateAssignment& kappa_b);

/// Exact variant for rational rate constants.
EquivalenceResult dynamically_equivalent(const ReactionNetwork& net_a, const VectorX<Rational>& kappa_a,
                                         const ReactionNetwork& net_b, const VectorX<Rational>& kappa_b);

// ---------------------------------------------------------------------------
// Square with a diagonal shortcut
//
//   0 -> X (a1), X -> X+Y (k2), X+Y -> Y (k3), Y -> 0 (k4), 0 -> X+Y (a5)
//
// complex-balanced iff k2 k4 / k3 = a1. Adding 0 -> Y and splitting the inflow
// as k1 + k5 = a1 + a5, k5 + k6 = a5 keeps the ODEs and makes the extended
// system complex-balanced whenever a1 < k2 k4 / k3 < a1 + 2 a5.

struct SquareDiagonalParams {
  double a1 = 1.0;
  double a5 = 1.0;
  double kappa2 = 1.0;
  double kappa3 = 1.0;
  double kappa4 = 1.0;

  double ratio() const { return kappa2 * kappa4 / kappa3; }
  /// Throws ValidationError unless every parameter is positive and finite.
  void validate() const;
};

/// Edges in the order 0->X, X->X+Y, X+Y->Y, Y->0, 0->X+Y.
ReactionNetwork square_diagonal_network();
/// The same edges followed by 0->Y.
ReactionNetwork square_diagonal_extended_network();

RateAssignment square_diagonal_rates(const SquareDiagonalParams& p);

enum class StripPosition { ToricLocus, Inside, UpperBoundary, Outside };
std::string to_string(StripPosition p);

/// Ratio within 1e-10 (relative) of a1 is on the toric locus, within 1e-10 of
/// a1 + 2 a5 on the upper boundary; otherwise strictly inside or outside.
StripPosition classify_strip(const SquareDiagonalParams& p);

struct Reparameterization {
  StripPosition position = StripPosition::Outside;
  bool feasible = false;  // strictly inside: all three rates positive
  double kappa1 = 0.0;
  double kappa5 = 0.0;
  double kappa6 = 0.0;
};

/// Closed-form split with radical sqrt(a5^2 + 4 (a1 + a5) k2 k4 / k3). The
/// values are returned at every position; `feasible` only strictly inside.
Reparameterization reparameterize_square_diagonal(const SquareDiagonalParams& p);

/// Rates of the extended network: (k1, k2, k3, k4, k5, k6). Requires a feasible split.
RateAssignment square_diagonal_extended_rates(const SquareDiagonalParams& p, const Reparameterization& r);

/// a + b sqrt(d) with rational a, b, d >= 0. When d is a perfect square the
/// radical is folded into a, so equality is structural.
struct QuadraticSurd {
  Rational a{0};
  Rational b{0};
  Rational d{0};

  static QuadraticSurd root(const Rational& d);
  double to_double() const;
  bool is_zero() const { return a == 0 && b == 0; }
  friend bool operator==(const QuadraticSurd&, const QuadraticSurd&) = default;
};
QuadraticSurd operator+(const QuadraticSurd& x, const QuadraticSurd& y);
QuadraticSurd operator-(const QuadraticSurd& x, const QuadraticSurd& y);
QuadraticSurd operator*(const QuadraticSurd& x, const QuadraticSurd& y);
QuadraticSurd operator*(const Rational& s, const QuadraticSurd& x);

struct ExactReparameterization {
  StripPosition position = StripPosition::Outside;
  QuadraticSurd kappa1, kappa5, kappa6;
};

/// The same closed form evaluated exactly in Q(sqrt(D)); positions use exact
/// comparisons.
ExactReparameterization reparameterize_square_diagonal_exact(const Rational& a1, const Rational& a5,
                                                             const Rational& kappa2, const Rational& kappa3,
                                                             const Rational& kappa4);

struct RegionVerdict {
  SquareDiagonalParams params;
  double ratio = 0.0;
  StripPosition position = StripPosition::Outside;
  std::optional<Reparameterization> reparameterization;
  std::optional<double> toric_residual;  // of the system shown complex-balanced
  std::optional<EquivalenceResult> equivalence;
  /// The assertions made for this position hold: on the locus the original
  /// system is toric; inside, the extended system is toric and equivalent.
  bool consistent = true;
};

RegionVerdict square_diagonal_region(const SquareDiagonalParams& p);

/// Classification over a (kappa3, kappa4) grid with the other parameters fixed.
std::vector<RegionVerdict> square_diagonal_sweep(const SquareDiagonalParams& base, const std::vector<double>& kappa3,
                                                 const std::vector<double>& kappa4);

}  // namespace crn
