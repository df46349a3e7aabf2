#include "crnkit/equivalence.hpp"

#include "crnkit/complex_balance.hpp"

#include <stdexcept>

namespace crn {

EquivalenceResult dynamically_equivalent(const ReactionNetwork& net_a, const RateAssignment& kappa_a,
                                         const ReactionNetwork& net_b, const RateAssignment& kappa_b) {
  return compare_maps(polynomial_map(net_a, kappa_a), polynomial_map(net_b, kappa_b));
}

EquivalenceResult dynamically_equivalent(const ReactionNetwork& net_a, const VectorX<Rational>& kappa_a,
                                         const ReactionNetwork& net_b, const VectorX<Rational>& kappa_b) {
  for (const auto* k : {&kappa_a, &kappa_b})
    for (Eigen::Index e = 0; e < k->size(); ++e)
      if ((*k)(e) <= 0) throw ValidationError("rate constants must be positive");
  return compare_maps(polynomial_map<Rational>(net_a, kappa_a), polynomial_map<Rational>(net_b, kappa_b));
}

// ---------------------------------------------------------------------------

void SquareDiagonalParams::validate() const {
  for (double v : {a1, a5, kappa2, kappa3, kappa4})
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("parameters must be positive and finite");
}

ReactionNetwork square_diagonal_network() {
  return parse_network("0 -> X\nX -> X + Y\nX + Y -> Y\nY -> 0\n0 -> X + Y\n");
}

ReactionNetwork square_diagonal_extended_network() {
  return parse_network("0 -> X\nX -> X + Y\nX + Y -> Y\nY -> 0\n0 -> X + Y\n0 -> Y\n");
}

RateAssignment square_diagonal_rates(const SquareDiagonalParams& p) {
  p.validate();
  return {p.a1, p.kappa2, p.kappa3, p.kappa4, p.a5};
}

std::string to_string(StripPosition p) {
  switch (p) {
    case StripPosition::ToricLocus: return "toric_locus";
    case StripPosition::Inside: return "inside";
    case StripPosition::UpperBoundary: return "upper_boundary";
    case StripPosition::Outside: return "outside";
  }
  return "unknown";
}

StripPosition classify_strip(const SquareDiagonalParams& p) {
  p.validate();
  const double rho = p.ratio();
  const double upper = p.a1 + 2.0 * p.a5;
  if (std::abs(rho - p.a1) <= 1e-10 * std::max(1.0, p.a1)) return StripPosition::ToricLocus;
  if (std::abs(rho - upper) <= 1e-10 * std::max(1.0, upper)) return StripPosition::UpperBoundary;
  return p.a1 < rho && rho < upper ? StripPosition::Inside : StripPosition::Outside;
}

Reparameterization reparameterize_square_diagonal(const SquareDiagonalParams& p) {
  Reparameterization r;
  r.position = classify_strip(p);
  const double radical = std::sqrt(p.a5 * p.a5 + 4.0 * (p.a1 + p.a5) * p.ratio());
  r.kappa1 = (-p.a5 + radical) / 2.0;
  r.kappa5 = (2.0 * p.a1 + 3.0 * p.a5 - radical) / 2.0;
  r.kappa6 = (-2.0 * p.a1 - p.a5 + radical) / 2.0;
  r.feasible = r.position == StripPosition::Inside && r.kappa1 > 0.0 && r.kappa5 > 0.0 && r.kappa6 > 0.0;
  return r;
}

RateAssignment square_diagonal_extended_rates(const SquareDiagonalParams& p, const Reparameterization& r) {
  if (!r.feasible) throw PreconditionError("reparameterization is not feasible at these parameters");
  return {r.kappa1, p.kappa2, p.kappa3, p.kappa4, r.kappa5, r.kappa6};
}

// ---------------------------------------------------------------------------

QuadraticSurd QuadraticSurd::root(const Rational& d) {
  if (d < 0) throw std::domain_error("negative radicand");
  using boost::multiprecision::cpp_int;
  const cpp_int num = boost::multiprecision::numerator(d);
  const cpp_int den = boost::multiprecision::denominator(d);
  const cpp_int sn = boost::multiprecision::sqrt(num);
  const cpp_int sd = boost::multiprecision::sqrt(den);
  if (sn * sn == num && sd * sd == den) return {Rational(sn, sd), Rational(0), Rational(0)};
  return {Rational(0), Rational(1), d};
}

double QuadraticSurd::to_double() const {
  return static_cast<double>(a) + static_cast<double>(b) * std::sqrt(static_cast<double>(d));
}

namespace {

Rational common_radicand(const QuadraticSurd& x, const QuadraticSurd& y) {
  if (x.b == 0) return y.d;
  if (y.b == 0 || x.d == y.d) return x.d;
  throw std::domain_error("surds with different radicands");
}

QuadraticSurd normalized(Rational a, Rational b, Rational d) {
  if (b == 0) d = 0;
  return {std::move(a), std::move(b), std::move(d)};
}

}  // namespace

QuadraticSurd operator+(const QuadraticSurd& x, const QuadraticSurd& y) {
  return normalized(x.a + y.a, x.b + y.b, common_radicand(x, y));
}

QuadraticSurd operator-(const QuadraticSurd& x, const QuadraticSurd& y) {
  return normalized(x.a - y.a, x.b - y.b, common_radicand(x, y));
}

QuadraticSurd operator*(const QuadraticSurd& x, const QuadraticSurd& y) {
  const Rational d = common_radicand(x, y);
  return normalized(x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d);
}

QuadraticSurd operator*(const Rational& s, const QuadraticSurd& x) { return normalized(s * x.a, s * x.b, x.d); }

ExactReparameterization reparameterize_square_diagonal_exact(const Rational& a1, const Rational& a5,
                                                             const Rational& kappa2, const Rational& kappa3,
                                                             const Rational& kappa4) {
  for (const Rational* v : {&a1, &a5, &kappa2, &kappa3, &kappa4})
    if (*v <= 0) throw ValidationError("parameters must be positive");
  const Rational rho = kappa2 * kappa4 / kappa3;
  const Rational upper = a1 + 2 * a5;

  ExactReparameterization r;
  if (rho == a1)
    r.position = StripPosition::ToricLocus;
  else if (rho == upper)
    r.position = StripPosition::UpperBoundary;
  else
    r.position = a1 < rho && rho < upper ? StripPosition::Inside : StripPosition::Outside;

  const QuadraticSurd radical = QuadraticSurd::root(a5 * a5 + 4 * (a1 + a5) * rho);
  const Rational half(1, 2);
  auto constant = [](const Rational& v) { return QuadraticSurd{v, Rational(0), Rational(0)}; };
  r.kappa1 = half * (radical - constant(a5));
  r.kappa5 = half * (constant(2 * a1 + 3 * a5) - radical);
  r.kappa6 = half * (radical - constant(2 * a1 + a5));
  return r;
}

// ---------------------------------------------------------------------------

RegionVerdict square_diagonal_region(const SquareDiagonalParams& p) {
  RegionVerdict v;
  v.params = p;
  v.ratio = p.ratio();
  const Reparameterization r = reparameterize_square_diagonal(p);
  v.position = r.position;
  v.reparameterization = r;

  if (v.position == StripPosition::ToricLocus) {
    const ToricMembership toric = toric_membership(square_diagonal_network(), square_diagonal_rates(p));
    v.toric_residual = toric.residual;
    v.consistent = toric.member;
  } else if (v.position == StripPosition::Inside) {
    const ReactionNetwork extended = square_diagonal_extended_network();
    const RateAssignment extended_rates = square_diagonal_extended_rates(p, r);
    const ToricMembership toric = toric_membership(extended, extended_rates);
    v.toric_residual = toric.residual;
    v.equivalence = dynamically_equivalent(square_diagonal_network(), square_diagonal_rates(p), extended,
                                           extended_rates);
    v.consistent = toric.member && v.equivalence->equivalent;
  }
  return v;
}

std::vector<RegionVerdict> square_diagonal_sweep(const SquareDiagonalParams& base, const std::vector<double>& kappa3,
                                                 const std::vector<double>& kappa4) {
  std::vector<RegionVerdict> out;
  out.reserve(kappa3.size() * kappa4.size());
  for (double k3 : kappa3)
    for (double k4 : kappa4) {
      SquareDiagonalParams p = base;
      p.kappa3 = k3;
      p.kappa4 = k4;
      out.push_back(square_diagonal_region(p));
    }
  return out;
}

}  // namespace crn
