#pragma once

#include "crnkit/errors.hpp"
#include "crnkit/network.hpp"
#include "crnkit/structure.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <vector>

namespace crn {

/// Positive rate constant per edge of one network, in edge order.
class RateAssignment {
 public:
  explicit RateAssignment(Eigen::VectorXd values);
  RateAssignment(std::initializer_list<double> values);

  const Eigen::VectorXd& values() const { return values_; }
  double operator[](int edge) const { return values_(edge); }
  int size() const { return static_cast<int>(values_.size()); }

  /// Throws ValidationError unless there is exactly one rate per edge of `net`.
  void check(const ReactionNetwork& net) const;

 private:
  Eigen::VectorXd values_;
};

/// Time-dependent rate constants with the pointwise bound eps <= k(t) <= 1/eps,
/// checked at every evaluation. Callables must be safe to invoke concurrently.
class RateSchedule {
 public:
  using Function = std::function<double(double)>;

  RateSchedule(std::vector<Function> functions, double eps_bound);

  /// k(t) == kappa for all t.
  static RateSchedule constant(const RateAssignment& kappa, double eps_bound);

  int size() const { return static_cast<int>(functions_.size()); }
  double eps_bound() const { return eps_; }

  /// Rates at time t; throws ValidationError on a bound violation.
  Eigen::VectorXd at(double t) const;

 private:
  std::vector<Function> functions_;
  double eps_;
};

// ---------------------------------------------------------------------------
// Monomials

/// base^exponent with 0^0 = 1. Integer exponents use repeated squaring.
template <typename Scalar>
Scalar power(const Scalar& base, double exponent) {
  if (exponent == 0.0) return Scalar(1);
  if (exponent == std::floor(exponent) && std::abs(exponent) < 1 << 30) {
    auto e = static_cast<long>(std::abs(exponent));
    Scalar result(1);
    Scalar b = base;
    while (e > 0) {
      if (e & 1) result *= b;
      b *= b;
      e >>= 1;
    }
    return exponent < 0 ? Scalar(1) / result : result;
  }
  using std::exp;
  using std::log;
  return exp(exponent * log(base));
}

/// x^y = prod_k x_k^{y_k}.
template <typename Derived>
typename Derived::Scalar monomial(const Eigen::MatrixBase<Derived>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  using Scalar = typename Derived::Scalar;
  Scalar out(1);
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (y(k) != 0.0) out *= power(Scalar(x(k)), y(k));
  return out;
}

/// x^{y_i} for every complex.
template <typename Derived>
VectorX<typename Derived::Scalar> complex_monomials(const ReactionNetwork& net, const Eigen::MatrixBase<Derived>& x) {
  VectorX<typename Derived::Scalar> out(net.num_complexes());
  for (int i = 0; i < net.num_complexes(); ++i) out(i) = monomial(x, net.complex(i));
  return out;
}

/// Net vertex balance g_i = inflow_i - outflow_i with flux k_ij x^{y_i}.
/// The mass-action vector field is Y g.
template <typename Derived>
VectorX<typename Derived::Scalar> vertex_balance(const ReactionNetwork& net,
                                                 const Eigen::Ref<const Eigen::VectorXd>& rates,
                                                 const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> mono = complex_monomials(net, x);
  VectorX<Scalar> g = VectorX<Scalar>::Zero(net.num_complexes());
  for (int e = 0; e < net.num_reactions(); ++e) {
    const auto& r = net.reaction(e);
    const Scalar flux = Scalar(rates(e)) * mono(r.source);
    g(r.source) -= flux;
    g(r.target) += flux;
  }
  return g;
}

/// sum_{(i,j)} k_ij x^{y_i} (y_j - y_i), without validating x.
template <typename Derived>
VectorX<typename Derived::Scalar> rhs_unchecked(const ReactionNetwork& net,
                                                const Eigen::Ref<const Eigen::VectorXd>& rates,
                                                const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return net.complexes().template cast<Scalar>() * vertex_balance(net, rates, x);
}

/// Analytic Jacobian of rhs_unchecked, using d/dx_k x^y = y_k x^y / x_k.
template <typename Derived>
MatrixX<typename Derived::Scalar> jacobian_unchecked(const ReactionNetwork& net,
                                                     const Eigen::Ref<const Eigen::VectorXd>& rates,
                                                     const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const int n = net.num_species();
  const VectorX<Scalar> mono = complex_monomials(net, x);
  MatrixX<Scalar> jac = MatrixX<Scalar>::Zero(n, n);
  for (int e = 0; e < net.num_reactions(); ++e) {
    const auto& r = net.reaction(e);
    const auto ys = net.complex(r.source);
    const VectorX<Scalar> dir = net.reaction_vector(e).template cast<Scalar>();
    for (int k = 0; k < n; ++k) {
      if (ys(k) == 0.0) continue;
      const Scalar d = Scalar(rates(e)) * Scalar(ys(k)) * mono(r.source) / Scalar(x(k));
      jac.col(k) += d * dir;
    }
  }
  return jac;
}

/// Mass-action vector field. Throws on a nonpositive state or a rate mismatch.
Eigen::VectorXd rhs(const ReactionNetwork& net, const RateAssignment& kappa,
                    const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::MatrixXd jacobian(const ReactionNetwork& net, const RateAssignment& kappa,
                         const Eigen::Ref<const Eigen::VectorXd>& x);

/// Vector field of the variable-rate system at time t.
Eigen::VectorXd rhs_variable(const ReactionNetwork& net, const RateSchedule& schedule, double t,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

/// Scale used to judge rhs residuals: sum_e k_e x^{y_s} |y_t - y_s|.
double flux_scale(const ReactionNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& rates,
                  const Eigen::Ref<const Eigen::VectorXd>& x);

// ---------------------------------------------------------------------------
// Lyapunov function V(x) = sum_i x_i (ln x_i - ln x*_i - 1) + x*_i

class LyapunovContext {
 public:
  explicit LyapunovContext(Eigen::VectorXd x_star);
  const Eigen::VectorXd& x_star() const { return x_star_; }

 private:
  Eigen::VectorXd x_star_;
};

double lyapunov_value(const LyapunovContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd lyapunov_gradient(const LyapunovContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x);
/// grad V(x) . f(x)
double lyapunov_lie_derivative(const LyapunovContext& ctx, const ReactionNetwork& net, const RateAssignment& kappa,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace crn
