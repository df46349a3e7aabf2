#include "crnkit/structure.hpp"

#include "crnkit/errors.hpp"
#include "crnkit/rational.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace crn {

Partition linkage_classes(const ReactionNetwork& net) {
  return weak_components(net.num_complexes(), net.reactions());
}

Partition strong_components(const ReactionNetwork& net) {
  return strong_components(net.num_complexes(), net.reactions());
}

bool weak_reversibility(const ReactionNetwork& net) {
  return weakly_reversible(net.num_complexes(), net.reactions());
}

int exact_rank(const Eigen::MatrixXd& integral_matrix) {
  MatrixX<Rational> a = integral_matrix.unaryExpr([](double v) { return to_rational(v); });
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Eigen::Index rank = 0;
  for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = rank; r < rows; ++r) {
      if (a(r, c) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    a.row(pivot).swap(a.row(rank));
    for (Eigen::Index r = rank + 1; r < rows; ++r) {
      if (a(r, c) == 0) continue;
      const Rational f = a(r, c) / a(rank, c);
      for (Eigen::Index k = c; k < cols; ++k) a(r, k) -= f * a(rank, k);
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

SubspaceBasis stoichiometric_subspace(const ReactionNetwork& net, RankMethod method) {
  const Eigen::MatrixXd s = net.stoichiometric_matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU);
  const auto& sigma = svd.singularValues();

  int rank = 0;
  const double cutoff = sigma.size() > 0 ? kRankThreshold * sigma(0) : 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) ++rank;

  const bool exact = method == RankMethod::Exact || (method == RankMethod::Auto && net.integral());
  if (exact) {
    if (!net.integral()) throw PreconditionError("exact rank requires integer stoichiometric coefficients");
    rank = exact_rank(s);
  }

  const int n = net.num_species();
  SubspaceBasis out;
  out.dim = rank;
  out.basis = svd.matrixU().leftCols(rank);
  out.complement = svd.matrixU().rightCols(n - rank);
  return out;
}

int deficiency(const ReactionNetwork& net) {
  const int delta = net.num_complexes() - linkage_classes(net).size() - stoichiometric_subspace(net).dim;
  if (delta < 0) throw NumericalError("negative deficiency: stoichiometric rank is inconsistent");
  return delta;
}

StoichAnalysis analyze(const ReactionNetwork& net, RankMethod method) {
  StoichAnalysis a;
  a.linkage_classes = linkage_classes(net);
  a.strong_components = strong_components(net);
  a.weakly_reversible = a.linkage_classes == a.strong_components;
  auto sub = stoichiometric_subspace(net, method);
  a.stoich_basis = std::move(sub.basis);
  a.complement_basis = std::move(sub.complement);
  a.dim_s = sub.dim;
  a.deficiency = net.num_complexes() - a.linkage_classes.size() - a.dim_s;
  if (a.deficiency < 0) throw NumericalError("negative deficiency: stoichiometric rank is inconsistent");
  return a;
}

void require_positive_state(const Eigen::Ref<const Eigen::VectorXd>& x, int n) {
  if (x.size() != n)
    throw ValidationError("state has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) > 0.0) || !std::isfinite(x(i))) throw ValidationError("state must be strictly positive");
}

bool compatibility_class_membership(const StoichAnalysis& a, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double tol) {
  const auto n = static_cast<int>(a.stoich_basis.rows());
  require_positive_state(x0, n);
  require_positive_state(x, n);
  const double scale = std::max({1.0, x0.norm(), x.norm()});
  return (a.complement_basis.transpose() * (x - x0)).norm() <= tol * scale;
}

bool compatibility_class_membership(const ReactionNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double tol) {
  return compatibility_class_membership(analyze(net), x0, x, tol);
}

}  // namespace crn
