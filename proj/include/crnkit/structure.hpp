#pragma once

#include "crnkit/graph.hpp"
#include "crnkit/network.hpp"

#include <Eigen/Core>

namespace crn {

/// How dim S is decided. Auto uses exact rational elimination when every
/// coordinate is an integer and the singular-value threshold otherwise.
enum class RankMethod { Auto, Svd, Exact };

/// Relative singular-value cutoff for numerical rank.
inline constexpr double kRankThreshold = 1e-9;

/// Orthonormal bases for the stoichiometric subspace S and its complement.
struct SubspaceBasis {
  Eigen::MatrixXd basis;       // n x s
  Eigen::MatrixXd complement;  // n x (n - s)
  int dim = 0;
};

/// Cached structural report for one network.
struct StoichAnalysis {
  Partition linkage_classes;
  Partition strong_components;
  bool weakly_reversible = false;
  Eigen::MatrixXd stoich_basis;     // n x s, orthonormal
  Eigen::MatrixXd complement_basis;  // n x (n - s), orthonormal, spans S-perp
  int dim_s = 0;
  int deficiency = 0;
};

Partition linkage_classes(const ReactionNetwork& net);
Partition strong_components(const ReactionNetwork& net);
bool weak_reversibility(const ReactionNetwork& net);

SubspaceBasis stoichiometric_subspace(const ReactionNetwork& net, RankMethod method = RankMethod::Auto);

/// Rank of an integer-valued matrix by exact rational elimination.
int exact_rank(const Eigen::MatrixXd& integral_matrix);

/// m - l - dim S. Throws NumericalError if negative (a rank bug).
int deficiency(const ReactionNetwork& net);

StoichAnalysis analyze(const ReactionNetwork& net, RankMethod method = RankMethod::Auto);

/// Component of `v` orthogonal to S.
inline Eigen::VectorXd project_to_complement(const StoichAnalysis& a, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return a.complement_basis * (a.complement_basis.transpose() * v);
}

/// Whether positive states x0 and x lie in the same compatibility class:
/// |proj_{S-perp}(x - x0)| <= tol * max(1, |x0|, |x|).
bool compatibility_class_membership(const StoichAnalysis& a, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-10);
bool compatibility_class_membership(const ReactionNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-10);

/// Throws ValidationError("state must be strictly positive") unless every
/// entry is finite and > 0, or if the size is not `n`.
void require_positive_state(const Eigen::Ref<const Eigen::VectorXd>& x, int n);

}  // namespace crn
