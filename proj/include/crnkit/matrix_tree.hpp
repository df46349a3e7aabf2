#pragma once

#include "crnkit/graph.hpp"
#include "crnkit/network.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <span>
#include <type_traits>
#include <utility>

namespace crn {

/// Determinant of a square matrix. Floating scalars use partial-pivot LU;
/// other scalars (integers, rationals) use fraction-free Bareiss elimination,
/// which is exact over any integral domain.
template <typename Scalar>
Scalar determinant(MatrixX<Scalar> a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return Scalar(1);
  if constexpr (std::is_floating_point_v<Scalar>) {
    return a.partialPivLu().determinant();
  } else {
    Scalar sign(1);
    Scalar prev(1);
    for (Eigen::Index k = 0; k < n - 1; ++k) {
      if (a(k, k) == Scalar(0)) {
        Eigen::Index p = k + 1;
        while (p < n && a(p, k) == Scalar(0)) ++p;
        if (p == n) return Scalar(0);
        a.row(k).swap(a.row(p));
        sign = -sign;
      }
      for (Eigen::Index i = k + 1; i < n; ++i) {
        for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) = (a(k, k) * a(i, j) - a(i, k) * a(k, j)) / prev;
        a(i, k) = Scalar(0);
      }
      prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
  }
}

/// Laplacian of a weighted digraph in the column convention: off-diagonal
/// L(j,i) = k_ij for an edge i -> j, diagonal L(i,i) = -sum_j k_ij. Kernel
/// vectors of L are vertex weights with balanced inflow and outflow.
template <typename Scalar>
MatrixX<Scalar> laplacian(int num_vertices, std::span<const Reaction> edges, std::span<const Scalar> rates) {
  MatrixX<Scalar> lap = MatrixX<Scalar>::Zero(num_vertices, num_vertices);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& r = edges[e];
    lap(r.target, r.source) += rates[e];
    lap(r.source, r.source) -= rates[e];
  }
  return lap;
}

/// Matrix-Tree constants: K_i is the sum, over spanning trees of i's
/// component in which every other vertex has one edge directed towards i, of
/// the product of edge weights. Computed as the principal minor of the
/// out-degree Laplacian with row and column i removed. Vertices that cannot be
/// reached from the rest of their component get 0.
template <typename Scalar>
VectorX<Scalar> tree_constants(int num_vertices, std::span<const Reaction> edges, std::span<const Scalar> rates,
                               const Partition& components) {
  // Out-degree Laplacian D - A is -L^T; transposition leaves principal minors unchanged.
  const MatrixX<Scalar> out_lap = -laplacian(num_vertices, edges, rates).transpose();
  VectorX<Scalar> k(num_vertices);
  for (const auto& block : components.blocks) {
    const auto size = static_cast<Eigen::Index>(block.size());
    for (Eigen::Index root = 0; root < size; ++root) {
      MatrixX<Scalar> minor(size - 1, size - 1);
      for (Eigen::Index a = 0, ra = 0; a < size; ++a) {
        if (a == root) continue;
        for (Eigen::Index b = 0, cb = 0; b < size; ++b) {
          if (b == root) continue;
          minor(ra, cb++) = out_lap(block[static_cast<std::size_t>(a)], block[static_cast<std::size_t>(b)]);
        }
        ++ra;
      }
      k(block[static_cast<std::size_t>(root)]) = determinant(std::move(minor));
    }
  }
  return k;
}

template <typename Scalar>
VectorX<Scalar> tree_constants(int num_vertices, std::span<const Reaction> edges, std::span<const Scalar> rates) {
  return tree_constants(num_vertices, edges, rates, weak_components(num_vertices, edges));
}

}  // namespace crn
