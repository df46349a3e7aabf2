#include "crnkit/complex_balance.hpp"

#include "crnkit/matrix_tree.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace crn {

Eigen::VectorXd cb_residual(const ReactionNetwork& net, const RateAssignment& kappa,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  kappa.check(net);
  require_positive_state(x, net.num_species());
  return -vertex_balance(net, kappa.values(), x);
}

namespace {

// Vertices that every member of their linkage class can reach.
std::vector<bool> tree_roots(const ReactionNetwork& net, const Partition& classes) {
  const int m = net.num_complexes();
  std::vector<std::vector<int>> reverse(static_cast<std::size_t>(m));
  for (const auto& r : net.reactions()) reverse[static_cast<std::size_t>(r.target)].push_back(r.source);

  std::vector<bool> root(static_cast<std::size_t>(m), false);
  for (int i = 0; i < m; ++i) {
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    std::vector<int> stack{i};
    seen[static_cast<std::size_t>(i)] = true;
    int count = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++count;
      for (int w : reverse[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
    }
    const auto& block = classes.blocks[static_cast<std::size_t>(classes.block_of[static_cast<std::size_t>(i)])];
    root[static_cast<std::size_t>(i)] = count == static_cast<int>(block.size());
  }
  return root;
}

}  // namespace

TreeConstants tree_constants(const ReactionNetwork& net, const RateAssignment& kappa, TreeMode mode) {
  kappa.check(net);
  const Partition classes = linkage_classes(net);
  if (mode == TreeMode::Strict && !(classes == strong_components(net)))
    throw PreconditionError("tree constants require a weakly reversible network");

  const auto& k = kappa.values();
  TreeConstants out{tree_constants<double>(net.num_complexes(), net.reactions(),
                                           std::span<const double>(k.data(), static_cast<std::size_t>(k.size())),
                                           classes)};
  if (mode == TreeMode::Lenient) {
    const auto root = tree_roots(net, classes);
    for (int i = 0; i < net.num_complexes(); ++i)
      if (!root[static_cast<std::size_t>(i)]) out.values(i) = 0.0;
  }
  return out;
}

ToricMembership toric_membership(const ReactionNetwork& net, const RateAssignment& kappa, double threshold) {
  kappa.check(net);
  const Partition classes = linkage_classes(net);
  if (!(classes == strong_components(net)))
    throw PreconditionError("toric membership requires a weakly reversible network");

  const int n = net.num_species();
  const int m = net.num_complexes();
  const int l = classes.size();
  const Eigen::VectorXd log_k = tree_constants(net, kappa).values.array().log().matrix();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n + l);
  a.leftCols(n) = net.complexes().transpose();
  for (int i = 0; i < m; ++i) a(i, n + classes.block_of[static_cast<std::size_t>(i)]) = -1.0;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  Eigen::VectorXd z = cod.solve(log_k);

  // Spend the kernel of A on shrinking the class scale factors, so that
  // x^{y_i} = K_i exactly whenever that is attainable.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > kRankThreshold * sigma(0)) ++rank;
  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(n + l - rank);
  if (kernel.cols() > 0) {
    // Kernel columns are orthonormal, so an absolute cutoff separates real
    // class-factor freedom from round-off.
    Eigen::JacobiSVD<Eigen::MatrixXd> ksvd(kernel.bottomRows(l), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd proj = ksvd.matrixU().transpose() * (-z.tail(l));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(kernel.cols());
    for (Eigen::Index i = 0; i < ksvd.singularValues().size(); ++i)
      if (ksvd.singularValues()(i) > kRankThreshold) w += ksvd.matrixV().col(i) * (proj(i) / ksvd.singularValues()(i));
    z += kernel * w;
  }

  ToricMembership out;
  out.residual = (a * z - log_k).norm();
  out.member = out.residual <= threshold;
  out.log_x = z.head(n);
  out.log_c = z.tail(l);
  return out;
}

SteadyStateResult solve_cb_steady_state(const ReactionNetwork& net, const RateAssignment& kappa,
                                        const Eigen::Ref<const Eigen::VectorXd>& x0,
                                        const SteadyStateOptions& options) {
  const StoichAnalysis stoich = analyze(net);
  return solve_cb_steady_state(net, stoich, kappa, toric_membership(net, kappa), x0, options);
}

SteadyStateResult solve_cb_steady_state(const ReactionNetwork& net, const StoichAnalysis& stoich,
                                        const RateAssignment& kappa, const ToricMembership& toric,
                                        const Eigen::Ref<const Eigen::VectorXd>& x0,
                                        const SteadyStateOptions& options) {
  kappa.check(net);
  require_positive_state(x0, net.num_species());
  if (!toric.member)
    throw PreconditionError("system is not complex-balanced (toric residual " + std::to_string(toric.residual) + ")");

  const Eigen::MatrixXd& w = stoich.complement_basis;
  const Eigen::VectorXd x_ref = toric.log_x.array().exp().matrix();
  const Eigen::VectorXd target = w.transpose() * x0;

  auto state = [&](const Eigen::VectorXd& alpha) -> Eigen::VectorXd {
    return (x_ref.array() * (w * alpha).array().exp()).matrix();
  };
  // Strictly convex in alpha; its minimiser is the class steady state.
  auto objective = [&](const Eigen::VectorXd& alpha) { return state(alpha).sum() - alpha.dot(target); };

  Eigen::VectorXd alpha;
  if (options.initial_guess) {
    require_positive_state(*options.initial_guess, net.num_species());
    alpha = w.transpose() * (options.initial_guess->array() / x_ref.array()).log().matrix();
  } else {
    alpha = w.transpose() * (x0.array() / x_ref.array()).log().matrix();
  }

  SteadyStateResult res;
  auto finish = [&](const Eigen::VectorXd& a) {
    res.x = state(a);
    res.class_residual = (w.transpose() * (res.x - x0)).norm();
    const double scale = flux_scale(net, kappa.values(), res.x);
    res.rhs_residual = scale > 0.0 ? rhs_unchecked(net, kappa.values(), res.x).norm() / scale : 0.0;
  };

  if (w.cols() == 0) {
    finish(alpha);
    return res;
  }

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd x = state(alpha);
    const Eigen::VectorXd grad = w.transpose() * x - target;
    const Eigen::MatrixXd hess = w.transpose() * x.asDiagonal() * w;
    const Eigen::VectorXd dir = -hess.ldlt().solve(grad);

    const double phi = objective(alpha);
    const double slope = grad.dot(dir);
    double t = 1.0;
    while (t > 1e-12) {
      const double trial = objective(alpha + t * dir);
      if (std::isfinite(trial) && trial <= phi + 1e-4 * t * slope + 1e-13 * (1.0 + std::abs(phi))) break;
      t *= 0.5;
    }
    alpha += t * dir;
    res.iterations = it;
    res.last_step = t * dir.norm();
    if (res.last_step < options.step_tolerance || grad.norm() == 0.0) {
      finish(alpha);
      return res;
    }
  }
  finish(alpha);
  throw SteadyStateConvergenceError("steady-state Newton iteration did not converge in " +
                                        std::to_string(options.max_iterations) + " iterations",
                                    res);
}

StabilityReport linear_stability(const ReactionNetwork& net, const RateAssignment& kappa,
                                 const Eigen::Ref<const Eigen::VectorXd>& x_star, const StoichAnalysis& stoich,
                                 double centre_threshold, double steady_tol) {
  kappa.check(net);
  require_positive_state(x_star, net.num_species());
  const double scale = flux_scale(net, kappa.values(), x_star);
  if (rhs_unchecked(net, kappa.values(), x_star).norm() > steady_tol * scale)
    throw PreconditionError("x_star is not a steady state");

  const Eigen::MatrixXd jac = jacobian_unchecked(net, kappa.values(), x_star);
  Eigen::EigenSolver<Eigen::MatrixXd> es(jac, false);
  StabilityReport rep;
  const auto& ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.real()) < std::abs(b.real()); });

  const auto n_centre = static_cast<std::size_t>(net.num_species() - stoich.dim_s);
  rep.centre.assign(rep.eigenvalues.begin(), rep.eigenvalues.begin() + static_cast<std::ptrdiff_t>(n_centre));
  rep.transverse.assign(rep.eigenvalues.begin() + static_cast<std::ptrdiff_t>(n_centre), rep.eigenvalues.end());
  rep.centre_consistent = std::all_of(rep.centre.begin(), rep.centre.end(),
                                      [&](const auto& z) { return std::abs(z.real()) <= centre_threshold; });
  rep.stable = std::all_of(rep.transverse.begin(), rep.transverse.end(),
                           [&](const auto& z) { return z.real() < -centre_threshold; });
  return rep;
}

CBReport check_complex_balance(const ReactionNetwork& net, const RateAssignment& kappa,
                               const std::optional<Eigen::VectorXd>& x0) {
  kappa.check(net);
  const StoichAnalysis stoich = analyze(net);
  if (!stoich.weakly_reversible)
    throw PreconditionError("complex balancing requires a weakly reversible network");
  if (x0) require_positive_state(*x0, net.num_species());

  CBReport rep;
  rep.tree_constants = tree_constants(net, kappa);
  const ToricMembership toric = toric_membership(net, kappa);
  rep.membership_residual = toric.residual;
  const Eigen::VectorXd witness = toric.log_x.array().exp().matrix();

  Eigen::VectorXd at = witness;
  if (toric.member) {
    at = solve_cb_steady_state(net, stoich, kappa, toric, x0 ? *x0 : witness).x;
    rep.steady_state = at;
  }
  rep.per_vertex_residuals = cb_residual(net, kappa, at);

  // Per-vertex tolerance relative to the vertex's own outflow plus inflow.
  const Eigen::VectorXd mono = complex_monomials(net, at);
  Eigen::VectorXd traffic = Eigen::VectorXd::Zero(net.num_complexes());
  for (int e = 0; e < net.num_reactions(); ++e) {
    const auto& r = net.reaction(e);
    const double flux = kappa[e] * mono(r.source);
    traffic(r.source) += flux;
    traffic(r.target) += flux;
  }
  bool balanced = toric.member;
  for (int i = 0; i < net.num_complexes(); ++i)
    balanced = balanced && std::abs(rep.per_vertex_residuals(i)) <= 1e-8 * traffic(i);
  rep.is_complex_balanced = balanced;

  if (rep.steady_state) {
    rep.stability = linear_stability(net, kappa, *rep.steady_state, stoich);
    rep.spectrum = rep.stability->eigenvalues;
  }
  if (!balanced) rep.steady_state.reset();
  return rep;
}

}  // namespace crn
