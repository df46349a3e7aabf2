#include "crnkit/dynamics.hpp"

#include "crnkit/structure.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace crn {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ValidationError("integrator tolerances must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be finite and nonnegative");
  if (max_step < 0.0 || fixed_step < 0.0 || initial_step < 0.0)
    throw ValidationError("step sizes must be nonnegative");
  if (!(convergence_eps > 0.0) || !(convergence_rhs_tol > 0.0))
    throw ValidationError("convergence tolerances must be positive");
  if (!std::is_sorted(output_times.begin(), output_times.end()))
    throw ValidationError("output times must be sorted");
}

std::string to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::Completed: return "completed";
    case IntegrationStatus::StepUnderflow: return "step_underflow";
    case IntegrationStatus::PositivityFailure: return "positivity_failure";
    case IntegrationStatus::MaxStepsExceeded: return "max_steps_exceeded";
    case IntegrationStatus::DriftExceeded: return "drift_exceeded";
  }
  return "unknown";
}

Eigen::VectorXd Trajectory::state_at(double t) const {
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * states[i - 1] + w * states[i];
}

namespace {

using Field = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using JacobianField = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;

// Adaptive steps keep h * rho(J) at or below this, inside the real stability
// interval of the method (about 3.3), so errors near an equilibrium decay.
constexpr double kStabilityFactor = 2.5;

double spectral_radius(const Eigen::MatrixXd& j) {
  if (!j.allFinite()) return std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(j, false);
  if (es.info() != Eigen::Success) return j.cwiseAbs().rowwise().sum().maxCoeff();
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool positive(const Eigen::VectorXd& x) { return (x.array() > 0.0).all() && x.allFinite(); }

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  const IntegratorConfig& cfg) {
  const Eigen::ArrayXd sc = cfg.abs_tol + cfg.rel_tol * x.array().abs().max(y.array().abs());
  return std::sqrt((err.array() / sc).square().mean());
}

double initial_step(const Field& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& f0,
                    const IntegratorConfig& cfg) {
  const Eigen::ArrayXd sc = cfg.abs_tol + cfg.rel_tol * x0.array().abs();
  const double d0 = std::sqrt((x0.array() / sc).square().mean());
  const double d1 = std::sqrt((f0.array() / sc).square().mean());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, cfg.t_end);
  Eigen::VectorXd x1 = x0 + h0 * f0;
  while (!positive(x1) && h0 > 1e-14) {
    h0 *= 0.5;
    x1 = x0 + h0 * f0;
  }
  const double d2 = std::sqrt(((f(h0, x1) - f0).array() / sc).square().mean()) / h0;
  const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min(100.0 * h0, h1);
}

Trajectory run(const Field& f, const JacobianField& jac, const Eigen::VectorXd& x0, const Eigen::MatrixXd& complement,
               const IntegratorConfig& cfg, bool detect, const std::function<double(const Eigen::VectorXd&)>& scale) {
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  if (cfg.t_end == 0.0) return traj;

  const Eigen::VectorXd anchor = complement.transpose() * x0;
  const bool fixed = cfg.fixed_step > 0.0;
  const double max_step = cfg.max_step > 0.0 ? cfg.max_step : std::numeric_limits<double>::infinity();

  double t = 0.0;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd k1 = f(t, x);
  double h = fixed ? cfg.fixed_step : (cfg.initial_step > 0.0 ? cfg.initial_step : initial_step(f, x0, k1, cfg));
  auto stability_cap = [&](double time, const Eigen::VectorXd& state) {
    const double rho = spectral_radius(jac(time, state));
    if (rho > 0.0) h = std::min(h, kStabilityFactor / rho);
  };
  if (!fixed) stability_cap(t, x);
  double err_old = 1e-4;
  bool last_rejected = false;
  bool positivity_rejection = false;
  auto next_output = cfg.output_times.begin();

  auto fail = [&](IntegrationStatus s, std::string msg) {
    traj.status = s;
    traj.message = std::move(msg) + " at t = " + std::to_string(t);
    return traj;
  };

  while (t < cfg.t_end) {
    if (traj.step_count >= cfg.max_steps) return fail(IntegrationStatus::MaxStepsExceeded, "step limit reached");
    while (next_output != cfg.output_times.end() && *next_output <= t) ++next_output;

    double target = cfg.t_end;
    if (next_output != cfg.output_times.end() && *next_output < target) target = *next_output;
    double step = std::min({fixed ? cfg.fixed_step : h, max_step, target - t});
    // Never leave a sliver below the minimum step before the target.
    if (target - t - step < cfg.min_step * std::max(1.0, target)) step = target - t;
    const bool lands = step >= target - t;
    if (step < cfg.min_step * std::max(1.0, t)) {
      if (positivity_rejection)
        return fail(IntegrationStatus::PositivityFailure, "positivity cannot be maintained above the minimum step");
      return fail(IntegrationStatus::StepUnderflow, "step size underflow");
    }

    auto reject_positivity = [&] {
      ++traj.rejected_steps;
      positivity_rejection = true;
      last_rejected = true;
      h = step * 0.5;
    };

    // Stages; any nonpositive stage state rejects the step.
    Eigen::VectorXd y = x + step * a21 * k1;
    if (!positive(y)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const Eigen::VectorXd k2 = f(t + c2 * step, y);
    y = x + step * (a31 * k1 + a32 * k2);
    if (!positive(y)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const Eigen::VectorXd k3 = f(t + c3 * step, y);
    y = x + step * (a41 * k1 + a42 * k2 + a43 * k3);
    if (!positive(y)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const Eigen::VectorXd k4 = f(t + c4 * step, y);
    y = x + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    if (!positive(y)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const Eigen::VectorXd k5 = f(t + c5 * step, y);
    y = x + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    if (!positive(y)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const Eigen::VectorXd k6 = f(t + step, y);
    const Eigen::VectorXd x_new = x + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    if (!positive(x_new)) {
      if (fixed) return fail(IntegrationStatus::PositivityFailure, "fixed step leaves the positive orthant");
      reject_positivity();
      continue;
    }
    const double t_new = lands ? target : t + step;
    const Eigen::VectorXd k7 = f(t_new, x_new);

    if (!fixed) {
      const Eigen::VectorXd err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(err, x, x_new, cfg);
      if (!(en <= 1.0)) {
        ++traj.rejected_steps;
        positivity_rejection = false;
        last_rejected = true;
        h = step * std::max(0.2, std::isfinite(en) ? 0.9 * std::pow(en, -0.2) : 0.2);
        continue;
      }
      // PI controller (beta = 0.04).
      const double e = std::max(en, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      err_old = std::max(en, 1e-4);
      h = step * fac;
      stability_cap(t_new, x_new);
    }

    t = t_new;
    x = x_new;
    k1 = k7;
    ++traj.step_count;
    last_rejected = false;
    positivity_rejection = false;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.conservation_drift = std::max(traj.conservation_drift, (complement.transpose() * x - anchor).norm());
    if (traj.conservation_drift > cfg.drift_bound)
      return fail(IntegrationStatus::DriftExceeded, "conservation drift exceeds the configured bound");
  }

  if (detect) {
    const double window = cfg.convergence_window > 0.0 ? cfg.convergence_window : 0.05 * cfg.t_end;
    const double start = std::max(0.0, cfg.t_end - window);
    const Eigen::VectorXd& last = traj.states.back();
    const double norm = last.lpNorm<Eigen::Infinity>();
    double variation = (traj.state_at(start) - last).lpNorm<Eigen::Infinity>();
    for (std::size_t i = traj.times.size(); i-- > 0 && traj.times[i] >= start;)
      variation = std::max(variation, (traj.states[i] - last).lpNorm<Eigen::Infinity>());
    const double rhs_norm = f(t, last).norm();
    if (variation <= cfg.convergence_eps * norm && rhs_norm <= cfg.convergence_rhs_tol * scale(last))
      traj.converged_to = last;
  }
  return traj;
}

}  // namespace

Trajectory integrate(const ReactionNetwork& net, const RateAssignment& kappa,
                     const Eigen::Ref<const Eigen::VectorXd>& x0, const IntegratorConfig& cfg) {
  cfg.validate();
  kappa.check(net);
  require_positive_state(x0, net.num_species());
  const StoichAnalysis stoich = analyze(net);
  const Eigen::VectorXd& k = kappa.values();
  Field f = [&](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return rhs_unchecked(net, k, x); };
  JacobianField jac = [&](double, const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return jacobian_unchecked(net, k, x);
  };
  auto scale = [&](const Eigen::VectorXd& x) { return flux_scale(net, k, x); };
  return run(f, jac, x0, stoich.complement_basis, cfg, cfg.detect_convergence != ConvergenceDetection::Disabled, scale);
}

Trajectory integrate_variable(const ReactionNetwork& net, const RateSchedule& schedule,
                              const Eigen::Ref<const Eigen::VectorXd>& x0, const IntegratorConfig& cfg) {
  cfg.validate();
  if (schedule.size() != net.num_reactions())
    throw ValidationError("schedule size does not match the reaction count");
  require_positive_state(x0, net.num_species());
  const StoichAnalysis stoich = analyze(net);
  Field f = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return rhs_unchecked(net, schedule.at(t), x);
  };
  JacobianField jac = [&](double t, const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return jacobian_unchecked(net, schedule.at(t), x);
  };
  auto scale = [&](const Eigen::VectorXd& x) { return flux_scale(net, schedule.at(cfg.t_end), x); };
  return run(f, jac, x0, stoich.complement_basis, cfg, cfg.detect_convergence == ConvergenceDetection::Enabled, scale);
}

DescentCheck lyapunov_descent_check(const ReactionNetwork& net, const RateAssignment& kappa,
                                    const Trajectory& traj, const Eigen::Ref<const Eigen::VectorXd>& x_star) {
  kappa.check(net);
  const LyapunovContext ctx{Eigen::VectorXd(x_star)};
  DescentCheck out;
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double v = lyapunov_value(ctx, traj.states[i]);
    if (i > 0) {
      const double inc = v - prev;
      out.max_increase = std::max(out.max_increase, inc);
      if (inc > 1e-9 * v + 1e-12) out.monotone = false;
    }
    prev = v;
  }
  return out;
}

}  // namespace crn
