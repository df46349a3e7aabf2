#include "crnkit/kinetics.hpp"

#include <string>

namespace crn {

RateAssignment::RateAssignment(Eigen::VectorXd values) : values_(std::move(values)) {
  for (Eigen::Index e = 0; e < values_.size(); ++e)
    if (!(values_(e) > 0.0) || !std::isfinite(values_(e)))
      throw ValidationError("rate constant " + std::to_string(e) + " must be positive and finite");
}

RateAssignment::RateAssignment(std::initializer_list<double> values)
    : RateAssignment(Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

void RateAssignment::check(const ReactionNetwork& net) const {
  if (size() != net.num_reactions())
    throw ValidationError("rate assignment has " + std::to_string(size()) + " entries but the network has " +
                          std::to_string(net.num_reactions()) + " reactions");
}

RateSchedule::RateSchedule(std::vector<Function> functions, double eps_bound)
    : functions_(std::move(functions)), eps_(eps_bound) {
  if (!(eps_ > 0.0 && eps_ < 1.0)) throw ValidationError("schedule bound eps must lie in (0,1)");
  for (const auto& f : functions_)
    if (!f) throw ValidationError("empty rate function in schedule");
}

RateSchedule RateSchedule::constant(const RateAssignment& kappa, double eps_bound) {
  std::vector<Function> fs;
  fs.reserve(static_cast<std::size_t>(kappa.size()));
  for (int e = 0; e < kappa.size(); ++e) fs.emplace_back([v = kappa[e]](double) { return v; });
  return RateSchedule(std::move(fs), eps_bound);
}

Eigen::VectorXd RateSchedule::at(double t) const {
  Eigen::VectorXd k(size());
  for (int e = 0; e < size(); ++e) {
    const double v = functions_[static_cast<std::size_t>(e)](t);
    if (!(v >= eps_ && v <= 1.0 / eps_))
      throw ValidationError("scheduled rate " + std::to_string(e) + " = " + std::to_string(v) + " at t = " +
                            std::to_string(t) + " leaves [eps, 1/eps]");
    k(e) = v;
  }
  return k;
}

Eigen::VectorXd rhs(const ReactionNetwork& net, const RateAssignment& kappa,
                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  kappa.check(net);
  require_positive_state(x, net.num_species());
  return rhs_unchecked(net, kappa.values(), x);
}

Eigen::MatrixXd jacobian(const ReactionNetwork& net, const RateAssignment& kappa,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  kappa.check(net);
  require_positive_state(x, net.num_species());
  return jacobian_unchecked(net, kappa.values(), x);
}

Eigen::VectorXd rhs_variable(const ReactionNetwork& net, const RateSchedule& schedule, double t,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (schedule.size() != net.num_reactions())
    throw ValidationError("schedule size does not match the reaction count");
  if (!(t >= 0.0)) throw ValidationError("time must be nonnegative");
  require_positive_state(x, net.num_species());
  return rhs_unchecked(net, schedule.at(t), x);
}

double flux_scale(const ReactionNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& rates,
                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd mono = complex_monomials(net, x);
  double s = 0.0;
  for (int e = 0; e < net.num_reactions(); ++e)
    s += rates(e) * mono(net.reaction(e).source) * net.reaction_vector(e).norm();
  return s;
}

LyapunovContext::LyapunovContext(Eigen::VectorXd x_star) : x_star_(std::move(x_star)) {
  require_positive_state(x_star_, static_cast<int>(x_star_.size()));
}

double lyapunov_value(const LyapunovContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto& xs = ctx.x_star();
  require_positive_state(x, static_cast<int>(xs.size()));
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) v += x(i) * (std::log(x(i) / xs(i)) - 1.0) + xs(i);
  return v;
}

Eigen::VectorXd lyapunov_gradient(const LyapunovContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_positive_state(x, static_cast<int>(ctx.x_star().size()));
  return (x.array() / ctx.x_star().array()).log().matrix();
}

double lyapunov_lie_derivative(const LyapunovContext& ctx, const ReactionNetwork& net, const RateAssignment& kappa,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  return lyapunov_gradient(ctx, x).dot(rhs(net, kappa, x));
}

}  // namespace crn
