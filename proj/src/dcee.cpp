#include "ipmsm/dcee.hpp"

#include <string>

#include "ipmsm/errors.hpp"

namespace ipmsm {

void DceeConfig::validate() const {
  if (!(k_x > 0.0)) throw ConfigError("dcee.k_x must be positive");
  if (!(delta_x > 0.0)) throw ConfigError("dcee.delta_x must be positive");
  if (!(t_s > 0.0)) throw ConfigError("control period must be positive");
  if (saturation_tick_limit < 1) throw ConfigError("dcee.saturation_tick_limit must be >= 1");
}

DiscreteModel DiscreteModel::build(const MotorParams& p, double omega_r, double t_s) {
  DiscreteModel m;
  m.a << -p.r_s / p.l_d, omega_r * p.l_q / p.l_d,
         -omega_r * p.l_d / p.l_q, -p.r_s / p.l_q;
  m.a *= t_s;
  m.b << t_s / p.l_d, 0.0,
         0.0, t_s / p.l_q;
  return m;
}

DualCost dual_cost_terms(const Vec2& x, const EstimatorBank& bank, double i_s_ref) {
  const BankReferences refs = bank.references(i_s_ref);
  return {(x - refs.mean).squaredNorm(), refs.spread};
}

double dual_cost(const Vec2& x, const EstimatorBank& bank, double i_s_ref) {
  return dual_cost_terms(x, bank, i_s_ref).total();
}

double predict_torque(const Vec2& x_probe, const EstimatorBank& bank) {
  const Vec2 phi = regressor(x_probe(0), x_probe(1));
  double sum = 0.0;
  for (const auto& est : bank.estimators()) sum += phi.dot(est.theta);
  return sum / static_cast<double>(bank.size());
}

double predicted_cost(const Vec2& x, const Vec2& delta, const EstimatorBank& bank, double i_s_ref) {
  const Vec2 x_next = x + delta;
  const double t_e1 = predict_torque(x_next, bank);
  const EstimatorBank hypothetical = bank_update(bank, regressor(x_next(0), x_next(1)), t_e1);
  return dual_cost(x_next, hypothetical, i_s_ref);
}

Vec2 cost_gradient(const Vec2& x, const EstimatorBank& bank, double i_s_ref, double delta_x) {
  const double now = dual_cost(x, bank, i_s_ref);
  Vec2 grad;
  for (int axis = 0; axis < 2; ++axis) {
    const Vec2 probe = Vec2::Unit(axis) * delta_x;
    grad(axis) = (predicted_cost(x, probe, bank, i_s_ref) - now) / delta_x;
  }
  return grad;
}

Vec2 control_output(const Vec2& x, const Vec2& grad, const DiscreteModel& model, double k_x,
                    double psi_f_hat, double omega_r) {
  // B is diagonal.
  const Vec2 rhs = model.a * x + k_x * grad;
  Vec2 u(-rhs(0) / model.b(0, 0), -rhs(1) / model.b(1, 1));
  u(1) += omega_r * psi_f_hat;
  return u;
}

DceeController::DceeController(const DceeConfig& cfg, const MotorParams& nominal, EstimatorBank bank)
    : cfg_(cfg), nominal_(nominal), bank_(std::move(bank)) {
  cfg_.validate();
  nominal_.validate();
}

DceeOutput DceeController::tick(const Vec2& x, double omega_r, double measured_t_e1, double i_s_ref) {
  return tick(x, omega_r, regressor(x(0), x(1)), measured_t_e1, i_s_ref);
}

DceeOutput DceeController::tick(const Vec2& x, double omega_r, const Vec2& phi, double measured_t_e1,
                                double i_s_ref) {
  bank_.update(phi, measured_t_e1);

  DceeOutput out;
  auto& diag = out.diagnostics;
  diag.r_mean = bank_.references(i_s_ref).mean;
  diag.cost = dual_cost_terms(x, bank_, i_s_ref);
  diag.gradient = cost_gradient(x, bank_, i_s_ref, cfg_.delta_x);
  diag.mean_theta = bank_.mean_theta();
  diag.thetas.reserve(bank_.size());
  for (const auto& est : bank_.estimators()) diag.thetas.push_back(est.theta);

  const DiscreteModel model = DiscreteModel::build(nominal_, omega_r, cfg_.t_s);
  out.voltage = control_output(x, diag.gradient, model, cfg_.k_x, diag.mean_theta(0), omega_r);
  return out;
}

void DceeController::report_saturation(bool saturated) {
  saturated_ticks_ = saturated ? saturated_ticks_ + 1 : 0;
  if (saturated_ticks_ > cfg_.saturation_tick_limit) {
    throw DivergenceError("DCEE voltage command saturated for " + std::to_string(saturated_ticks_) +
                          " consecutive ticks");
  }
}

}  // namespace ipmsm
