#pragma once

#include <vector>

#include "ipmsm/estimator_bank.hpp"
#include "ipmsm/motor_params.hpp"

namespace ipmsm {

struct DceeConfig {
  double k_x = 0.2;       // adaptive gain
  double delta_x = 0.1;   // probe increment per axis, A
  double t_s = 1e-4;      // control period, s
  /// Consecutive voltage-saturated ticks tolerated before reporting divergence.
  int saturation_tick_limit = 2000;

  void validate() const;
};

/// Euler discretization of the current dynamics with the back-EMF moved into
/// the equivalent q-axis input: x(k+1) = (I + A) x(k) + B u(k), u = [u_d, u_q - ω_r psi_f].
struct DiscreteModel {
  Mat2 a = Mat2::Zero();
  Mat2 b = Mat2::Zero();

  static DiscreteModel build(const MotorParams& nominal, double omega_r, double t_s);
};

/// Exploitation and exploration parts of the dual objective.
struct DualCost {
  double exploitation = 0.0;  // ||x - r_mean||²
  double exploration = 0.0;   // (1/N) sum ||r_mean - r_j||²
  double total() const { return exploitation + exploration; }
};

DualCost dual_cost_terms(const Vec2& x, const EstimatorBank& bank, double i_s_ref);
double dual_cost(const Vec2& x, const EstimatorBank& bank, double i_s_ref);

/// Ensemble-mean one-step normalized torque prediction at x_probe.
double predict_torque(const Vec2& x_probe, const EstimatorBank& bank);

/// Objective after moving to x + delta, using a copy of the bank updated with
/// the predicted measurement. `bank` is not modified.
double predicted_cost(const Vec2& x, const Vec2& delta, const EstimatorBank& bank, double i_s_ref);

/// Per-axis forward difference of the predicted objective.
Vec2 cost_gradient(const Vec2& x, const EstimatorBank& bank, double i_s_ref, double delta_x);

/// u = -B⁻¹ (A x + k_x grad) gives (u_d, u_q1); returns (u_d, u_q1 + ω_r psi_f_hat).
Vec2 control_output(const Vec2& x, const Vec2& grad, const DiscreteModel& model, double k_x,
                    double psi_f_hat, double omega_r);

struct DceeDiagnostics {
  Vec2 r_mean = Vec2::Zero();
  DualCost cost;
  Vec2 gradient = Vec2::Zero();
  Vec2 mean_theta = Vec2::Zero();
  std::vector<Vec2> thetas;
};

struct DceeOutput {
  Vec2 voltage = Vec2::Zero();  // commanded (u_d, u_q), before inverter limiting
  DceeDiagnostics diagnostics;
};

/// Owns the estimator bank and runs one control period per tick.
class DceeController {
 public:
  DceeController(const DceeConfig& cfg, const MotorParams& nominal, EstimatorBank bank);

  /// Real bank update with the measured sample, references, objective,
  /// gradient and voltage command, in that order.
  DceeOutput tick(const Vec2& x, double omega_r, double measured_t_e1, double i_s_ref);
  /// Same, with the sample's regressor given explicitly (a filtered torque
  /// source pairs with an equally filtered regressor).
  DceeOutput tick(const Vec2& x, double omega_r, const Vec2& phi, double measured_t_e1, double i_s_ref);

  /// Feeds back whether the last command was clipped by the inverter. Throws
  /// DivergenceError after more than saturation_tick_limit consecutive clips.
  void report_saturation(bool saturated);

  const EstimatorBank& bank() const { return bank_; }
  const DceeConfig& config() const { return cfg_; }

 private:
  DceeConfig cfg_;
  MotorParams nominal_;
  EstimatorBank bank_;
  int saturated_ticks_ = 0;
};

}  // namespace ipmsm
