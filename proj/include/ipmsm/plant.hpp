#pragma once

#include "ipmsm/motor_params.hpp"

namespace ipmsm {

struct MotorState {
  double i_d = 0.0;      // A
  double i_q = 0.0;      // A
  double omega_m = 0.0;  // mechanical rad/s
  double t = 0.0;        // s
};

struct PlantInput {
  double u_d = 0.0;          // V
  double u_q = 0.0;          // V
  double load_torque = 0.0;  // N·m, opposing positive rotation
};

struct StateDerivative {
  double di_d = 0.0;
  double di_q = 0.0;
  double domega_m = 0.0;
};

/// dq voltage equations plus the mechanical balance J dω/dt = T_e - B ω - T_L.
StateDerivative plant_derivatives(const MotorState& state, const PlantInput& input,
                                  const MotorParams& params);

/// 1.5 p_n (psi_f i_q + (L_d - L_q) i_d i_q).
double electromagnetic_torque(double i_d, double i_q, const MotorParams& params);

/// 3 R_s (i_d² + i_q²).
double copper_loss(double i_d, double i_q, double r_s);

/// Scales (u_d, u_q) onto the circle of radius `limit` when it lies outside,
/// keeping the vector angle.
PlantInput limit_voltage(PlantInput input, double limit);

/// Largest step the explicit integrator is allowed to take (2 L_d / R_s).
double max_stable_step(const MotorParams& params);

/// One classical RK4 step with the input held over [t, t + dt].
/// Throws DivergenceError if the new state is non-finite or the current
/// magnitude exceeds `current_bound`.
MotorState step_plant(const MotorState& state, const PlantInput& input, const MotorParams& params,
                      double dt, double current_bound);

/// Single-owner plant instance: stores the held input and integrates at a
/// fixed micro-step.
class Plant {
 public:
  Plant(MotorParams params, double dt, double divergence_factor = 10.0);

  const MotorState& state() const { return state_; }
  void reset(const MotorState& s) { state_ = s; }

  /// Applies the inverter limit and holds the result until the next call.
  /// Returns true when the commanded vector had to be shortened.
  bool set_input(const PlantInput& commanded);
  const PlantInput& applied_input() const { return input_; }

  /// Advances `steps` micro-steps.
  void advance(int steps);

  const MotorParams& params() const { return params_; }
  double dt() const { return dt_; }

 private:
  MotorParams params_;
  double dt_;
  double current_bound_;
  MotorState state_{};
  PlantInput input_{};
};

}  // namespace ipmsm
