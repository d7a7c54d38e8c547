#pragma once

#include <numbers>

namespace ipmsm {

/// Electrical and mechanical constants of an interior PM machine.
/// Units: Ohm, H, Wb, V, A, N·m, r/min, kg·m², N·m·s/rad.
struct MotorParams {
  double r_s = 0.05;
  double l_d = 0.8e-3;
  double l_q = 2.0e-3;
  double psi_f = 0.12;
  int pole_pairs = 3;
  double u_dc = 310.0;
  double i_s_max = 120.0;
  double rated_torque = 36.0;
  double rated_speed_rpm = 3000.0;
  double inertia = 0.01;
  double viscous = 0.001;

  /// 10 kW test machine: 310 V bus, 3000 r/min, 36 N·m, 120 A, 3 pole pairs,
  /// L_d = 0.8 mH, L_q = 2.0 mH, psi_f = 0.12 Wb, R_s = 0.05 Ohm.
  static MotorParams reference_machine() { return {}; }

  /// Throws ConfigError when any invariant is violated (non-positive constants,
  /// L_q <= L_d, p_n < 1).
  void validate() const;

  double saliency() const { return l_q - l_d; }

  /// Linear modulation limit of an ideal inverter, U_dc / sqrt(3).
  double voltage_limit() const { return u_dc / std::numbers::sqrt3; }
};

inline double rpm_to_rad_per_s(double rpm) { return rpm * 2.0 * std::numbers::pi / 60.0; }
inline double rad_per_s_to_rpm(double w) { return w * 60.0 / (2.0 * std::numbers::pi); }

}  // namespace ipmsm
