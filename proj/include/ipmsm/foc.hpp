#pragma once

#include "ipmsm/estimator_bank.hpp"
#include "ipmsm/motor_params.hpp"

namespace ipmsm {

/// PI regulator with clamped-integrator anti-windup.
struct PiState {
  double kp = 0.0;
  double ki = 0.0;
  double integ = 0.0;
  double out_min = 0.0;
  double out_max = 0.0;
};

/// out = clamp(kp e + integ). The integrator only moves when that does not
/// push a saturated output further, and it always stays within [out_min, out_max].
double pi_step(PiState& st, double error, double t_s);

/// Speed PI producing the current magnitude reference, clamped to [0, I_smax]
/// by the state's bounds.
double speed_pi(double omega_ref, double omega_m, PiState& st, double t_s);

/// dq current PIs with back-EMF / cross-coupling feedforward from nominal
/// parameters; the voltage vector is clamped to U_dc/sqrt(3) with d-axis
/// priority, and both integrators hold while the clamp is active.
Vec2 current_pi_decoupled(const Vec2& refs, const Vec2& meas, double omega_r, const MotorParams& nominal,
                          PiState& st_d, PiState& st_q, double t_s);

struct FocGains {
  double current_bandwidth_hz = 500.0;
  double speed_bandwidth_hz = 20.0;
  /// Speed PI zero sits at speed bandwidth / this ratio.
  double speed_pi_zero_ratio = 4.0;

  void validate() const;
};

/// kp = L ω_c, ki = R_s ω_c for the given inductance.
PiState make_current_pi(const MotorParams& nominal, double inductance, const FocGains& gains);

/// kp = J ω_c / (1.5 p_n psi_f), ki = kp ω_c / zero_ratio, output in [0, I_smax].
PiState make_speed_pi(const MotorParams& nominal, const FocGains& gains);

}  // namespace ipmsm
