#pragma once

#include <array>
#include <optional>

namespace ipmsm {

struct ObserverConfig {
  double omega_min = 10.0;  // electrical rad/s
  double tau_f = 0.5e-3;    // s, torque low-pass, 0 disables filtering
  double tau_c = 50e-3;     // s, pull of the flux integrator toward the steady-state estimate
  double settle_step = 0.01;  // A per tick, largest current change at which the integrator may seed

  void validate() const;
};

struct FluxTorqueEstimate {
  double psi_d = 0.0;   // Wb
  double psi_q = 0.0;   // Wb
  double torque = 0.0;  // N·m
};

/// Steady-state voltage-model flux and torque:
///   psi_d = (u_q - R_s i_q) / ω_r,  psi_q = -(u_d - R_s i_d) / ω_r,
///   T = 1.5 p_n (psi_d i_q - psi_q i_d).
/// Empty when |ω_r| < omega_min.
std::optional<FluxTorqueEstimate> observe_torque(double u_d, double u_q, double i_d, double i_q,
                                                 double omega_r, double r_s, int pole_pairs,
                                                 double omega_min);

/// Voltage-model flux integrator in the rotor frame,
///   dpsi_d/dt = u_d - R_s i_d + ω_r psi_q + (psi_d,ss - psi_d) / tau_c
///   dpsi_q/dt = u_q - R_s i_q - ω_r psi_d + (psi_q,ss - psi_q) / tau_c,
/// solved exactly over each tick with the voltage held and the resistive drop
/// taken at the mean current. psi_ss is observe_torque's flux, so the fixed
/// point equals it at any steady operating point, while current transients
/// (where psi_ss is off by L di/dt / ω_r) only leak in through tau_c. The
/// torque then goes through a first-order low-pass. The identification
/// regressor (i_q, -i_d i_q) runs through the same filter, so a parameter fit
/// against the filtered torque sees no filter lag. Until the integrator is
/// seeded from a quasi-steady sample (both current components moved less than
/// settle_step since the previous tick) the steady-state estimate is used
/// directly. Below omega_min the last estimate is held and the integrator
/// must seed again.
class TorqueObserver {
 public:
  TorqueObserver(const ObserverConfig& cfg, double t_s, double r_s, int pole_pairs);

  struct Output {
    FluxTorqueEstimate raw;  // integrated flux and its unfiltered torque
    double torque = 0.0;     // filtered
    std::array<double, 2> regressor{};  // filtered (i_q, -i_d i_q)
    bool valid = false;
  };

  /// u_d, u_q: voltage held over the tick that ends at this sample.
  Output update(double u_d, double u_q, double i_d, double i_q, double omega_r);

  double torque() const { return filtered_; }

 private:
  ObserverConfig cfg_;
  double t_s_;
  double alpha_;
  double r_s_;
  int pole_pairs_;
  double filtered_ = 0.0;
  std::array<double, 2> phi_{};
  FluxTorqueEstimate last_{};
  double prev_i_d_ = 0.0;
  double prev_i_q_ = 0.0;
  bool have_prev_ = false;
  bool integrating_ = false;
  bool filter_seeded_ = false;
};

}  // namespace ipmsm
