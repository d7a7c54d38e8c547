#include "ipmsm/foc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipmsm/errors.hpp"
#include "ipmsm/plant.hpp"

namespace ipmsm {

double pi_step(PiState& st, double error, double t_s) {
  const double unclamped = st.kp * error + st.integ;
  const bool pushing_high = unclamped >= st.out_max && error > 0.0;
  const bool pushing_low = unclamped <= st.out_min && error < 0.0;
  if (!pushing_high && !pushing_low) {
    st.integ = std::clamp(st.integ + st.ki * error * t_s, st.out_min, st.out_max);
  }
  return std::clamp(st.kp * error + st.integ, st.out_min, st.out_max);
}

double speed_pi(double omega_ref, double omega_m, PiState& st, double t_s) {
  return pi_step(st, omega_ref - omega_m, t_s);
}

Vec2 current_pi_decoupled(const Vec2& refs, const Vec2& meas, double omega_r, const MotorParams& p,
                          PiState& st_d, PiState& st_q, double t_s) {
  const double integ_d = st_d.integ;
  const double integ_q = st_q.integ;
  const double v_d = pi_step(st_d, refs(0) - meas(0), t_s);
  const double v_q = pi_step(st_q, refs(1) - meas(1), t_s);
  PlantInput u;
  u.u_d = v_d - omega_r * p.l_q * meas(1);
  u.u_q = v_q + omega_r * (p.l_d * meas(0) + p.psi_f);
  const double vmax = p.voltage_limit();
  if (std::hypot(u.u_d, u.u_q) > vmax) {
    // Vector limit active: hold both integrators, d axis keeps priority.
    st_d.integ = integ_d;
    st_q.integ = integ_q;
    u.u_d = std::clamp(u.u_d, -vmax, vmax);
    const double q_room = std::sqrt(std::max(vmax * vmax - u.u_d * u.u_d, 0.0));
    u.u_q = std::clamp(u.u_q, -q_room, q_room);
  }
  return {u.u_d, u.u_q};
}

void FocGains::validate() const {
  if (!(current_bandwidth_hz > 0.0) || !(speed_bandwidth_hz > 0.0) || !(speed_pi_zero_ratio > 0.0)) {
    throw ConfigError("foc bandwidths and zero ratio must be positive");
  }
}

PiState make_current_pi(const MotorParams& p, double inductance, const FocGains& gains) {
  const double wc = 2.0 * std::numbers::pi * gains.current_bandwidth_hz;
  const double vmax = p.voltage_limit();
  return {inductance * wc, p.r_s * wc, 0.0, -vmax, vmax};
}

PiState make_speed_pi(const MotorParams& p, const FocGains& gains) {
  const double wc = 2.0 * std::numbers::pi * gains.speed_bandwidth_hz;
  const double kt = 1.5 * p.pole_pairs * p.psi_f;
  const double kp = p.inertia * wc / kt;
  return {kp, kp * wc / gains.speed_pi_zero_ratio, 0.0, 0.0, p.i_s_max};
}

}  // namespace ipmsm
