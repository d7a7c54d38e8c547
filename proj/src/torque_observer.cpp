#include "ipmsm/torque_observer.hpp"

#include <cmath>
#include <complex>

#include "ipmsm/errors.hpp"

namespace ipmsm {

void ObserverConfig::validate() const {
  if (!(omega_min > 0.0)) throw ConfigError("observer.omega_min must be positive");
  if (!(tau_f >= 0.0)) throw ConfigError("observer.tau_f must be non-negative");
  if (!(tau_c > 0.0)) throw ConfigError("observer.tau_c must be positive");
  if (!(settle_step > 0.0)) throw ConfigError("observer.settle_step must be positive");
}
std::optional<FluxTorqueEstimate> observe_torque(double u_d, double u_q, double i_d, double i_q,
                                                 double omega_r, double r_s, int pole_pairs,
                                                 double omega_min) {
  if (std::abs(omega_r) < omega_min) return std::nullopt;
  FluxTorqueEstimate est;
  est.psi_d = (u_q - r_s * i_q) / omega_r;
  est.psi_q = -(u_d - r_s * i_d) / omega_r;
  est.torque = 1.5 * pole_pairs * (est.psi_d * i_q - est.psi_q * i_d);
  return est;
}

TorqueObserver::TorqueObserver(const ObserverConfig& cfg, double t_s, double r_s, int pole_pairs)
    : cfg_(cfg), t_s_(t_s), r_s_(r_s), pole_pairs_(pole_pairs) {
  cfg_.validate();
  if (!(t_s > 0.0)) throw ConfigError("control period must be positive");
  // Exact discretization of 1 / (tau s + 1) under a held input.
  alpha_ = cfg_.tau_f > 0.0 ? 1.0 - std::exp(-t_s / cfg_.tau_f) : 1.0;
}

TorqueObserver::Output TorqueObserver::update(double u_d, double u_q, double i_d, double i_q,
                                              double omega_r) {
  Output out;
  const auto ss = observe_torque(u_d, u_q, i_d, i_q, omega_r, r_s_, pole_pairs_, cfg_.omega_min);
  const bool quiet = have_prev_ && std::abs(i_d - prev_i_d_) < cfg_.settle_step &&
                     std::abs(i_q - prev_i_q_) < cfg_.settle_step;
  if (!ss) {
    integrating_ = false;
  } else if (!integrating_) {
    last_ = *ss;
    integrating_ = quiet;
  } else {
    // z = psi_d + j psi_q obeys dz/dt = m z + f with m = -g - j ω_r, f held over the tick.
    using C = std::complex<double>;
    const double g = 1.0 / cfg_.tau_c;
    const C m(-g, -omega_r);
    const C drop(u_d - r_s_ * 0.5 * (i_d + prev_i_d_), u_q - r_s_ * 0.5 * (i_q + prev_i_q_));
    const C f = drop + g * C(ss->psi_d, ss->psi_q);
    const C e = std::exp(m * t_s_);
    const C z = e * C(last_.psi_d, last_.psi_q) + (e - 1.0) / m * f;
    last_.psi_d = z.real();
    last_.psi_q = z.imag();
    last_.torque = 1.5 * pole_pairs_ * (last_.psi_d * i_q - last_.psi_q * i_d);
  }
  if (ss) {
    const std::array<double, 2> phi{i_q, -i_d * i_q};
    if (!filter_seeded_) {
      filtered_ = last_.torque;
      phi_ = phi;
      filter_seeded_ = true;
    } else {
      filtered_ += alpha_ * (last_.torque - filtered_);
      for (int j = 0; j < 2; ++j) phi_[j] += alpha_ * (phi[j] - phi_[j]);
    }
    out.valid = true;
  }
  prev_i_d_ = i_d;
  prev_i_q_ = i_q;
  have_prev_ = true;
  out.raw = last_;
  out.torque = filtered_;
  out.regressor = phi_;
  return out;
}

}  // namespace ipmsm
