#include "ipmsm/extremum_seeking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipmsm/errors.hpp"

namespace ipmsm {

namespace {

// Largest representable angle below pi/2.
const double kBetaMax = std::nextafter(std::numbers::pi / 2.0, 0.0);

}  // namespace

std::int64_t ticks_per_half_period(const EsConfig& cfg, double t_s) {
  if (!(cfg.f_inj > 0.0) || !(t_s > 0.0)) throw ConfigError("injection frequency and T_s must be positive");
  const double ticks = 1.0 / (2.0 * cfg.f_inj * t_s);
  const double rounded = std::round(ticks);
  if (rounded < 1.0 || std::abs(ticks - rounded) > 1e-9 * std::max(1.0, ticks)) {
    throw ConfigError("injection half-period must be a whole number (>= 1) of control ticks");
  }
  return static_cast<std::int64_t>(rounded);
}

void EsConfig::validate(double t_s) const {
  if (!(a_inj >= 0.0)) throw ConfigError("es.a_inj must be non-negative");
  if (!(k_int > 0.0)) throw ConfigError("es.k_int must be positive");
  ticks_per_half_period(*this, t_s);
}

double injection_signal(std::int64_t tick, const EsConfig& cfg, double t_s) {
  if (cfg.a_inj == 0.0) return 0.0;
  const std::int64_t half = ticks_per_half_period(cfg, t_s);
  return ((tick / half) % 2 == 0) ? cfg.a_inj : -cfg.a_inj;
}

double es_demodulate_and_integrate(double torque, double prev_torque, double inj_sign, double beta,
                                   const EsConfig& cfg, double t_s) {
  if (cfg.a_inj == 0.0) return beta;
  const double gradient = inj_sign * (torque - prev_torque) / (2.0 * cfg.a_inj);
  // The integrator sees the demodulated torque a·g (N·m), not the raw slope.
  return std::clamp(beta + cfg.k_int * cfg.a_inj * gradient * t_s, 0.0, kBetaMax);
}

Vec2 es_references(double beta, double injection, double i_s_ref) {
  const double angle = beta + injection;
  return {-i_s_ref * std::sin(angle), i_s_ref * std::cos(angle)};
}

ExtremumSeeker::ExtremumSeeker(const EsConfig& cfg, double t_s) : cfg_(cfg), t_s_(t_s) {
  cfg_.validate(t_s_);
}

void ExtremumSeeker::reset(double beta) {
  tick_ = 0;
  beta_ = beta;
  prev_torque_ = 0.0;
  prev_injection_ = 0.0;
  primed_ = false;
}

ExtremumSeeker::Output ExtremumSeeker::tick(double torque, double i_s_ref) {
  Output out;
  if (primed_ && cfg_.a_inj > 0.0) {
    const double sign = prev_injection_ >= 0.0 ? 1.0 : -1.0;
    out.gradient = sign * (torque - prev_torque_) / (2.0 * cfg_.a_inj);
    beta_ = es_demodulate_and_integrate(torque, prev_torque_, sign, beta_, cfg_, t_s_);
  }
  out.injection = injection_signal(tick_, cfg_, t_s_);
  out.reference = es_references(beta_, out.injection, i_s_ref);

  prev_torque_ = torque;
  prev_injection_ = out.injection;
  primed_ = true;
  ++tick_;
  return out;
}

}  // namespace ipmsm
