#pragma once

#include <cstdint>

#include "ipmsm/estimator_bank.hpp"

namespace ipmsm {

enum class TorqueSource { Ideal, Observed };

/// Square-wave extremum seeking on the current vector angle.
struct EsConfig {
  double f_inj = 5000.0;  // Hz
  double a_inj = 0.01;    // rad; 0 disables injection and adaptation
  double k_int = 200.0;   // rad/(N·m·s)

  /// Throws ConfigError for a negative amplitude, non-positive gain or a
  /// half-period that is not a whole number of control ticks.
  void validate(double t_s) const;
};

/// Control ticks per half-period of the injected square wave.
std::int64_t ticks_per_half_period(const EsConfig& cfg, double t_s);

/// ±a_inj; positive on the first half-period starting at tick 0.
double injection_signal(std::int64_t tick, const EsConfig& cfg, double t_s);

/// Gradient estimate g = sign (T - T_prev) / (2 a_inj). Beta integrates the
/// demodulated torque a_inj g at gain k_int and is clamped to [0, pi/2).
double es_demodulate_and_integrate(double torque, double prev_torque, double inj_sign, double beta,
                                   const EsConfig& cfg, double t_s);

/// (i_d*, i_q*) for angle beta + injection at magnitude i_s_ref.
Vec2 es_references(double beta, double injection, double i_s_ref);

/// Stateful ES loop: one call per control tick.
class ExtremumSeeker {
 public:
  ExtremumSeeker(const EsConfig& cfg, double t_s);

  struct Output {
    Vec2 reference = Vec2::Zero();
    double injection = 0.0;
    double gradient = 0.0;
  };

  /// `torque` is the sample taken at the start of this tick; it reflects the
  /// injection applied during the previous tick, which is the sign used for
  /// demodulation.
  Output tick(double torque, double i_s_ref);

  double beta() const { return beta_; }
  void reset(double beta = 0.0);

 private:
  EsConfig cfg_;
  double t_s_;
  std::int64_t tick_ = 0;
  double beta_ = 0.0;
  double prev_torque_ = 0.0;
  double prev_injection_ = 0.0;
  bool primed_ = false;
};

}  // namespace ipmsm
