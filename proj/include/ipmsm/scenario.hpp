#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipmsm/dcee.hpp"
#include "ipmsm/errors.hpp"
#include "ipmsm/estimator_bank.hpp"
#include "ipmsm/extremum_seeking.hpp"
#include "ipmsm/foc.hpp"
#include "ipmsm/motor_params.hpp"
#include "ipmsm/torque_observer.hpp"

namespace ipmsm {

enum class ControlMode { Id0, ExtremumSeeking, Dcee };

std::string_view to_string(ControlMode mode);
std::string_view to_string(TorqueSource source);
/// Accepts "id0", "es", "dcee" (case-sensitive). Throws ConfigError otherwise.
ControlMode parse_mode(std::string_view text);
/// Accepts "ideal", "observed".
TorqueSource parse_torque_source(std::string_view text);

struct Segment {
  double t_start = 0.0;        // s
  double t_end = 0.0;          // s
  double speed_ref_rpm = 0.0;  // r/min
  double load = 0.0;           // N·m
  ControlMode mode = ControlMode::Id0;
  TorqueSource torque_source = TorqueSource::Ideal;
};

struct ScenarioTimeline {
  std::vector<Segment> segments;

  /// Contiguous, non-overlapping, starting at t = 0, t_start < t_end.
  void validate() const;
  double duration() const { return segments.empty() ? 0.0 : segments.back().t_end; }
  /// Index of the segment containing t (the last one for t >= duration).
  std::size_t index_at(double t) const;

  /// Five conditions over 1.0 s: i_d = 0 no load / full load at rated speed,
  /// then DCEE at full load, half load, and half load at half speed.
  static ScenarioTimeline reference_run(ControlMode mtpa_mode = ControlMode::Dcee,
                                        TorqueSource source = TorqueSource::Ideal);
};

/// Smoothstep 3τ² - 2τ³ between two load levels, τ = clamp((t - t_step)/ramp, 0, 1).
double smooth_load(double t, double t_step, double before, double after, double ramp);

/// Load torque of the timeline at time t; each change of load at a segment
/// boundary is ramped with smooth_load.
double timeline_load(const ScenarioTimeline& timeline, double t, double ramp);

struct SimulationConfig {
  MotorParams motor;     // ground truth
  MotorParams nominal;   // what the controllers believe
  double plant_dt = 1e-6;
  double control_period = 1e-4;
  double divergence_factor = 10.0;
  double load_ramp = 0.01;
  double initial_speed_rpm = 0.0;
  double current_noise_std = 0.0;  // A, additive Gaussian on sampled currents
  std::uint64_t seed = 0;
  FocGains foc;
  DceeConfig dcee;
  BankInit bank;
  EsConfig es;
  ObserverConfig observer;

  /// Throws ConfigError.
  void validate() const;
  int steps_per_tick() const;
};

struct LogRecord {
  double t = 0.0;
  ControlMode mode = ControlMode::Id0;
  TorqueSource torque_source = TorqueSource::Ideal;
  double omega_m = 0.0;
  double omega_ref = 0.0;
  double t_e = 0.0;           // plant torque at the sampled currents
  double t_l = 0.0;
  double t_e_obs = 0.0;       // filtered observer output
  double t_e1_source = 0.0;   // normalized torque fed to the active strategy
  double t_e1_hat = 0.0;      // bank-mean prediction at the sampled currents
  double i_d = 0.0;
  double i_q = 0.0;
  double i_s = 0.0;
  double i_s_ref = 0.0;
  double i_s_mtpa = 0.0;      // minimum current for t_e with true parameters
  double u_d = 0.0;           // applied over [t, t + T_s)
  double u_q = 0.0;
  bool u_saturated = false;
  double i_d_ref = 0.0;
  double i_q_ref = 0.0;
  double beta = 0.0;          // ES angle state
  double beta_meas = 0.0;     // atan2(-i_d, i_q)
  double es_gradient = 0.0;
  double injection = 0.0;
  double cost = 0.0;
  double exploitation = 0.0;
  double exploration = 0.0;
  double grad_d = 0.0;
  double grad_q = 0.0;
  double r_mean_d = 0.0;
  double r_mean_q = 0.0;
  double psi_f_hat = 0.0;     // bank mean
  double saliency_hat = 0.0;  // bank mean
  double i_base_pinned = 0.0; // i_base of estimator 0
  double psi_d_obs = 0.0;
  double psi_q_obs = 0.0;
  bool obs_valid = false;
  double p_cu = 0.0;
  std::vector<double> est_psi_f;
  std::vector<double> est_saliency;
  std::vector<double> est_p_eig_min;
  std::vector<double> est_p_eig_max;
};

struct SegmentSummary {
  double t_start = 0.0;
  double t_end = 0.0;
  /// Means over the second half of the segment.
  double i_s = 0.0;
  double i_d = 0.0;
  double i_q = 0.0;
  double i_s_ref = 0.0;
  double p_cu = 0.0;
  double t_e = 0.0;
  double omega_m = 0.0;
  double beta = 0.0;
  /// Time from segment start until |ω - ω_ref| stays within 1% of ω_ref (NaN if never).
  double speed_settling_time = 0.0;
};

struct ScenarioResult {
  std::size_t estimator_count = 0;
  std::vector<LogRecord> log;
  std::vector<SegmentSummary> segments;
};

/// Divergence with the record of the tick that triggered it.
class ScenarioDivergence : public DivergenceError {
 public:
  ScenarioDivergence(const std::string& what, LogRecord record)
      : DivergenceError(what), record_(std::move(record)) {}
  const LogRecord& record() const { return record_; }

 private:
  LogRecord record_;
};

/// Runs the dual-rate loop: steps_per_tick() plant micro-steps per control
/// tick with all commands held between ticks. The estimator bank persists
/// across mode switches and is only updated while DCEE is active.
ScenarioResult run_scenario(const ScenarioTimeline& timeline, const SimulationConfig& cfg);

std::vector<SegmentSummary> summarize(const ScenarioTimeline& timeline, const std::vector<LogRecord>& log);

}  // namespace ipmsm
