#include "ipmsm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ipmsm/mtpa.hpp"
#include "ipmsm/plant.hpp"

namespace ipmsm {

namespace {

constexpr double kTimeEps = 1e-9;

}  // namespace

std::string_view to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::Id0: return "id0";
    case ControlMode::ExtremumSeeking: return "es";
    case ControlMode::Dcee: return "dcee";
  }
  return "?";
}

std::string_view to_string(TorqueSource source) {
  return source == TorqueSource::Ideal ? "ideal" : "observed";
}

ControlMode parse_mode(std::string_view text) {
  if (text == "id0") return ControlMode::Id0;
  if (text == "es") return ControlMode::ExtremumSeeking;
  if (text == "dcee") return ControlMode::Dcee;
  throw ConfigError("unknown control mode '" + std::string(text) + "' (expected id0, es or dcee)");
}

TorqueSource parse_torque_source(std::string_view text) {
  if (text == "ideal") return TorqueSource::Ideal;
  if (text == "observed") return TorqueSource::Observed;
  throw ConfigError("unknown torque source '" + std::string(text) + "' (expected ideal or observed)");
}

void ScenarioTimeline::validate() const {
  if (segments.empty()) throw ConfigError("timeline has no segments");
  if (std::abs(segments.front().t_start) > kTimeEps) throw ConfigError("timeline must start at t = 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.t_start < s.t_end)) throw ConfigError("segment " + std::to_string(i) + " has t_start >= t_end");
    if (i > 0 && std::abs(segments[i - 1].t_end - s.t_start) > kTimeEps) {
      throw ConfigError("segment " + std::to_string(i) + " is not contiguous with its predecessor");
    }
    if (!std::isfinite(s.speed_ref_rpm) || !std::isfinite(s.load)) {
      throw ConfigError("segment " + std::to_string(i) + " has a non-finite speed or load");
    }
  }
}

std::size_t ScenarioTimeline::index_at(double t) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (t < segments[i].t_end - kTimeEps) return i;
  }
  return segments.size() - 1;
}

ScenarioTimeline ScenarioTimeline::reference_run(ControlMode mtpa_mode, TorqueSource source) {
  const auto src = source;
  return {{
      {0.0, 0.2, 3000.0, 0.0, ControlMode::Id0, src},
      {0.2, 0.4, 3000.0, 36.0, ControlMode::Id0, src},
      {0.4, 0.6, 3000.0, 36.0, mtpa_mode, src},
      {0.6, 0.8, 3000.0, 18.0, mtpa_mode, src},
      {0.8, 1.0, 1500.0, 18.0, mtpa_mode, src},
  }};
}

double smooth_load(double t, double t_step, double before, double after, double ramp) {
  const double tau = std::clamp((t - t_step) / ramp, 0.0, 1.0);
  const double s = tau * tau * (3.0 - 2.0 * tau);
  return before + (after - before) * s;
}

double timeline_load(const ScenarioTimeline& timeline, double t, double ramp) {
  const std::size_t i = timeline.index_at(t);
  const Segment& seg = timeline.segments[i];
  if (i == 0) return seg.load;
  return smooth_load(t, seg.t_start, timeline.segments[i - 1].load, seg.load, ramp);
}

void SimulationConfig::validate() const {
  motor.validate();
  nominal.validate();
  if (!(plant_dt > 0.0)) throw ConfigError("plant_dt must be positive");
  if (plant_dt > max_stable_step(motor)) throw ConfigError("plant_dt exceeds 2 L_d / R_s");
  if (!(control_period >= plant_dt)) throw ConfigError("control_period must be >= plant_dt");
  steps_per_tick();
  if (!(load_ramp > 0.0)) throw ConfigError("load_ramp must be positive");
  if (!(current_noise_std >= 0.0)) throw ConfigError("current_noise_std must be non-negative");
  if (!(divergence_factor > 0.0)) throw ConfigError("divergence_factor must be positive");
  foc.validate();
  DceeConfig d = dcee;
  d.t_s = control_period;
  d.validate();
  bank.validate();
  es.validate(control_period);
  observer.validate();
}

int SimulationConfig::steps_per_tick() const {
  const double ratio = control_period / plant_dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-6 * n) {
    throw ConfigError("control_period must be an integer multiple of plant_dt");
  }
  return static_cast<int>(n);
}

namespace {

double minimum_current_for(double torque, const MotorParams& m) {
  try {
    return torque_to_current(std::abs(torque), m.psi_f, m.saliency(), m.pole_pairs, 10.0 * m.i_s_max);
  } catch (const UnreachableTorqueError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void fill_estimators(LogRecord& rec, const EstimatorBank& bank) {
  const std::size_t n = bank.size();
  rec.est_psi_f.resize(n);
  rec.est_saliency.resize(n);
  rec.est_p_eig_min.resize(n);
  rec.est_p_eig_max.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    rec.est_psi_f[j] = bank[j].psi_f();
    rec.est_saliency[j] = bank[j].saliency();
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(bank[j].covariance, Eigen::EigenvaluesOnly);
    rec.est_p_eig_min[j] = eig.eigenvalues()(0);
    rec.est_p_eig_max[j] = eig.eigenvalues()(1);
  }
  const Vec2 mean = bank.mean_theta();
  rec.psi_f_hat = mean(0);
  rec.saliency_hat = mean(1);
  rec.i_base_pinned = bank[0].i_base();
}

}  // namespace

ScenarioResult run_scenario(const ScenarioTimeline& timeline, const SimulationConfig& cfg) {
  timeline.validate();
  cfg.validate();

  const MotorParams& truth = cfg.motor;
  const MotorParams& nominal = cfg.nominal;
  const double t_s = cfg.control_period;
  const int steps = cfg.steps_per_tick();
  const auto ticks = static_cast<std::int64_t>(std::llround(timeline.duration() / t_s));

  Plant plant(truth, cfg.plant_dt, cfg.divergence_factor);
  MotorState init;
  init.omega_m = rpm_to_rad_per_s(cfg.initial_speed_rpm);
  plant.reset(init);

  PiState speed = make_speed_pi(nominal, cfg.foc);
  PiState cur_d = make_current_pi(nominal, nominal.l_d, cfg.foc);
  PiState cur_q = make_current_pi(nominal, nominal.l_q, cfg.foc);

  DceeConfig dcee_cfg = cfg.dcee;
  dcee_cfg.t_s = t_s;
  DceeController dcee(dcee_cfg, nominal, make_bank(cfg.bank));
  ExtremumSeeker es(cfg.es, t_s);
  TorqueObserver observer(cfg.observer, t_s, nominal.r_s, nominal.pole_pairs);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  ScenarioResult result;
  result.estimator_count = dcee.bank().size();
  result.log.reserve(static_cast<std::size_t>(ticks));

  Vec2 last_voltage = Vec2::Zero();
  bool have_mode = false;
  ControlMode prev_mode = ControlMode::Id0;

  for (std::int64_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * t_s;
    const Segment& seg = timeline.segments[timeline.index_at(t)];
    const MotorState& s = plant.state();

    LogRecord rec;
    rec.t = t;
    rec.mode = seg.mode;
    rec.torque_source = seg.torque_source;
    rec.omega_m = s.omega_m;
    rec.omega_ref = rpm_to_rad_per_s(seg.speed_ref_rpm);
    rec.t_l = timeline_load(timeline, t, cfg.load_ramp);

    Vec2 x(s.i_d, s.i_q);
    if (cfg.current_noise_std > 0.0) {
      x(0) += cfg.current_noise_std * noise(rng);
      x(1) += cfg.current_noise_std * noise(rng);
    }
    rec.i_d = x(0);
    rec.i_q = x(1);
    rec.i_s = x.norm();
    rec.beta_meas = std::atan2(-x(0), x(1));
    rec.p_cu = copper_loss(x(0), x(1), truth.r_s);

    const double omega_r = nominal.pole_pairs * s.omega_m;
    rec.t_e = electromagnetic_torque(x(0), x(1), truth);
    rec.i_s_mtpa = minimum_current_for(rec.t_e, truth);

    const auto obs = observer.update(last_voltage(0), last_voltage(1), x(0), x(1), omega_r);
    rec.t_e_obs = obs.torque;
    rec.psi_d_obs = obs.raw.psi_d;
    rec.psi_q_obs = obs.raw.psi_q;
    rec.obs_valid = obs.valid;
    const double torque = seg.torque_source == TorqueSource::Ideal ? rec.t_e : rec.t_e_obs;
    rec.t_e1_source = normalized_torque(torque, nominal.pole_pairs);

    const double i_s_ref = speed_pi(rec.omega_ref, s.omega_m, speed, t_s);
    rec.i_s_ref = i_s_ref;

    if (have_mode && seg.mode != prev_mode) {
      if (seg.mode != ControlMode::Dcee && prev_mode == ControlMode::Dcee) {
        // Bumpless hand-back: PI integrators take over the last voltage.
        cur_d.integ = std::clamp(last_voltage(0) + omega_r * nominal.l_q * x(1), cur_d.out_min, cur_d.out_max);
        cur_q.integ = std::clamp(last_voltage(1) - omega_r * (nominal.l_d * x(0) + nominal.psi_f),
                                 cur_q.out_min, cur_q.out_max);
      }
      if (seg.mode == ControlMode::ExtremumSeeking) es.reset(std::clamp(rec.beta_meas, 0.0, 1.5));
    }

    Vec2 command = Vec2::Zero();
    switch (seg.mode) {
      case ControlMode::Id0: {
        const Vec2 refs(0.0, i_s_ref);
        rec.i_d_ref = refs(0);
        rec.i_q_ref = refs(1);
        command = current_pi_decoupled(refs, x, omega_r, nominal, cur_d, cur_q, t_s);
        break;
      }
      case ControlMode::ExtremumSeeking: {
        const auto out = es.tick(torque, i_s_ref);
        rec.i_d_ref = out.reference(0);
        rec.i_q_ref = out.reference(1);
        rec.es_gradient = out.gradient;
        rec.injection = out.injection;
        command = current_pi_decoupled(out.reference, x, omega_r, nominal, cur_d, cur_q, t_s);
        break;
      }
      case ControlMode::Dcee: {
        const Vec2 phi = seg.torque_source == TorqueSource::Ideal ? regressor(x(0), x(1))
                                                                 : Vec2(obs.regressor[0], obs.regressor[1]);
        const DceeOutput out = dcee.tick(x, omega_r, phi, rec.t_e1_source, i_s_ref);
        const auto& d = out.diagnostics;
        rec.i_d_ref = d.r_mean(0);
        rec.i_q_ref = d.r_mean(1);
        rec.r_mean_d = d.r_mean(0);
        rec.r_mean_q = d.r_mean(1);
        rec.cost = d.cost.total();
        rec.exploitation = d.cost.exploitation;
        rec.exploration = d.cost.exploration;
        rec.grad_d = d.gradient(0);
        rec.grad_q = d.gradient(1);
        command = out.voltage;
        break;
      }
    }
    rec.beta = es.beta();
    rec.t_e1_hat = predict_torque(x, dcee.bank());
    fill_estimators(rec, dcee.bank());

    rec.u_saturated = plant.set_input({command(0), command(1), rec.t_l});
    last_voltage = Vec2(plant.applied_input().u_d, plant.applied_input().u_q);
    rec.u_d = last_voltage(0);
    rec.u_q = last_voltage(1);

    try {
      if (seg.mode == ControlMode::Dcee) dcee.report_saturation(rec.u_saturated);
      plant.advance(steps);
    } catch (const DivergenceError& e) {
      throw ScenarioDivergence(e.what(), rec);
    }

    result.log.push_back(std::move(rec));
    prev_mode = seg.mode;
    have_mode = true;
  }

  result.segments = summarize(timeline, result.log);
  return result;
}

std::vector<SegmentSummary> summarize(const ScenarioTimeline& timeline, const std::vector<LogRecord>& log) {
  std::vector<SegmentSummary> out;
  for (const Segment& seg : timeline.segments) {
    SegmentSummary sum;
    sum.t_start = seg.t_start;
    sum.t_end = seg.t_end;
    const double mid = 0.5 * (seg.t_start + seg.t_end);
    std::size_t n = 0;
    double last_outside = std::numeric_limits<double>::quiet_NaN();
    bool any = false;
    double last_t = seg.t_start;
    for (const LogRecord& r : log) {
      if (r.t < seg.t_start - kTimeEps || r.t >= seg.t_end - kTimeEps) continue;
      any = true;
      last_t = r.t;
      const double tol = std::max(0.01 * std::abs(r.omega_ref), 1.0);
      if (std::abs(r.omega_m - r.omega_ref) > tol) last_outside = r.t;
      if (r.t < mid - kTimeEps) continue;
      sum.i_s += r.i_s;
      sum.i_d += r.i_d;
      sum.i_q += r.i_q;
      sum.i_s_ref += r.i_s_ref;
      sum.p_cu += r.p_cu;
      sum.t_e += r.t_e;
      sum.omega_m += r.omega_m;
      sum.beta += r.beta;
      ++n;
    }
    if (n > 0) {
      const double inv = 1.0 / static_cast<double>(n);
      sum.i_s *= inv;
      sum.i_d *= inv;
      sum.i_q *= inv;
      sum.i_s_ref *= inv;
      sum.p_cu *= inv;
      sum.t_e *= inv;
      sum.omega_m *= inv;
      sum.beta *= inv;
    }
    if (!any) {
      sum.speed_settling_time = std::numeric_limits<double>::quiet_NaN();
    } else if (std::isnan(last_outside)) {
      sum.speed_settling_time = 0.0;
    } else if (last_outside >= last_t) {
      sum.speed_settling_time = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double step = log.size() > 1 ? log[1].t - log[0].t : 0.0;
      sum.speed_settling_time = last_outside + step - seg.t_start;
    }
    out.push_back(sum);
  }
  return out;
}

}  // namespace ipmsm
