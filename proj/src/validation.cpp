#include "ipmsm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "ipmsm/csv_log.hpp"
#include "ipmsm/dcee.hpp"
#include "ipmsm/estimator_bank.hpp"
#include "ipmsm/mtpa.hpp"
#include "ipmsm/plant.hpp"
#include "ipmsm/scenario.hpp"
#include "ipmsm/torque_observer.hpp"

namespace ipmsm {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckResult check_mtpa() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> psi(0.02, 0.5);
  std::uniform_real_distribution<double> log_l(std::log(2e-5), std::log(5e-3));
  std::uniform_real_distribution<double> is(0.5, 300.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double p = psi(rng), l = std::exp(log_l(rng)), i = is(rng);
    worst = std::max(worst, std::abs(mtpa_point(i, p, l).beta - mtpa_oracle(i, p, l, 2000).beta));
  }
  return {"mtpa closed form vs grid search", worst < 1e-6, fmt("worst %.2e rad over 200 triples", worst)};
}

CheckResult check_rls_batch() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> cur(-80.0, 80.0);
  std::normal_distribution<double> noise(0.0, 0.2);
  ParamEstimate est;
  est.theta << 0.25, 0.5e-3;
  est.covariance << 1.0, 0.0, 0.0, 1e-4;
  // normal equations with the RLS prior
  double m00 = 1.0, m01 = 0.0, m11 = 1e4, r0 = 0.25, r1 = 0.5e-3 * 1e4;
  for (int k = 0; k < 300; ++k) {
    const double d = cur(rng), q = cur(rng);
    const double y = 0.12 * q - 1.2e-3 * d * q + noise(rng);
    est = rls_update(est, regressor(d, q), y, 1.0);
    const double f0 = q, f1 = -d * q;
    m00 += f0 * f0;
    m01 += f0 * f1;
    m11 += f1 * f1;
    r0 += f0 * y;
    r1 += f1 * y;
  }
  const double det = m00 * m11 - m01 * m01;
  const double a = (r0 * m11 - m01 * r1) / det;
  const double b = (m00 * r1 - m01 * r0) / det;
  const double err = std::max(std::abs(est.theta(0) - a) / std::abs(a), std::abs(est.theta(1) - b) / std::abs(b));
  return {"rls (lambda = 1) vs batch least squares", err < 1e-9, fmt("relative error %.2e", err)};
}

CheckResult check_covariance() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cur(-120.0, 120.0);
  ParamEstimate est;
  est.theta << 0.25, 0.5e-3;
  est.covariance << 1.0, 0.0, 0.0, 1e-4;
  double min_eig = 1e300;
  bool ok = true;
  for (int k = 1; k <= 100000; ++k) {
    const double d = cur(rng), q = cur(rng);
    est = rls_update(est, regressor(d, q), 0.12 * q - 1.2e-3 * d * q, 0.97);
    if (k % 100 == 0) {
      const Mat2& P = est.covariance;
      ok = ok && P(0, 1) == P(1, 0);
      const double lo = 0.5 * (P(0, 0) + P(1, 1)) - std::hypot(0.5 * (P(0, 0) - P(1, 1)), P(0, 1));
      min_eig = std::min(min_eig, lo);
    }
  }
  ok = ok && min_eig > 0.0;
  return {"covariance symmetric positive definite", ok, fmt("min eigenvalue %.3e over 1e5 updates", min_eig)};
}

CheckResult check_dual_cost(const BankInit& init) {
  const EstimatorBank bank = make_bank(init);
  const EstimatorBank clones(std::vector<ParamEstimate>(bank.size(), bank[0]), bank.lambda());
  const double zero = dual_cost_terms(Vec2(-7.0, 33.0), clones, 58.9).exploration;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> cur(-80.0, 80.0);
  double lowest = 1e300;
  for (int k = 0; k < 1000; ++k) lowest = std::min(lowest, dual_cost(Vec2(cur(rng), cur(rng)), bank, 58.9));
  const bool ok = zero == 0.0 && lowest >= 0.0;
  return {"dual objective identities", ok, fmt("cloned exploration %.1e, min D %.3e", zero, lowest)};
}

CheckResult check_purity(const BankInit& init) {
  EstimatorBank bank = make_bank(init);
  bank.update(regressor(-10.0, 40.0), 5.0);
  const EstimatorBank before = bank;
  for (int k = 0; k < 50; ++k) {
    (void)predicted_cost(Vec2(-k * 0.5, 30.0), Vec2(0.1, -0.1), bank, 50.0);
    (void)cost_gradient(Vec2(-k * 0.5, 30.0), bank, 50.0, 0.1);
  }
  return {"hypothetical updates leave the bank untouched", bank == before, ""};
}

CheckResult check_observer(const MotorParams& p, const ObserverConfig& oc, double t_s) {
  const double w_r = p.pole_pairs * rpm_to_rad_per_s(p.rated_speed_rpm);
  const double i_d = -23.1, i_q = 54.2;
  const double u_d = p.r_s * i_d - w_r * p.l_q * i_q;
  const double u_q = p.r_s * i_q + w_r * (p.l_d * i_d + p.psi_f);
  TorqueObserver obs(oc, t_s, p.r_s, p.pole_pairs);
  const int n = static_cast<int>(std::ceil(5.0 * oc.tau_f / t_s)) + 1;
  for (int k = 0; k < n; ++k) obs.update(u_d, u_q, i_d, i_q, w_r);
  const double truth = electromagnetic_torque(i_d, i_q, p);
  const double rel = std::abs(obs.torque() - truth) / truth;
  return {"observer steady-state exactness", rel < 1e-3, fmt("relative error %.2e", rel)};
}

MotorState integrate_locked(const MotorParams& base, double h) {
  MotorParams p = base;
  p.inertia = 1e12;
  MotorState s{-10.0, 30.0, rpm_to_rad_per_s(p.rated_speed_rpm), 0.0};
  const PlantInput in{-60.0, 150.0, 0.0};
  const int n = static_cast<int>(std::lround(2e-3 / h));
  for (int k = 0; k < n; ++k) s = step_plant(s, in, p, h, 1e9);
  return s;
}

CheckResult check_rk4(const MotorParams& p) {
  const MotorState a = integrate_locked(p, 2e-6);
  const MotorState b = integrate_locked(p, 1e-6);
  const MotorState c = integrate_locked(p, 0.5e-6);
  const double order = std::log2(std::hypot(a.i_d - b.i_d, a.i_q - b.i_q) / std::hypot(b.i_d - c.i_d, b.i_q - c.i_q));
  return {"plant step halving order", order >= 3.5, fmt("observed order %.2f", order)};
}

CheckResult check_determinism(const RunConfig& cfg) {
  std::ostringstream a, b;
  const auto ra = run_scenario(cfg.timeline, cfg.sim);
  write_csv(a, ra.log, ra.estimator_count);
  const auto rb = run_scenario(cfg.timeline, cfg.sim);
  write_csv(b, rb.log, rb.estimator_count);
  const bool same = a.str() == b.str();
  return {"scenario CSV determinism", same, std::to_string(ra.log.size()) + " rows"};
}

}  // namespace

std::vector<CheckResult> run_validation(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  out.push_back(check_mtpa());
  out.push_back(check_rls_batch());
  out.push_back(check_covariance());
  out.push_back(check_dual_cost(cfg.sim.bank));
  out.push_back(check_purity(cfg.sim.bank));
  out.push_back(check_observer(cfg.sim.motor, cfg.sim.observer, cfg.sim.control_period));
  out.push_back(check_rk4(cfg.sim.motor));
  try {
    out.push_back(check_determinism(cfg));
  } catch (const std::exception& e) {
    out.push_back({"scenario CSV determinism", false, e.what()});
  }
  return out;
}

}  // namespace ipmsm
