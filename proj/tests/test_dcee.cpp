#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "ipmsm/dcee.hpp"
#include "ipmsm/errors.hpp"
#include "ipmsm/mtpa.hpp"
#include "ipmsm/plant.hpp"
#include "oracles.hpp"

using namespace ipmsm;

namespace {

const MotorParams kP = MotorParams::reference_machine();

ParamEstimate est(double psi, double l) {
  ParamEstimate e;
  e.theta << psi, l;
  e.covariance << 1.0, 0.0, 0.0, 1e-4;
  return e;
}

EstimatorBank converged(int n = 5) {
  std::vector<ParamEstimate> v(n, est(0.12, 1.2e-3));
  return EstimatorBank(v, 0.99);
}

Vec2 mtpa_xy(double i_s) {
  const double b = oracle::mtpa_angle(i_s, 0.12, 1.2e-3);
  return {-i_s * std::sin(b), i_s * std::cos(b)};
}

EstimatorBank random_bank(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> psi(0.05, 0.3);
  std::uniform_real_distribution<double> l(0.3e-3, 2.0e-3);
  std::vector<ParamEstimate> v;
  for (int j = 0; j < n; ++j) v.push_back(est(psi(rng), l(rng)));
  return EstimatorBank(v, 0.99);
}

// The gradient is always taken right after the real update with the sample at x.
EstimatorBank observed_at(EstimatorBank bank, const Vec2& x) {
  bank.update(regressor(x(0), x(1)), normalized_torque(electromagnetic_torque(x(0), x(1), kP), 3));
  return bank;
}

// Central difference of the predicted-cost surface with a small step.
Vec2 central_gradient(const Vec2& x, const EstimatorBank& bank, double i_s, double h) {
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    g(i) = (predicted_cost(x, e, bank, i_s) - predicted_cost(x, -e, bank, i_s)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("objective vanishes at the mean of an agreeing bank") {
  const EstimatorBank bank = converged();
  const Vec2 r = bank.references(40.0).mean;
  const DualCost c = dual_cost_terms(r, bank, 40.0);
  CHECK(c.exploitation == 0.0);
  CHECK(c.exploration == 0.0);
  CHECK(dual_cost(r, bank, 40.0) == 0.0);
}

TEST_CASE("disagreeing bank at its mean is pure exploration") {
  const EstimatorBank bank = make_bank(BankInit{});
  const Vec2 r = bank.references(58.9).mean;
  const DualCost c = dual_cost_terms(r, bank, 58.9);
  CHECK(c.exploitation == 0.0);
  CHECK(c.exploration > 0.0);
  CHECK(c.total() == c.exploration);
}

TEST_CASE("converged bank at the full-load MTPA point") {
  const Vec2 x = mtpa_xy(58.9);
  CHECK(dual_cost(x, converged(), 58.9) < 1e-6);
}

TEST_CASE("exploration term is exactly zero for cloned estimators") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const EstimatorBank one = random_bank(rng, 1);
    const EstimatorBank clones(std::vector<ParamEstimate>(4, one[0]), 0.99);
    REQUIRE(dual_cost_terms(Vec2(-3.0, 20.0), clones, 50.0).exploration == 0.0);
  }
}

TEST_CASE("objective is non-negative and zero only at an agreeing mean") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> cur(-80.0, 80.0);
  std::uniform_real_distribution<double> is(0.0, 120.0);
  for (int k = 0; k < 2000; ++k) {
    const EstimatorBank bank = random_bank(rng, 3);
    const Vec2 x(cur(rng), cur(rng));
    const double i_s = is(rng);
    const DualCost c = dual_cost_terms(x, bank, i_s);
    REQUIRE(c.exploitation >= 0.0);
    REQUIRE(c.exploration >= 0.0);
    if (i_s > 1.0) REQUIRE(c.total() > 0.0);
  }
}

TEST_CASE("torque prediction") {
  const EstimatorBank bank = converged();
  const Vec2 x(-12.0, 44.0);
  CHECK(predict_torque(x, bank) ==
        doctest::Approx(normalized_torque(electromagnetic_torque(x(0), x(1), kP), 3)).epsilon(1e-12));
  CHECK(predict_torque(Vec2::Zero(), bank) == 0.0);
  const EstimatorBank two({est(0.1, 1e-3), est(0.2, 2e-3)}, 0.99);
  const double a = 0.1 * 44.0 + 1e-3 * 12.0 * 44.0;
  const double b = 0.2 * 44.0 + 2e-3 * 12.0 * 44.0;
  CHECK(predict_torque(x, two) == doctest::Approx(0.5 * (a + b)).epsilon(1e-14));
}

TEST_CASE("predicted cost at zero increment with a converged bank") {
  const EstimatorBank bank = converged();
  const Vec2 x(-10.0, 35.0);
  CHECK(std::abs(predicted_cost(x, Vec2::Zero(), bank, 50.0) - dual_cost(x, bank, 50.0)) < 1e-9);
}

TEST_CASE("predicted cost surface of a converged bank is minimal at the optimum") {
  const EstimatorBank bank = converged();
  const double i_s = 58.9;
  const Vec2 x(-5.0, 50.0);
  const Vec2 target = mtpa_xy(i_s) - x;
  double best = 1e300;
  Vec2 arg = Vec2::Zero();
  for (double dd = -30.0; dd <= 30.0; dd += 0.1) {
    for (double dq = -30.0; dq <= 30.0; dq += 0.1) {
      const double c = predicted_cost(x, Vec2(dd, dq), bank, i_s);
      if (c < best) {
        best = c;
        arg = Vec2(dd, dq);
      }
    }
  }
  CHECK(std::abs(arg(0) - target(0)) <= 0.05 + 1e-9);
  CHECK(std::abs(arg(1) - target(1)) <= 0.05 + 1e-9);
}

TEST_CASE("hypothetical updates never touch the real bank") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> cur(-60.0, 60.0);
  EstimatorBank bank = make_bank(BankInit{});
  for (int k = 0; k < 20; ++k) bank.update(regressor(cur(rng), cur(rng)), cur(rng) * 0.1);
  const EstimatorBank before = bank;
  std::vector<unsigned char> bytes_before;
  for (const auto& e : bank.estimators()) {
    const auto* p = reinterpret_cast<const unsigned char*>(&e);
    bytes_before.insert(bytes_before.end(), p, p + sizeof(e));
  }
  for (int k = 0; k < 100; ++k) {
    const Vec2 x(cur(rng), cur(rng));
    (void)predicted_cost(x, Vec2(cur(rng), cur(rng)), bank, 50.0);
    (void)cost_gradient(x, bank, 50.0, 0.1);
  }
  CHECK(bank == before);
  std::vector<unsigned char> bytes_after;
  for (const auto& e : bank.estimators()) {
    const auto* p = reinterpret_cast<const unsigned char*>(&e);
    bytes_after.insert(bytes_after.end(), p, p + sizeof(e));
  }
  CHECK(bytes_before == bytes_after);
}

TEST_CASE("gradient at and near the optimum") {
  const EstimatorBank bank = converged();
  const Vec2 r = mtpa_xy(58.9);
  const Vec2 g0 = cost_gradient(r, bank, 58.9, 0.1);
  CHECK(std::abs(g0(0)) <= 0.1 + 1e-9);
  CHECK(std::abs(g0(1)) <= 0.1 + 1e-9);
  const Vec2 g1 = cost_gradient(r + Vec2(1.0, 0.0), bank, 58.9, 0.1);
  CHECK(g1(0) > 0.0);
  CHECK(g1(0) == doctest::Approx(2.1).epsilon(1e-6));
}

TEST_CASE("forward-difference gradient agrees with a central-difference oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-40.0, 0.0);
  std::uniform_real_distribution<double> q(10.0, 80.0);
  int within = 0;
  for (int k = 0; k < 20; ++k) {
    const Vec2 x(d(rng), q(rng));
    const EstimatorBank bank = observed_at(make_bank(BankInit{}), x);
    const Vec2 g = cost_gradient(x, bank, 58.9, 0.1);
    const Vec2 c = central_gradient(x, bank, 58.9, 1e-4);
    const double rel = (g - c).norm() / c.norm();
    CAPTURE(rel);
    if (rel < 0.05) ++within;
  }
  CHECK(within == 20);
}

TEST_CASE("gradient sign agrees with the central difference on random states") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-60.0, 10.0);
  std::uniform_real_distribution<double> q(0.0, 100.0);
  std::uniform_real_distribution<double> is(10.0, 110.0);
  int agree = 0, total = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 x(d(rng), q(rng));
    const EstimatorBank bank = observed_at(random_bank(rng, 5), x);
    const double i_s = is(rng);
    const Vec2 g = cost_gradient(x, bank, i_s, 0.1);
    const Vec2 c = central_gradient(x, bank, i_s, 1e-4);
    for (int i = 0; i < 2; ++i) {
      ++total;
      if ((g(i) > 0) == (c(i) > 0)) ++agree;
    }
  }
  const double frac = static_cast<double>(agree) / total;
  MESSAGE("sign agreement " << frac);
  CHECK(frac >= 0.95);
}

TEST_CASE("discrete model") {
  const DiscreteModel m = DiscreteModel::build(kP, 900.0, 1e-4);
  CHECK(m.b(0, 0) == doctest::Approx(1e-4 / kP.l_d));
  CHECK(m.b(1, 1) == doctest::Approx(1e-4 / kP.l_q));
  CHECK(m.b(0, 1) == 0.0);
  CHECK(m.b.determinant() > 0.0);
  CHECK(m.a(0, 1) == doctest::Approx(1e-4 * 900.0 * kP.l_q / kP.l_d));
}

TEST_CASE("control law") {
  const double w = 900.0;
  const DiscreteModel m = DiscreteModel::build(kP, w, 1e-4);
  const Vec2 u0 = control_output(Vec2::Zero(), Vec2::Zero(), m, 0.2, 0.13, w);
  CHECK(u0(0) == 0.0);
  CHECK(u0(1) == doctest::Approx(w * 0.13));

  // with zero gradient, one step of the model returns the same state
  const Vec2 x(-17.0, 42.0);
  const Vec2 u = control_output(x, Vec2::Zero(), m, 0.2, 0.13, w);
  const Vec2 u_eq(u(0), u(1) - w * 0.13);
  const Vec2 next = x + m.a * x + m.b * u_eq;
  CHECK(next(0) == doctest::Approx(x(0)).epsilon(1e-12));
  CHECK(next(1) == doctest::Approx(x(1)).epsilon(1e-12));

  // the gradient moves the state by -k_x grad
  const Vec2 g(1.5, -0.5);
  const Vec2 ug = control_output(x, g, m, 0.2, 0.13, w);
  const Vec2 step = x + m.a * x + m.b * Vec2(ug(0), ug(1) - w * 0.13) - x;
  CHECK(step(0) == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(step(1) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("controller tick near its fixed point") {
  DceeConfig cfg;
  DceeController ctl(cfg, kP, converged());
  const double w = kP.pole_pairs * rpm_to_rad_per_s(3000.0);
  const Vec2 x = mtpa_xy(58.9);
  const double meas = normalized_torque(electromagnetic_torque(x(0), x(1), kP), 3);
  const DceeOutput out = ctl.tick(x, w, meas, 58.9);
  const DiscreteModel m = DiscreteModel::build(kP, w, cfg.t_s);
  const Vec2 next = x + m.a * x + m.b * Vec2(out.voltage(0), out.voltage(1) - w * 0.12);
  CHECK((next - x).norm() <= cfg.k_x * cfg.delta_x * std::sqrt(2.0) + 1e-9);
  CHECK(out.diagnostics.cost.total() < 1e-6);
  CHECK(out.diagnostics.thetas.size() == 5);
  CHECK(std::hypot(out.voltage(0), out.voltage(1)) < kP.voltage_limit());
}

TEST_CASE("explicit regressor tick matches the default one") {
  DceeController a(DceeConfig{}, kP, make_bank(BankInit{}));
  DceeController b(DceeConfig{}, kP, make_bank(BankInit{}));
  const double w = kP.pole_pairs * rpm_to_rad_per_s(3000.0);
  const Vec2 x(-12.0, 40.0);
  const double meas = normalized_torque(electromagnetic_torque(x(0), x(1), kP), 3);
  const DceeOutput oa = a.tick(x, w, meas, 50.0);
  const DceeOutput ob = b.tick(x, w, regressor(x(0), x(1)), meas, 50.0);
  CHECK(a.bank() == b.bank());
  CHECK(oa.voltage == ob.voltage);
  DceeController c(DceeConfig{}, kP, make_bank(BankInit{}));
  c.tick(x, w, Vec2(30.0, 500.0), meas, 50.0);
  CHECK_FALSE(c.bank() == a.bank());
}

TEST_CASE("saturation watchdog") {
  DceeConfig cfg;
  cfg.saturation_tick_limit = 3;
  DceeController ctl(cfg, kP, converged());
  for (int k = 0; k < 3; ++k) ctl.report_saturation(true);
  ctl.report_saturation(false);
  for (int k = 0; k < 3; ++k) ctl.report_saturation(true);
  CHECK_THROWS_AS(ctl.report_saturation(true), DivergenceError);
  DceeConfig bad;
  bad.k_x = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = DceeConfig{};
  bad.delta_x = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
