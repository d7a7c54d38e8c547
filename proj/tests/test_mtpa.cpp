#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ipmsm/errors.hpp"
#include "ipmsm/mtpa.hpp"
#include "oracles.hpp"

using namespace ipmsm;

namespace {
constexpr double kPsi = 0.12;
constexpr double kLqd = 1.2e-3;
}  // namespace

TEST_CASE("base current") {
  CHECK(mtpa_point(10.0, kPsi, kLqd).i_base == doctest::Approx(100.0));
  CHECK(mtpa_point(10.0, 0.25, 0.5e-3).i_base == doctest::Approx(500.0));
}

TEST_CASE("zero current gives the origin") {
  const MtpaPoint p = mtpa_point(0.0, kPsi, kLqd);
  CHECK(p.beta == 0.0);
  CHECK(p.i_d_ref == 0.0);
  CHECK(p.i_q_ref == 0.0);
}

TEST_CASE("full-load point") {
  const MtpaPoint p = mtpa_point(58.9, kPsi, kLqd);
  CHECK(p.beta == doctest::Approx(oracle::mtpa_angle(58.9, kPsi, kLqd)).epsilon(1e-12));
  CHECK(p.beta == doctest::Approx(0.412).epsilon(0.005));
  CHECK(p.i_d_ref == doctest::Approx(-23.6).epsilon(0.01));
  CHECK(p.i_q_ref == doctest::Approx(54.0).epsilon(0.01));
  CHECK(p.i_d_ref * p.i_d_ref + p.i_q_ref * p.i_q_ref == doctest::Approx(58.9 * 58.9));
}

TEST_CASE("closed form matches the grid search oracle at fixed currents") {
  for (double i_s : {1.0, 10.0, 58.9, 120.0}) {
    CAPTURE(i_s);
    CHECK(std::abs(mtpa_point(i_s, kPsi, kLqd).beta - mtpa_oracle(i_s, kPsi, kLqd).beta) < 1e-6);
  }
  CHECK(mtpa_oracle(0.0, kPsi, kLqd).beta == 0.0);
  CHECK(mtpa_oracle(10.0, 1e3, kLqd).beta < 1e-3);
  CHECK_THROWS(mtpa_oracle(10.0, kPsi, kLqd, 999));
}

TEST_CASE("closed form matches the oracle on random triples") {
  const auto sweep = oracle::mtpa_random_sweep(1000, 42);
  MESSAGE("worst |beta - beta_oracle| = " << sweep.worst);
  CHECK(sweep.trials == 1000);
  CHECK(sweep.worst < 1e-6);
}

TEST_CASE("returned angle is stationary") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> is(0.5, 200.0);
  for (int k = 0; k < 200; ++k) {
    const double i = is(rng);
    const double b = mtpa_point(i, kPsi, kLqd).beta;
    const double h = 1e-6;
    const double t = oracle::torque(i, b, kPsi, kLqd, 3);
    const double dt = (oracle::torque(i, b + h, kPsi, kLqd, 3) - oracle::torque(i, b - h, kPsi, kLqd, 3)) / (2 * h);
    CAPTURE(i);
    CHECK(std::abs(dt) < 1e-6 * t);
  }
}

TEST_CASE("angle grows with current and depends only on i_s / i_base") {
  double prev = -1.0;
  for (double i = 0.0; i <= 300.0; i += 0.5) {
    const double b = mtpa_point(i, kPsi, kLqd).beta;
    REQUIRE(b >= prev);
    REQUIRE(b < std::numbers::pi / 2);
    prev = b;
  }
  for (double k : {0.1, 2.0, 7.5}) {
    CHECK(mtpa_point(40.0 * k, kPsi * k, kLqd).beta == doctest::Approx(mtpa_point(40.0, kPsi, kLqd).beta).epsilon(1e-12));
  }
}

TEST_CASE("reference invariants hold") {
  for (double i : {0.1, 5.0, 60.0, 500.0, 1e5}) {
    const MtpaPoint p = mtpa_point(i, kPsi, kLqd);
    CHECK(p.i_d_ref <= 0.0);
    CHECK(p.beta >= 0.0);
    CHECK(p.beta < std::numbers::pi / 2);
    CHECK(std::hypot(p.i_d_ref, p.i_q_ref) == doctest::Approx(i).epsilon(1e-12));
  }
}

TEST_CASE("degenerate saliency and bad arguments") {
  CHECK_THROWS_AS(mtpa_point(10.0, kPsi, 0.0), DegenerateSaliencyError);
  CHECK_THROWS_AS(mtpa_point(10.0, kPsi, kSaliencyGuard), DegenerateSaliencyError);
  CHECK_NOTHROW(mtpa_point(10.0, kPsi, 2 * kSaliencyGuard));
  CHECK_THROWS(mtpa_point(-1.0, kPsi, kLqd));
  CHECK_THROWS(mtpa_point(1.0, 0.0, kLqd));
  CHECK_FALSE(mtpa_defined(kPsi, 0.0));
  CHECK(mtpa_defined(kPsi, kLqd));
}

TEST_CASE("torque to current on the MTPA curve") {
  CHECK(torque_to_current(0.0, kPsi, kLqd, 3, 120.0) == 0.0);
  const double full = torque_to_current(36.0, kPsi, kLqd, 3, 120.0);
  const double half = torque_to_current(18.0, kPsi, kLqd, 3, 120.0);
  CHECK(full == doctest::Approx(58.8).epsilon(0.01));
  CHECK(half == doctest::Approx(31.8).epsilon(0.01));
  // the returned current does produce the torque
  const double b = oracle::mtpa_angle(full, kPsi, kLqd);
  CHECK(oracle::torque(full, b, kPsi, kLqd, 3) == doctest::Approx(36.0).epsilon(1e-5));
  // and no smaller current at any angle does
  for (double beta = 0.0; beta < 1.5; beta += 1e-3) {
    REQUIRE(oracle::torque(full * 0.999, beta, kPsi, kLqd, 3) < 36.0);
  }
  CHECK_THROWS_AS(torque_to_current(500.0, kPsi, kLqd, 3, 120.0), UnreachableTorqueError);
  CHECK_THROWS(torque_to_current(-1.0, kPsi, kLqd, 3, 120.0));
}
