#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ipmsm/config.hpp"
#include "ipmsm/csv_log.hpp"
#include "ipmsm/errors.hpp"
#include "ipmsm/plots.hpp"
#include "ipmsm/scenario.hpp"

using namespace ipmsm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ipmsm_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<LogRecord> synthetic_log(std::size_t n, std::size_t estimators) {
  std::vector<LogRecord> log(n);
  for (std::size_t k = 0; k < n; ++k) {
    LogRecord& r = log[k];
    r.t = static_cast<double>(k) * 1e-4;
    r.mode = k % 3 == 0 ? ControlMode::Dcee : ControlMode::ExtremumSeeking;
    r.omega_m = 314.159265358979 * std::sin(1e-3 * k);
    r.i_d = -23.123456789012 + 1e-7 * k;
    r.i_q = 54.2 / (1.0 + k);
    r.t_e = 1.0 / 3.0;
    r.psi_f_hat = 0.12 + 1e-11 * k;
    r.saliency_hat = 1.2e-3 * (1.0 + 1e-9 * k);
    r.u_saturated = k % 2 == 1;
    r.cost = 1e-300;
    for (std::size_t j = 0; j < estimators; ++j) {
      r.est_psi_f.push_back(0.1 * j + 1e-10 * k);
      r.est_saliency.push_back(1e-3 * j);
      r.est_p_eig_min.push_back(1e-12 * (j + 1));
      r.est_p_eig_max.push_back(1.0 + j);
    }
  }
  return log;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("empty log gives a header-only file") {
  std::ostringstream os;
  write_csv(os, {}, 3);
  const std::string s = os.str();
  CHECK(count_lines(s) == 1);
  CHECK(s.back() == '\n');
  CHECK(s.rfind("t,mode,torque_source,omega_m", 0) == 0);
  CHECK(s.find("psi_f_hat_2") != std::string::npos);
  CHECK(s.find("psi_f_hat_3") == std::string::npos);
}

TEST_CASE("column set") {
  const auto cols = log_columns(2);
  for (const char* c : {"t", "omega_m", "omega_ref", "T_e", "T_L", "T_e1_source", "i_d", "i_q", "i_s", "u_d", "u_q",
                        "i_d_ref", "i_q_ref", "beta", "D", "exploration", "psi_f_hat", "saliency_hat", "P_cu",
                        "psi_f_hat_0", "saliency_hat_1", "p_eig_min_0", "p_eig_max_1"}) {
    CAPTURE(c);
    CHECK(std::find(cols.begin(), cols.end(), c) != cols.end());
  }
}

TEST_CASE("10,000 ticks give 10,001 lines") {
  std::ostringstream os;
  write_csv(os, synthetic_log(10000, 2), 2);
  CHECK(count_lines(os.str()) == 10001);
}

TEST_CASE("write-read round trip") {
  const auto log = synthetic_log(500, 3);
  const fs::path dir = scratch("roundtrip");
  export_csv(log, 3, dir / "log.csv");
  const CsvTable table = CsvTable::read(dir / "log.csv");
  REQUIRE(table.rows() == 500);
  auto close = [](double a, double b) { return a == b || std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
  const auto t = table.numbers("t");
  const auto w = table.numbers("omega_m");
  const auto i_d = table.numbers("i_d");
  const auto i_q = table.numbers("i_q");
  const auto te = table.numbers("T_e");
  const auto psi = table.numbers("psi_f_hat");
  const auto sal = table.numbers("saliency_hat");
  const auto e2 = table.numbers("psi_f_hat_2");
  const auto pmin = table.numbers("p_eig_min_0");
  const auto cost = table.numbers("D");
  bool ok = true;
  for (std::size_t k = 0; k < log.size(); ++k) {
    ok = ok && close(t[k], log[k].t) && close(w[k], log[k].omega_m) && close(i_d[k], log[k].i_d) &&
         close(i_q[k], log[k].i_q) && close(te[k], log[k].t_e) && close(psi[k], log[k].psi_f_hat) &&
         close(sal[k], log[k].saliency_hat) && close(e2[k], log[k].est_psi_f[2]) &&
         close(pmin[k], log[k].est_p_eig_min[0]) && close(cost[k], log[k].cost);
  }
  CHECK(ok);
  CHECK(table.cell(0, table.column("mode")) == "dcee");
  CHECK(table.cell(1, table.column("mode")) == "es");
  CHECK(table.number(1, table.column("u_saturated")) == 1.0);
  CHECK_THROWS_AS(table.column("nope"), std::out_of_range);
}

TEST_CASE("I/O errors name the path") {
  const fs::path bad = fs::path("/nonexistent_dir_for_test") / "log.csv";
  try {
    export_csv({}, 1, bad);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
  }
  CHECK_THROWS_AS(CsvTable::read(bad), std::runtime_error);
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(CsvTable::parse(ragged), std::runtime_error);
}

TEST_CASE("scenario CSV is byte-identical on rerun") {
  const ScenarioTimeline t{{{0.0, 0.05, 3000.0, 0.0, ControlMode::Id0, TorqueSource::Ideal},
                            {0.05, 0.1, 3000.0, 20.0, ControlMode::Dcee, TorqueSource::Observed}}};
  const fs::path dir = scratch("determinism");
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto r = run_scenario(t, SimulationConfig{});
    export_csv(r.log, r.estimator_count, dir / name);
  }
  std::ifstream a(dir / "a.csv", std::ios::binary), b(dir / "b.csv", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa.size() > 1000);
  CHECK(sa == sb);
}

TEST_CASE("defaults round-trip through JSON") {
  const json d = default_config_json();
  const RunConfig cfg = run_config_from_json(d);
  CHECK(to_json(cfg) == d);
  CHECK(cfg.sim.motor.l_q == 2.0e-3);
  CHECK(cfg.sim.dcee.k_x == 0.2);
  CHECK(cfg.sim.bank.count == 5);
  CHECK(cfg.sim.es.k_int == 200.0);
  CHECK(cfg.sim.observer.tau_f == 0.5e-3);
  CHECK(cfg.sim.load_ramp == 0.01);
  CHECK(cfg.timeline.segments.size() == 5);
}

TEST_CASE("partial overrides and nominal defaulting") {
  const RunConfig cfg = run_config_from_json(json::parse(R"({"motor": {"psi_f": 0.1}, "dcee": {"k_x": 0.5}})"));
  CHECK(cfg.sim.motor.psi_f == 0.1);
  CHECK(cfg.sim.nominal.psi_f == 0.1);
  CHECK(cfg.sim.dcee.k_x == 0.5);
  CHECK(cfg.sim.dcee.delta_x == 0.1);
  const RunConfig sep =
      run_config_from_json(json::parse(R"({"motor": {"psi_f": 0.1}, "nominal": {"psi_f": 0.11}})"));
  CHECK(sep.sim.nominal.psi_f == 0.11);
  const RunConfig tl = run_config_from_json(json::parse(
      R"({"timeline": [{"t_start": 0, "t_end": 0.1, "speed_rpm": 1000, "load": 5, "mode": "es", "torque_source": "observed"}]})"));
  REQUIRE(tl.timeline.segments.size() == 1);
  CHECK(tl.timeline.segments[0].mode == ControlMode::ExtremumSeeking);
  CHECK(tl.timeline.segments[0].torque_source == TorqueSource::Observed);
}

TEST_CASE("bad configs are rejected") {
  for (const char* text : {R"({"dcee": {"kx": 0.2}})", R"({"nonsense": 1})", R"({"dcee": {"k_x": "fast"}})",
                           R"({"dcee": {"k_x": -1}})", R"({"bank": {"lambda": 1.5}})", R"({"bank": {"p0": [1]}})",
                           R"({"es": {"f_inj": 3000}})", R"({"timeline": [{"t_start": 0, "t_end": 0.1}]})",
                           R"({"timeline": [{"t_start": 0, "t_end": 0.1, "speed_rpm": 1, "load": 0, "mode": "foc"}]})",
                           R"([1, 2])"}) {
    CAPTURE(text);
    CHECK_THROWS_AS(run_config_from_json(json::parse(text)), ConfigError);
  }
  CHECK_THROWS_AS(read_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("sweep expansion") {
  json doc = json::parse(R"({"dcee": {"k_x": 0.3}, "sweep": {"dcee.k_x": [0.1, 0.2], "bank.count": [3, 5, 7]}})");
  const auto points = expand_sweep(doc);
  REQUIRE(points.size() == 6);
  for (const auto& [label, d] : points) {
    CHECK_FALSE(d.contains("sweep"));
    CHECK(label.find("dcee.k_x=") != std::string::npos);
    CHECK(label.find("bank.count=") != std::string::npos);
    CHECK_NOTHROW(run_config_from_json(d));
  }
  CHECK(run_config_from_json(points.back().second).sim.bank.count == 7);
  json bad = json::parse(R"({"sweep": {"dcee.k_x": 0.1}})");
  CHECK_THROWS_AS(expand_sweep(bad), ConfigError);
  json e;
  set_dotted(e, "a.b.c", 3);
  CHECK(e["a"]["b"]["c"] == 3);
}

TEST_CASE("plots") {
  const fs::path dir = scratch("plots");
  const auto one = synthetic_log(1, 2);
  const auto files = emit_plots(one, MotorParams{}, dir);
  REQUIRE(files.size() == 2);
  for (const auto& f : files) {
    std::ifstream is(f);
    const std::string s((std::istreambuf_iterator<char>(is)), {});
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("nan") == std::string::npos);
  }
  CHECK_THROWS_AS(emit_plots({}, MotorParams{}, dir), std::invalid_argument);

  export_csv(synthetic_log(300, 2), 2, dir / "log.csv");
  const auto again = emit_plots_from_csv(dir / "log.csv", MotorParams{}, dir / "from_csv");
  CHECK(again.size() == 2);
  CHECK(fs::exists(dir / "from_csv" / "trajectory.svg"));
}
