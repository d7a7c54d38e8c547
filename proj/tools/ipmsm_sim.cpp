// Command-line driver: run / sweep / validate / plot.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ipmsm/config.hpp"
#include "ipmsm/csv_log.hpp"
#include "ipmsm/errors.hpp"
#include "ipmsm/plots.hpp"
#include "ipmsm/scenario.hpp"
#include "ipmsm/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ipmsm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitConfig = 3;

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string torque_source;
  bool no_plots = false;
};

json load_document(const CommonOptions& opt) {
  json doc = opt.config.empty() ? json::object() : read_config_file(opt.config);
  if (opt.seed) set_dotted(doc, "simulation.seed", *opt.seed);
  return doc;
}

// --mode / --torque-source rewrite every MTPA segment (anything that is not i_d = 0).
void apply_overrides(RunConfig& cfg, const CommonOptions& opt) {
  std::optional<ControlMode> mode;
  std::optional<TorqueSource> source;
  if (!opt.mode.empty()) mode = parse_mode(opt.mode);
  if (!opt.torque_source.empty()) source = parse_torque_source(opt.torque_source);
  for (Segment& seg : cfg.timeline.segments) {
    if (mode && seg.mode != ControlMode::Id0) seg.mode = *mode;
    if (source) seg.torque_source = *source;
  }
}

json summary_json(const ScenarioResult& res) {
  json segs = json::array();
  for (const SegmentSummary& s : res.segments) {
    segs.push_back({{"t_start", s.t_start},
                    {"t_end", s.t_end},
                    {"i_s", s.i_s},
                    {"i_d", s.i_d},
                    {"i_q", s.i_q},
                    {"i_s_ref", s.i_s_ref},
                    {"p_cu", s.p_cu},
                    {"t_e", s.t_e},
                    {"omega_m", s.omega_m},
                    {"beta_es", s.beta},
                    {"speed_settling_time", std::isnan(s.speed_settling_time) ? json(nullptr)
                                                                              : json(s.speed_settling_time)}});
  }
  json out = {{"segments", segs}, {"ticks", res.log.size()}};
  if (!res.log.empty()) {
    const LogRecord& last = res.log.back();
    out["final"] = {{"psi_f_hat", last.psi_f_hat},
                    {"saliency_hat", last.saliency_hat},
                    {"i_base_pinned", last.i_base_pinned}};
  }
  return out;
}

void print_summary(const ScenarioResult& res) {
  std::printf("%-12s %9s %9s %9s %9s %10s %9s\n", "segment", "i_s", "i_d", "i_q", "T_e", "P_cu", "settle");
  for (const SegmentSummary& s : res.segments) {
    std::printf("%4.2f-%-7.2f %9.3f %9.3f %9.3f %9.3f %10.2f %9.4f\n", s.t_start, s.t_end, s.i_s, s.i_d, s.i_q, s.t_e,
                s.p_cu, s.speed_settling_time);
  }
  if (!res.log.empty()) {
    const LogRecord& last = res.log.back();
    std::printf("final estimates: psi_f=%.6f Wb  L_q-L_d=%.6f mH  i_base(pinned)=%.3f A\n", last.psi_f_hat,
                last.saliency_hat * 1e3, last.i_base_pinned);
  }
}

void write_run_outputs(const RunConfig& cfg, const ScenarioResult& res, const fs::path& dir, bool plots) {
  fs::create_directories(dir);
  export_csv(res.log, res.estimator_count, dir / "log.csv");
  std::ofstream(dir / "summary.json") << summary_json(res).dump(2) << '\n';
  std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  if (plots) emit_plots(res.log, cfg.sim.motor, dir);
}

int cmd_run(const CommonOptions& opt) {
  RunConfig cfg = run_config_from_json(load_document(opt));
  apply_overrides(cfg, opt);
  try {
    const ScenarioResult res = run_scenario(cfg.timeline, cfg.sim);
    write_run_outputs(cfg, res, opt.out, !opt.no_plots);
    print_summary(res);
    std::cout << "wrote " << (fs::path(opt.out) / "log.csv").string() << '\n';
  } catch (const ScenarioDivergence& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    fs::create_directories(opt.out);
    export_csv({e.record()}, e.record().est_psi_f.size(), fs::path(opt.out) / "divergence.csv");
    return kExitDivergence;
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opt, unsigned jobs) {
  const json doc = load_document(opt);
  const auto points = expand_sweep(doc);
  std::vector<RunConfig> configs;
  for (const auto& [label, pdoc] : points) {
    RunConfig cfg = run_config_from_json(pdoc);
    apply_overrides(cfg, opt);
    configs.push_back(std::move(cfg));
  }

  std::vector<int> status(configs.size(), kExitOk);
  std::vector<json> summaries(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const fs::path dir = fs::path(opt.out) / ("run_" + std::to_string(i));
      try {
        const ScenarioResult res = run_scenario(configs[i].timeline, configs[i].sim);
        write_run_outputs(configs[i], res, dir, !opt.no_plots);
        summaries[i] = summary_json(res);
      } catch (const ScenarioDivergence& e) {
        status[i] = kExitDivergence;
        summaries[i] = {{"error", e.what()}};
      }
      std::lock_guard lock(io);
      std::cout << "[" << i << "] " << (points[i].first.empty() ? "base" : points[i].first)
                << (status[i] == kExitOk ? " ok" : " diverged") << '\n';
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json index = json::array();
  int rc = kExitOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    index.push_back({{"run", i}, {"label", points[i].first}, {"status", status[i]}, {"summary", summaries[i]}});
    if (status[i] != kExitOk) rc = kExitDivergence;
  }
  fs::create_directories(opt.out);
  std::ofstream(fs::path(opt.out) / "sweep.json") << index.dump(2) << '\n';
  return rc;
}

int cmd_validate(const CommonOptions& opt) {
  RunConfig cfg = run_config_from_json(load_document(opt));
  apply_overrides(cfg, opt);
  const auto results = run_validation(cfg);
  bool all = true;
  for (const CheckResult& r : results) {
    std::printf("[%s] %s  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

int cmd_plot(const CommonOptions& opt, const std::string& csv) {
  const RunConfig cfg = run_config_from_json(load_document(opt));
  for (const auto& p : emit_plots_from_csv(csv, cfg.sim.motor, opt.out)) std::cout << "wrote " << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IPMSM MTPA simulation: i_d = 0, extremum seeking and DCEE strategies"};
  app.require_subcommand(1);

  CommonOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file (defaults are used for missing keys)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "seed for the measurement-noise hook");
    sub->add_option("--mode", opt.mode, "override MTPA strategy: id0 | es | dcee");
    sub->add_option("--torque-source", opt.torque_source, "override torque source: ideal | observed");
  };

  auto* run = app.add_subcommand("run", "run one scenario and write log.csv, summary.json and plots");
  add_common(run);
  run->add_flag("--no-plots", opt.no_plots, "skip SVG output");

  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "run the cartesian product of the config's \"sweep\" section");
  add_common(sweep);
  sweep->add_flag("--no-plots", opt.no_plots, "skip SVG output");
  sweep->add_option("--jobs", jobs, "parallel scenarios");

  auto* validate = app.add_subcommand("validate", "run the invariant self-checks");
  add_common(validate);

  std::string csv;
  auto* plot = app.add_subcommand("plot", "render SVG plots from a log CSV");
  add_common(plot);
  plot->add_option("csv", csv, "log.csv from a previous run")->required();

  auto* defaults = app.add_subcommand("defaults", "print the default config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*sweep) return cmd_sweep(opt, jobs);
    if (*validate) return cmd_validate(opt);
    if (*plot) return cmd_plot(opt, csv);
    if (*defaults) {
      std::cout << default_config_json().dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
