#include "ipmsm/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ipmsm/csv_log.hpp"
#include "ipmsm/mtpa.hpp"

namespace ipmsm {

namespace {

constexpr int kMaxPoints = 4000;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = 0.04 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

Series thin(Series s) {
  if (s.x.size() <= static_cast<std::size_t>(kMaxPoints)) return s;
  const std::size_t stride = (s.x.size() + kMaxPoints - 1) / kMaxPoints;
  Series out{s.label, {}, {}, s.color};
  for (std::size_t i = 0; i < s.x.size(); i += stride) {
    out.x.push_back(s.x[i]);
    out.y.push_back(s.y[i]);
  }
  out.x.push_back(s.x.back());
  out.y.push_back(s.y.back());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

/// Column view shared by the record and CSV entry points.
struct Columns {
  std::vector<double> t, omega_m, omega_ref, t_e, t_l, t_e_obs, i_d, i_q, i_s, i_d_ref, i_q_ref, psi_f_hat,
      saliency_hat, beta, beta_meas;
  std::vector<std::vector<double>> est_psi_f, est_saliency;
};

std::vector<std::filesystem::path> emit(const Columns& c, const MotorParams& p,
                                        const std::filesystem::path& out_dir) {
  if (c.t.empty()) throw std::invalid_argument("cannot plot an empty log");
  std::filesystem::create_directories(out_dir);

  auto rpm = [](std::vector<double> v) {
    for (double& x : v) x = rad_per_s_to_rpm(x);
    return v;
  };
  auto scaled = [](std::vector<double> v, double k) {
    for (double& x : v) x *= k;
    return v;
  };

  std::vector<Panel> panels;
  panels.push_back({"Speed", "t (s)", "r/min",
                    {{"n", c.t, rpm(c.omega_m), ""}, {"n*", c.t, rpm(c.omega_ref), ""}}});
  panels.push_back({"Torque", "t (s)", "N·m",
                    {{"T_e", c.t, c.t_e, ""}, {"T_L", c.t, c.t_l, ""}, {"T_e observed", c.t, c.t_e_obs, ""}}});
  panels.push_back({"dq currents", "t (s)", "A",
                    {{"i_d", c.t, c.i_d, ""},
                     {"i_q", c.t, c.i_q, ""},
                     {"i_s", c.t, c.i_s, ""},
                     {"i_d*", c.t, c.i_d_ref, ""},
                     {"i_q*", c.t, c.i_q_ref, ""}}});
  panels.push_back({"Current angle", "t (s)", "rad",
                    {{"beta (measured)", c.t, c.beta_meas, ""}, {"beta (ES state)", c.t, c.beta, ""}}});
  Panel psi{"Flux linkage estimate", "t (s)", "Wb", {{"mean", c.t, c.psi_f_hat, ""}}};
  Panel sal{"Saliency estimate L_q - L_d", "t (s)", "mH", {{"mean", c.t, scaled(c.saliency_hat, 1e3), ""}}};
  for (std::size_t j = 0; j < c.est_psi_f.size(); ++j) {
    psi.series.push_back({"est " + std::to_string(j), c.t, c.est_psi_f[j], ""});
    sal.series.push_back({"est " + std::to_string(j), c.t, scaled(c.est_saliency[j], 1e3), ""});
  }
  panels.push_back(std::move(psi));
  panels.push_back(std::move(sal));

  // Current plane: MTPA curve and constant-torque contours from the true parameters.
  Panel plane{"Current vector trajectory", "i_d (A)", "i_q (A)", {}};
  double i_max = 1.0;
  for (std::size_t i = 0; i < c.i_s.size(); ++i) {
    if (std::isfinite(c.i_s[i])) i_max = std::max(i_max, c.i_s[i]);
  }
  i_max = std::min(std::max(i_max * 1.1, 10.0), 1.5 * p.i_s_max);
  Series curve{"MTPA", {}, {}, "#000000"};
  for (int k = 0; k <= 200; ++k) {
    const MtpaPoint pt = mtpa_point(i_max * k / 200.0, p.psi_f, p.saliency());
    curve.x.push_back(pt.i_d_ref);
    curve.y.push_back(pt.i_q_ref);
  }
  const double i_d_min = curve.x.back() * 2.0 - 1.0;
  plane.series.push_back(curve);
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    const double torque = frac * p.rated_torque;
    Series iso{"T = " + fmt(torque) + " N·m", {}, {}, "#bbbbbb"};
    for (int k = 0; k <= 100; ++k) {
      const double i_d = i_d_min * k / 100.0;
      const double i_q = torque / (1.5 * p.pole_pairs * (p.psi_f - p.saliency() * i_d));
      if (i_q > i_max) continue;
      iso.x.push_back(i_d);
      iso.y.push_back(i_q);
    }
    if (!iso.x.empty()) plane.series.push_back(iso);
  }
  plane.series.push_back({"trajectory", c.i_d, c.i_q, "#d62728"});

  const auto ts_path = out_dir / "timeseries.svg";
  const auto tr_path = out_dir / "trajectory.svg";
  write_file(ts_path, render_svg(panels));
  write_file(tr_path, render_svg({plane}, 700, 600));
  return {ts_path, tr_path};
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height) {
  const int left = 70, right = 170, top = 30, bottom = 40;
  const int height = static_cast<int>(panels.size()) * panel_height;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const Panel& panel = panels[pi];
    const int y0 = static_cast<int>(pi) * panel_height;
    const double pw = width - left - right;
    const double ph = panel_height - top - bottom;
    Range xr, yr;
    for (const Series& s : panel.series) {
      for (double v : s.x) xr.add(v);
      for (double v : s.y) yr.add(v);
    }
    xr.finish();
    yr.finish();
    auto sx = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double v) { return y0 + top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    os << "<text x=\"" << left << "\" y=\"" << y0 + 18 << "\" font-size=\"13\">" << escape(panel.title)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << y0 + top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
      const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
      os << "<text x=\"" << sx(xv) << "\" y=\"" << y0 + top + ph + 14 << "\" text-anchor=\"middle\">" << fmt(xv)
         << "</text>\n";
      os << "<text x=\"" << left - 5 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
         << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << y0 + panel_height - 8 << "\" text-anchor=\"middle\">"
       << escape(panel.x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << y0 + top + ph / 2 << "\" transform=\"rotate(-90 14 " << y0 + top + ph / 2
       << ")\" text-anchor=\"middle\">" << escape(panel.y_label) << "</text>\n";

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const Series s = thin(panel.series[si]);
      const std::string color = s.color.empty() ? kPalette[si % std::size(kPalette)] : s.color;
      if (s.x.size() == 1) {
        os << "<circle cx=\"" << sx(s.x[0]) << "\" cy=\"" << sy(s.y[0]) << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
      } else {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
          os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        }
        os << "\"/>\n";
      }
      const double ly = y0 + top + 12 + 14 * static_cast<double>(si);
      os << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << width - right + 30
         << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << width - right + 35 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(const std::vector<LogRecord>& log, const MotorParams& params,
                                              const std::filesystem::path& out_dir) {
  Columns c;
  const std::size_t n = log.empty() ? 0 : log.front().est_psi_f.size();
  c.est_psi_f.assign(n, {});
  c.est_saliency.assign(n, {});
  for (const LogRecord& r : log) {
    c.t.push_back(r.t);
    c.omega_m.push_back(r.omega_m);
    c.omega_ref.push_back(r.omega_ref);
    c.t_e.push_back(r.t_e);
    c.t_l.push_back(r.t_l);
    c.t_e_obs.push_back(r.t_e_obs);
    c.i_d.push_back(r.i_d);
    c.i_q.push_back(r.i_q);
    c.i_s.push_back(r.i_s);
    c.i_d_ref.push_back(r.i_d_ref);
    c.i_q_ref.push_back(r.i_q_ref);
    c.psi_f_hat.push_back(r.psi_f_hat);
    c.saliency_hat.push_back(r.saliency_hat);
    c.beta.push_back(r.beta);
    c.beta_meas.push_back(r.beta_meas);
    for (std::size_t j = 0; j < n && j < r.est_psi_f.size(); ++j) {
      c.est_psi_f[j].push_back(r.est_psi_f[j]);
      c.est_saliency[j].push_back(r.est_saliency[j]);
    }
  }
  return emit(c, params, out_dir);
}

std::vector<std::filesystem::path> emit_plots_from_csv(const std::filesystem::path& csv, const MotorParams& params,
                                                       const std::filesystem::path& out_dir) {
  const CsvTable table = CsvTable::read(csv);
  Columns c;
  c.t = table.numbers("t");
  c.omega_m = table.numbers("omega_m");
  c.omega_ref = table.numbers("omega_ref");
  c.t_e = table.numbers("T_e");
  c.t_l = table.numbers("T_L");
  c.t_e_obs = table.numbers("T_e_obs");
  c.i_d = table.numbers("i_d");
  c.i_q = table.numbers("i_q");
  c.i_s = table.numbers("i_s");
  c.i_d_ref = table.numbers("i_d_ref");
  c.i_q_ref = table.numbers("i_q_ref");
  c.psi_f_hat = table.numbers("psi_f_hat");
  c.saliency_hat = table.numbers("saliency_hat");
  c.beta = table.numbers("beta");
  c.beta_meas = table.numbers("beta_meas");
  for (std::size_t j = 0; table.has_column("psi_f_hat_" + std::to_string(j)); ++j) {
    c.est_psi_f.push_back(table.numbers("psi_f_hat_" + std::to_string(j)));
    c.est_saliency.push_back(table.numbers("saliency_hat_" + std::to_string(j)));
  }
  return emit(c, params, out_dir);
}

}  // namespace ipmsm
