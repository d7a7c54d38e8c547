#include "ipmsm/csv_log.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ipmsm {

namespace {

const std::vector<std::string> kFixedColumns = {
    "t",          "mode",         "torque_source", "omega_m",     "omega_ref",  "T_e",
    "T_L",        "T_e_obs",      "T_e1_source",   "T_e1_hat",    "i_d",        "i_q",
    "i_s",        "i_s_ref",      "i_s_mtpa",      "u_d",         "u_q",        "u_saturated",
    "i_d_ref",    "i_q_ref",      "beta",          "beta_meas",   "es_gradient", "injection",
    "D",          "exploitation", "exploration",   "grad_d",      "grad_q",     "r_mean_d",
    "r_mean_q",   "psi_f_hat",    "saliency_hat",  "i_base_pinned", "psi_d_obs", "psi_q_obs",
    "obs_valid",  "P_cu",
};

void put(std::string& line, double v) {
  if (std::isnan(v)) {
    line += "nan";
    return;
  }
  if (std::isinf(v)) {
    line += v > 0 ? "inf" : "-inf";
    return;
  }
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  line.append(buf, res.ptr);
}

}  // namespace

std::vector<std::string> log_columns(std::size_t n) {
  std::vector<std::string> cols = kFixedColumns;
  for (const char* prefix : {"psi_f_hat_", "saliency_hat_", "p_eig_min_", "p_eig_max_"}) {
    for (std::size_t j = 0; j < n; ++j) cols.push_back(prefix + std::to_string(j));
  }
  return cols;
}

void write_csv(std::ostream& os, const std::vector<LogRecord>& log, std::size_t n) {
  const auto cols = log_columns(n);
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  line += '\n';
  os << line;

  for (const LogRecord& r : log) {
    line.clear();
    auto num = [&](double v) {
      line += ',';
      put(line, v);
    };
    put(line, r.t);
    line += ',';
    line += to_string(r.mode);
    line += ',';
    line += to_string(r.torque_source);
    for (double v : {r.omega_m, r.omega_ref, r.t_e, r.t_l, r.t_e_obs, r.t_e1_source, r.t_e1_hat,
                     r.i_d, r.i_q, r.i_s, r.i_s_ref, r.i_s_mtpa, r.u_d, r.u_q}) {
      num(v);
    }
    line += r.u_saturated ? ",1" : ",0";
    for (double v : {r.i_d_ref, r.i_q_ref, r.beta, r.beta_meas, r.es_gradient, r.injection, r.cost,
                     r.exploitation, r.exploration, r.grad_d, r.grad_q, r.r_mean_d, r.r_mean_q,
                     r.psi_f_hat, r.saliency_hat, r.i_base_pinned, r.psi_d_obs, r.psi_q_obs}) {
      num(v);
    }
    line += r.obs_valid ? ",1" : ",0";
    num(r.p_cu);
    for (const auto* vec : {&r.est_psi_f, &r.est_saliency, &r.est_p_eig_min, &r.est_p_eig_max}) {
      for (std::size_t j = 0; j < n; ++j) num(j < vec->size() ? (*vec)[j] : std::nan(""));
    }
    line += '\n';
    os << line;
  }
}

void export_csv(const std::vector<LogRecord>& log, std::size_t n, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(os, log, n);
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  try {
    return parse(is);
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

CsvTable CsvTable::parse(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV (no header)");
  table.header_ = split(line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header_.size()) {
      throw std::runtime_error("line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(table.header_.size()));
    }
    table.rows_.push_back(std::move(cells));
  }
  return table;
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw std::out_of_range("no column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("cell '" + s + "' is not a number");
  return v;
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t col = column(name);
  std::vector<double> out(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) out[r] = number(r, col);
  return out;
}

}  // namespace ipmsm
