#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ipmsm/scenario.hpp"

namespace ipmsm {

/// Column names for a log produced with `estimator_count` estimators.
std::vector<std::string> log_columns(std::size_t estimator_count);

/// Header plus one row per record, 12 significant digits, '\n' line ends.
void write_csv(std::ostream& os, const std::vector<LogRecord>& log, std::size_t estimator_count);

/// Throws std::runtime_error naming the path on I/O failure.
void export_csv(const std::vector<LogRecord>& log, std::size_t estimator_count,
                const std::filesystem::path& path);

/// A parsed CSV file: header plus rows of raw cells.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::istream& is);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  /// Index of a column; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  double number(std::size_t row, std::size_t col) const;
  std::vector<double> numbers(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ipmsm
