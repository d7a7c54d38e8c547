#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipmsm/motor_params.hpp"
#include "ipmsm/scenario.hpp"

namespace ipmsm {

/// A named polyline.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
};

/// One axes box.
struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Renders panels stacked vertically into an SVG document.
std::string render_svg(const std::vector<Panel>& panels, int width = 900, int panel_height = 220);

/// Writes timeseries.svg (speed, torque, currents, estimates) and
/// trajectory.svg (current plane with MTPA curve and constant-torque contours)
/// into out_dir. Throws std::invalid_argument on an empty log and
/// std::runtime_error on I/O failure. Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::vector<LogRecord>& log, const MotorParams& params,
                                              const std::filesystem::path& out_dir);

/// Same plots from a CSV produced by export_csv.
std::vector<std::filesystem::path> emit_plots_from_csv(const std::filesystem::path& csv, const MotorParams& params,
                                                       const std::filesystem::path& out_dir);

}  // namespace ipmsm
