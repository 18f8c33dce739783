#pragma once

// Static SVG line plots built from CSV files.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "oscerr/estimator.hpp"

namespace oscerr {

struct PlotSeries {
  std::filesystem::path csv;
  std::string column;
  std::string label;
  bool dashed = false;
};

struct PlotStyle {
  std::string title;
  /// One panel per time range; an empty list means a single panel over all data.
  std::vector<std::pair<double, double>> panels;
  double width = 900;
  double panel_height = 300;
};

/// Draws the series against the "t" column of their CSVs. Series whose time
/// grid differs from the first one are linearly resampled; a warning is
/// returned for each of them.
std::vector<std::string> emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style,
                                   const std::filesystem::path& output);

/// Log-log plot of oscillation peaks with the fitted power law and its slope.
void emit_envelope_plot(const std::vector<Peak>& peaks, const EnvelopeFit& fit, const std::string& title,
                        const std::filesystem::path& output);

}  // namespace oscerr
