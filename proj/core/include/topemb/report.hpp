#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topemb/retrieval.hpp"
#include "topemb/spectra.hpp"

namespace topemb {

// Every pair segment is drawn with this width.
inline constexpr double kSegmentStrokeWidth = 0.6;

struct ScatterPlot {
  std::vector<std::array<double, 2>> points;
  std::vector<std::size_t> groups;       // per point, indexes group_names; empty: one group
  std::vector<std::string> group_names;  // legend entries
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  double point_radius = 2.0;
};

// Standalone SVG document. Byte output depends only on the input.
std::string svg_scatter(const ScatterPlot& plot);
void emit_svg_scatter(const ScatterPlot& plot, const std::filesystem::path& path);

// One polyline per report over (index, log10_sigma), legend by source.
std::string svg_spectrum_plot(std::span<const SpectrumReport> reports, const std::string& title = {});
void emit_spectrum_plot(std::span<const SpectrumReport> reports, const std::filesystem::path& path,
                        const std::string& title = {});

// Per-cluster AUC against top-1 accuracy, with r in the title.
std::string svg_correlation_plot(const ClusterAccuracyCorrelation& c);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace topemb
