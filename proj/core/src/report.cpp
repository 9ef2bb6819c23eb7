#include "topemb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"

namespace topemb {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 52.0;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
      << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
      << "\" fill=\"#ffffff\"/>\n";
  if (!title.empty())
    out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop, y1 = kHeight - kBottom;
  out << "<g id=\"axes\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n"
      << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
      << fmt(y1 - y0) << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * t / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * t / 4.0;
    out << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(y1 + 16) << "\" text-anchor=\"middle\">"
        << label_number(xv) << "</text>\n";
    out << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\">"
        << label_number(yv) << "</text>\n";
  }
  out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << fmt((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt((y0 + y1) / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "</g>\n";
}

void draw_legend(std::ostringstream& out, const std::vector<std::string>& names) {
  if (names.empty()) return;
  out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double x = kWidth - kRight + 12;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(i);
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y - 8) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i % kPalette.size()] << "\"/>"
        << "<text x=\"" << fmt(x + 16) << "\" y=\"" << fmt(y + 1) << "\">" << escape(names[i]) << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

std::string svg_scatter(const ScatterPlot& plot) {
  if (plot.points.empty()) throw Error(ErrorCode::InvalidArgument, "scatter plot needs at least one point");
  if (!plot.groups.empty() && plot.groups.size() != plot.points.size())
    throw Error(ErrorCode::InvalidArgument, "scatter groups do not match points");
  double xlo = plot.points[0][0], xhi = xlo, ylo = plot.points[0][1], yhi = ylo;
  for (const auto& p : plot.points) {
    xlo = std::min(xlo, p[0]);
    xhi = std::max(xhi, p[0]);
    ylo = std::min(ylo, p[1]);
    yhi = std::max(yhi, p[1]);
  }
  const Frame f{padded(xlo, xhi), padded(ylo, yhi)};

  std::ostringstream out;
  open_svg(out, plot.title);
  draw_axes(out, f, plot.x_label, plot.y_label);
  if (!plot.segments.empty()) {
    out << "<g id=\"segments\" stroke=\"#555555\" stroke-opacity=\"0.5\" stroke-width=\"" << kSegmentStrokeWidth
        << "\">\n";
    for (const auto& [i, j] : plot.segments) {
      if (i >= plot.points.size() || j >= plot.points.size())
        throw Error(ErrorCode::InvalidArgument, "segment endpoint out of range");
      out << "<line x1=\"" << fmt(f.px(plot.points[i][0])) << "\" y1=\"" << fmt(f.py(plot.points[i][1]))
          << "\" x2=\"" << fmt(f.px(plot.points[j][0])) << "\" y2=\"" << fmt(f.py(plot.points[j][1])) << "\"/>\n";
    }
    out << "</g>\n";
  }
  const std::size_t n_groups = plot.groups.empty()
                                   ? 1
                                   : *std::max_element(plot.groups.begin(), plot.groups.end()) + 1;
  for (std::size_t g = 0; g < n_groups; ++g) {
    out << "<g class=\"group-" << g << "\" fill=\"" << kPalette[g % kPalette.size()] << "\" fill-opacity=\"0.8\">\n";
    for (std::size_t i = 0; i < plot.points.size(); ++i) {
      if (!plot.groups.empty() && plot.groups[i] != g) continue;
      out << "<circle cx=\"" << fmt(f.px(plot.points[i][0])) << "\" cy=\"" << fmt(f.py(plot.points[i][1]))
          << "\" r=\"" << fmt(plot.point_radius) << "\"/>\n";
    }
    out << "</g>\n";
  }
  draw_legend(out, plot.group_names);
  out << "</svg>\n";
  return out.str();
}

void emit_svg_scatter(const ScatterPlot& plot, const std::filesystem::path& path) {
  write_text_file(path, svg_scatter(plot));
}

std::string svg_spectrum_plot(std::span<const SpectrumReport> reports, const std::string& title) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "spectrum plot needs at least one report");
  std::size_t max_len = 1;
  double ylo = 0.0, yhi = 0.0;
  bool first = true;
  for (const auto& r : reports) {
    max_len = std::max(max_len, r.log10_sigma.size());
    for (double v : r.log10_sigma) {
      if (first) {
        ylo = yhi = v;
        first = false;
      }
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  const Frame f{padded(0.0, static_cast<double>(max_len - 1)), padded(ylo, yhi)};

  std::ostringstream out;
  open_svg(out, title);
  draw_axes(out, f, "index", "log10 singular value");
  std::vector<std::string> names;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    names.push_back(r.source.empty() ? "spectrum " + std::to_string(k) : r.source);
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[k % kPalette.size()]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < r.log10_sigma.size(); ++i) {
      if (i) out << ' ';
      out << fmt(f.px(static_cast<double>(i))) << ',' << fmt(f.py(r.log10_sigma[i]));
    }
    out << "\"/>\n";
  }
  draw_legend(out, names);
  out << "</svg>\n";
  return out.str();
}

void emit_spectrum_plot(std::span<const SpectrumReport> reports, const std::filesystem::path& path,
                        const std::string& title) {
  write_text_file(path, svg_spectrum_plot(reports, title));
}

std::string svg_correlation_plot(const ClusterAccuracyCorrelation& c) {
  ScatterPlot plot;
  for (const auto& row : c.rows) plot.points.push_back({row.auc, row.top1});
  if (plot.points.empty()) plot.points.push_back({0.0, 0.0});
  plot.title = "per-cluster AUC vs top-1 (r = " + label_number(c.pearson_r) + ")";
  plot.x_label = c.log_auc ? "AUC (log scale)" : "AUC";
  plot.y_label = "top-1 accuracy";
  plot.point_radius = 4.0;
  return svg_scatter(plot);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace topemb
