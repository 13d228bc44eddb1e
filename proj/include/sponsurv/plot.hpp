#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sponsurv/life_table.hpp>
#include <sponsurv/report.hpp>

namespace sponsurv {

// Standalone SVG documents; no timestamps or external references, so output
// is byte-identical for identical inputs.
namespace svg {

struct Panel {
  double x0 = 0, y0 = 0, width = 400, height = 300;
  double margin_left = 52, margin_bottom = 36, margin_top = 28, margin_right = 14;

  double plot_width() const { return width - margin_left - margin_right; }
  double plot_height() const { return height - margin_top - margin_bottom; }
  double px(double t, double tmax) const {
    return x0 + margin_left + (tmax > 0 ? t / tmax : 0.0) * plot_width();
  }
  double py(double v, double vmax) const {
    return y0 + height - margin_bottom - (vmax > 0 ? v / vmax : 0.0) * plot_height();
  }
};

inline std::string coord(double v) { return fmt::fixed(v, 2); }

inline void draw_frame(std::ostringstream& out, const Panel& p,
                       const std::string& title, double tmax, double vmax) {
  out << "<rect x=\"" << coord(p.x0 + p.margin_left) << "\" y=\""
      << coord(p.y0 + p.margin_top) << "\" width=\"" << coord(p.plot_width())
      << "\" height=\"" << coord(p.plot_height())
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << coord(p.x0 + p.width / 2) << "\" y=\""
      << coord(p.y0 + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << title << "</text>\n";
  // x ticks at 0, half, max; y ticks at 0, half, max
  for (double frac : {0.0, 0.5, 1.0}) {
    const double t = frac * tmax;
    out << "<text x=\"" << coord(p.px(t, tmax)) << "\" y=\""
        << coord(p.y0 + p.height - p.margin_bottom + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt::fixed(t, 0) << "</text>\n";
    const double v = frac * vmax;
    out << "<text x=\"" << coord(p.x0 + p.margin_left - 6) << "\" y=\""
        << coord(p.py(v, vmax) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt::fixed(v, 2) << "</text>\n";
  }
}

inline void draw_polyline(std::ostringstream& out, const Panel& p,
                          const std::vector<std::pair<double, double>>& points,
                          double tmax, double vmax, const std::string& color) {
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out << ' ';
    out << coord(p.px(points[i].first, tmax)) << ','
        << coord(p.py(points[i].second, vmax));
  }
  out << "\"/>\n";
}

}  // namespace svg

/// Two-panel figure: kernel-smoothed hazard on the left, survivor function on
/// the right.
inline std::string svg_life_table_curves(const LifeTable& table, int bandwidth) {
  const auto smoothed = smoothed_hazard(table, bandwidth);
  const double tmax = static_cast<double>(table.rows.back().period);
  double hmax = 0.0;
  for (const auto& [period, value] : smoothed) hmax = std::max(hmax, value);
  for (const auto& row : table.rows) hmax = std::max(hmax, row.hazard);
  if (hmax <= 0.0) hmax = 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"320\" "
         "viewBox=\"0 0 820 320\">\n";
  out << "<rect width=\"820\" height=\"320\" fill=\"white\"/>\n";

  svg::Panel left;
  left.x0 = 0;
  svg::draw_frame(out, left, "Smoothed hazard", tmax, hmax);
  std::vector<std::pair<double, double>> raw, smooth_pts;
  for (const auto& row : table.rows) {
    raw.emplace_back(row.period, row.hazard);
  }
  for (const auto& [period, value] : smoothed) {
    smooth_pts.emplace_back(period, value);
  }
  svg::draw_polyline(out, left, raw, tmax, hmax, "#bbbbbb");
  svg::draw_polyline(out, left, smooth_pts, tmax, hmax, "#1f77b4");

  svg::Panel right;
  right.x0 = 410;
  svg::draw_frame(out, right, "Survivor function", tmax, 1.0);
  std::vector<std::pair<double, double>> surv{{0.0, 1.0}};
  for (const auto& row : table.rows) {
    surv.emplace_back(row.period, row.survivor);
  }
  svg::draw_polyline(out, right, surv, tmax, 1.0, "#d62728");

  out << "</svg>\n";
  return out.str();
}

/// Single survival curve for one forecast profile.
inline std::string svg_survival_curve(const SurvivorCurve& curve,
                                      const std::string& title) {
  const double tmax = static_cast<double>(curve.max_period());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"320\" "
         "viewBox=\"0 0 420 320\">\n";
  out << "<rect width=\"420\" height=\"320\" fill=\"white\"/>\n";
  svg::Panel panel;
  svg::draw_frame(out, panel, title.empty() ? "Survival profile" : title, tmax, 1.0);
  std::vector<std::pair<double, double>> points;
  for (int t = 0; t <= curve.max_period(); ++t) {
    points.emplace_back(t, curve.at(t));
  }
  svg::draw_polyline(out, panel, points, tmax, 1.0, "#1f77b4");
  out << "</svg>\n";
  return out.str();
}

}  // namespace sponsurv
