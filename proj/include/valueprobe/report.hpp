#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "valueprobe/svg.hpp"

namespace valueprobe {

// Bar chart of per-category totals.
inline std::string bar_chart_svg(std::string_view title, std::span<const std::string> labels,
                                 std::span<const long long> values,
                                 std::string_view manifest_ref = {}) {
  const double width = 640.0, height = 400.0;
  const double margin_left = 60.0, margin_right = 20.0, margin_top = 50.0, margin_bottom = 50.0;
  const double plot_w = width - margin_left - margin_right;
  const double plot_h = height - margin_top - margin_bottom;

  svg::Document doc(width, height);
  if (!manifest_ref.empty()) doc.comment(std::string("manifest: ") + std::string(manifest_ref));
  doc.text(width / 2.0, 25.0, title, 16.0, "middle");

  long long peak = 1;
  for (const long long v : values) peak = std::max(peak, v);

  doc.line(margin_left, margin_top, margin_left, margin_top + plot_h);
  doc.line(margin_left, margin_top + plot_h, margin_left + plot_w, margin_top + plot_h);
  for (int tick = 0; tick <= 4; ++tick) {
    const double frac = tick / 4.0;
    const double y = margin_top + plot_h * (1.0 - frac);
    doc.line(margin_left - 4.0, y, margin_left, y);
    doc.text(margin_left - 8.0, y + 4.0, std::to_string(static_cast<long long>(
                                             std::llround(frac * static_cast<double>(peak)))),
             10.0, "end");
  }

  const std::size_t n = labels.size();
  const double slot = plot_w / static_cast<double>(n == 0 ? 1 : n);
  const double bar_w = slot * 0.7;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = plot_h * static_cast<double>(values[i]) / static_cast<double>(peak);
    const double x = margin_left + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
    const double y = margin_top + plot_h - h;
    doc.rect(x, y, bar_w, h, "#4878a8");
    doc.text(x + bar_w / 2.0, margin_top + plot_h + 16.0, labels[i], 11.0, "middle");
    doc.text(x + bar_w / 2.0, y - 4.0, std::to_string(values[i]), 10.0, "middle");
  }
  return doc.render();
}

// Rotated MDS configuration against the theoretical circle: hollow markers
// for targets, filled for the fitted points, one connector per value.
inline std::string structure_scatter_svg(std::span<const std::string> labels,
                                         std::span<const std::pair<double, double>> rotated,
                                         std::span<const std::pair<double, double>> target,
                                         std::string_view manifest_ref = {}) {
  const double width = 520.0, height = 520.0;
  const double cx = width / 2.0, cy = height / 2.0;
  const double radius = 180.0;

  svg::Document doc(width, height);
  if (!manifest_ref.empty()) doc.comment(std::string("manifest: ") + std::string(manifest_ref));
  doc.text(cx, 25.0, "Value structure vs. theoretical circle", 16.0, "middle");

  // Data scale: fit the largest |coordinate| of either configuration.
  double extent = 1.0;
  for (const auto& [x, y] : rotated) extent = std::max({extent, std::fabs(x), std::fabs(y)});
  for (const auto& [x, y] : target) extent = std::max({extent, std::fabs(x), std::fabs(y)});
  const auto px = [&](double v) { return cx + radius * v / extent; };
  const auto py = [&](double v) { return cy - radius * v / extent; };

  doc.circle(cx, cy, radius / extent, "none", "#cccccc", 1.0);
  doc.line(cx - radius - 10.0, cy, cx + radius + 10.0, cy, "#eeeeee");
  doc.line(cx, cy - radius - 10.0, cx, cy + radius + 10.0, "#eeeeee");

  for (std::size_t i = 0; i < labels.size(); ++i) {
    doc.line(px(target[i].first), py(target[i].second), px(rotated[i].first),
             py(rotated[i].second), "#bbbbbb", 0.8);
    doc.circle(px(target[i].first), py(target[i].second), 5.0, "none", "#999999", 1.2);
    doc.circle(px(rotated[i].first), py(rotated[i].second), 4.0, "#c2503c");
    doc.text(px(rotated[i].first) + 7.0, py(rotated[i].second) - 5.0, labels[i], 11.0);
  }
  doc.circle(30.0, height - 30.0, 4.0, "#c2503c");
  doc.text(40.0, height - 26.0, "observed (rotated)", 11.0);
  doc.circle(180.0, height - 30.0, 5.0, "none", "#999999", 1.2);
  doc.text(190.0, height - 26.0, "theoretical target", 11.0);
  return doc.render();
}

}  // namespace valueprobe
