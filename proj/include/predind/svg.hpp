#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "predind/data_model.hpp"

namespace predind {

constexpr const char* category_color(PointCategory c) noexcept {
  switch (c) {
    case PointCategory::TruePositive: return "#7b2cbf";   // purple
    case PointCategory::FalsePositive: return "#d62828";  // red
    case PointCategory::FalseNegative: return "#1d4ed8";  // blue
    case PointCategory::TrueNegative: return "#9ca3af";   // grey
  }
  return "#000000";
}

/// Static scatterplot of the projection. `categories[k]` colors row `rows[k]`
/// (or row k when `rows` is empty); uncategorized rows are drawn faint.
inline std::string projection_svg(const Dataset& ds, std::span<const PointCategory> categories,
                                  std::span<const std::size_t> rows = {}, int size = 640) {
  const Matrix& p = ds.projection();
  double x_lo = p(0, 0), x_hi = p(0, 0), y_lo = p(0, 1), y_hi = p(0, 1);
  for (std::size_t i = 1; i < ds.n_rows(); ++i) {
    x_lo = std::min(x_lo, p(i, 0));
    x_hi = std::max(x_hi, p(i, 0));
    y_lo = std::min(y_lo, p(i, 1));
    y_hi = std::max(y_hi, p(i, 1));
  }
  const double margin = 20.0;
  const double span = size - 2 * margin;
  const double sx = x_hi > x_lo ? span / (x_hi - x_lo) : 0.0;
  const double sy = y_hi > y_lo ? span / (y_hi - y_lo) : 0.0;

  std::vector<std::optional<PointCategory>> cat_of(ds.n_rows());
  for (std::size_t k = 0; k < categories.size(); ++k) {
    const std::size_t row = rows.empty() ? k : rows[k];
    if (row < cat_of.size()) cat_of[row] = categories[k];
  }

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                size, size, size, size);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Background rows first so categorized points stay visible; TN before the rest.
  auto draw = [&](std::size_t i, const char* color, double radius, double opacity) {
    const double cx = margin + (x_hi > x_lo ? (p(i, 0) - x_lo) * sx : 0.5 * span);
    const double cy = margin + span - (y_hi > y_lo ? (p(i, 1) - y_lo) * sy : 0.5 * span);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\" fill-opacity=\"%.2f\"/>\n",
                  cx, cy, radius, color, opacity);
    out += buf;
  };
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (!cat_of[i]) draw(i, "#e5e7eb", 2.0, 0.6);
  }
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (cat_of[i] == PointCategory::TrueNegative) draw(i, category_color(*cat_of[i]), 2.5, 0.7);
  }
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (cat_of[i] && *cat_of[i] != PointCategory::TrueNegative) draw(i, category_color(*cat_of[i]), 3.0, 0.9);
  }

  const PointCategory legend[] = {PointCategory::TruePositive, PointCategory::FalsePositive,
                                  PointCategory::FalseNegative, PointCategory::TrueNegative};
  for (int k = 0; k < 4; ++k) {
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"6\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                  "<text x=\"%d\" y=\"15\" font-size=\"11\" font-family=\"sans-serif\">%s</text>\n",
                  10 + 50 * k, category_color(legend[k]), 24 + 50 * k, std::string(to_string(legend[k])).c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace predind
