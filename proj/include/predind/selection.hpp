#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"

namespace predind {

using Point2 = std::array<double, 2>;

/// Axis-aligned box in projection coordinates, inclusive on all sides.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  Point2 center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  bool contains(double x, double y) const noexcept { return x0 <= x && x <= x1 && y0 <= y && y <= y1; }

  Box translated(double dx, double dy) const noexcept { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

  void validate() const {
    if (!(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1))) {
      throw Error(ErrorCode::InvalidInput, "box coordinates must be finite");
    }
    if (!(x0 < x1 && y0 < y1)) throw Error(ErrorCode::InvalidInput, "box requires x0 < x1 and y0 < y1");
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Closed polygon; containment uses the even-odd rule.
struct Lasso {
  std::vector<Point2> points;

  bool contains(double x, double y) const noexcept {
    bool inside = false;
    const std::size_t n = points.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& [xi, yi] = points[i];
      const auto& [xj, yj] = points[j];
      if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
    }
    return inside;
  }

  void validate() const {
    if (points.size() < 3) throw Error(ErrorCode::InvalidInput, "lasso needs at least 3 vertices");
    for (const auto& [x, y] : points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw Error(ErrorCode::InvalidInput, "lasso coordinates must be finite");
      }
    }
  }

  friend bool operator==(const Lasso&, const Lasso&) = default;
};

using Region = std::variant<Box, Lasso>;

inline void validate(const Region& region) {
  std::visit([](const auto& r) { r.validate(); }, region);
}

inline bool contains(const Region& region, double x, double y) {
  return std::visit([&](const auto& r) { return r.contains(x, y); }, region);
}

/// Rows whose projection point lies in the region.
inline Labels region_membership(const Region& region, const Dataset& ds) {
  validate(region);
  const Matrix& proj = ds.projection();
  Labels inside(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) inside[i] = contains(region, proj(i, 0), proj(i, 1)) ? 1 : 0;
  return inside;
}

namespace detail {

inline void require_split(const Labels& inside, const char* what) {
  const auto n_in = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 1));
  if (n_in == 0) throw Error(ErrorCode::EmptySelection, std::string(what) + " contains no points");
  if (n_in == inside.size()) {
    throw Error(ErrorCode::EmptySelection, std::string(what) + " leaves no background points");
  }
}

}  // namespace detail

/// Points inside the region against every other row.
inline LabeledSelection select(const Region& region, const Dataset& ds) {
  Labels inside = region_membership(region, ds);
  detail::require_split(inside, "selection");
  return LabeledSelection(std::move(inside));
}

enum class ContrastBackground {
  Pair,    // only rows in either region take part
  Global,  // each region against all other rows
};

struct ContrastSelection {
  /// Region P as positives.
  LabeledSelection first;
  /// Region B as positives.
  LabeledSelection second;
  /// Rows inside both regions; they are assigned to P.
  std::size_t ambiguous_count = 0;
};

inline ContrastSelection select_contrast(const Region& region_p, const Region& region_b, const Dataset& ds,
                                         ContrastBackground background = ContrastBackground::Pair) {
  const Labels in_p = region_membership(region_p, ds);
  Labels in_b = region_membership(region_b, ds);
  std::size_t ambiguous = 0;
  for (std::size_t i = 0; i < in_b.size(); ++i) {
    if (in_b[i] && in_p[i]) {
      in_b[i] = 0;
      ++ambiguous;
    }
  }
  if (std::count(in_p.begin(), in_p.end(), 1) == 0) {
    throw Error(ErrorCode::EmptySelection, "first region contains no points");
  }
  if (std::count(in_b.begin(), in_b.end(), 1) == 0) {
    throw Error(ErrorCode::EmptySelection, "second region contains no points of its own");
  }

  if (background == ContrastBackground::Global) {
    detail::require_split(in_p, "first region");
    detail::require_split(in_b, "second region");
    return {LabeledSelection(in_p), LabeledSelection(in_b), ambiguous};
  }

  std::vector<std::size_t> rows;
  Labels first;
  Labels second;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (!in_p[i] && !in_b[i]) continue;
    rows.push_back(i);
    first.push_back(in_p[i]);
    second.push_back(in_b[i]);
  }
  return {LabeledSelection(std::move(first), rows), LabeledSelection(std::move(second), rows), ambiguous};
}

/// A box dragged along a polyline. Waypoints are offsets of the box centroid
/// from its starting position.
struct DragPath {
  Box start;
  std::vector<Point2> waypoints;

  double length() const noexcept {
    double total = 0.0;
    Point2 prev{0.0, 0.0};
    for (const auto& w : waypoints) {
      total += std::hypot(w[0] - prev[0], w[1] - prev[1]);
      prev = w;
    }
    return total;
  }

  /// Centroid offset after travelling `s` along the path.
  Point2 offset_at(double s) const noexcept {
    Point2 prev{0.0, 0.0};
    for (const auto& w : waypoints) {
      const double seg = std::hypot(w[0] - prev[0], w[1] - prev[1]);
      if (seg > 0.0 && s <= seg) {
        const double u = s / seg;
        return {prev[0] + u * (w[0] - prev[0]), prev[1] + u * (w[1] - prev[1])};
      }
      s -= seg;
      prev = w;
    }
    return prev;
  }

  void validate() const {
    start.validate();
    for (const auto& [dx, dy] : waypoints) {
      if (!std::isfinite(dx) || !std::isfinite(dy)) {
        throw Error(ErrorCode::InvalidInput, "drag waypoints must be finite");
      }
    }
    if (!(length() > 0.0)) throw Error(ErrorCode::InvalidInput, "drag path has zero length");
  }
};

struct BrushSequence {
  std::vector<LabeledSelection> steps;
  std::vector<Box> step_regions;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return steps.size(); }
};

inline constexpr std::size_t kMaxBrushSteps = 32;

/// Arc-length positions at which the dragged box is sampled: every half of the
/// box's shorter side, plus the end of the path. More than kMaxBrushSteps
/// positions are replaced by kMaxBrushSteps uniformly spaced ones.
inline std::vector<double> drag_sample_positions(const DragPath& path) {
  path.validate();
  const double len = path.length();
  const double stride = 0.5 * std::min(path.start.width(), path.start.height());
  const double slack = 1e-9 * std::max(len, stride);

  std::vector<double> positions;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * stride;
    if (s >= len - slack) break;
    positions.push_back(s);
  }
  positions.push_back(len);

  if (positions.size() > kMaxBrushSteps) {
    positions.clear();
    for (std::size_t k = 0; k < kMaxBrushSteps; ++k) {
      positions.push_back(len * static_cast<double>(k) / static_cast<double>(kMaxBrushSteps - 1));
    }
  }
  return positions;
}

inline BrushSequence discretize_drag(const DragPath& path, const Dataset& ds) {
  BrushSequence seq;
  const auto positions = drag_sample_positions(path);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto [dx, dy] = path.offset_at(positions[k]);
    const Box box = path.start.translated(dx, dy);
    Labels inside = region_membership(box, ds);
    const auto n_in = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 1));
    if (n_in == 0) {
      seq.warnings.push_back("dropped step " + std::to_string(k) + ": no points inside");
      continue;
    }
    if (n_in == ds.n_rows()) {
      seq.warnings.push_back("dropped step " + std::to_string(k) + ": no background points");
      continue;
    }
    seq.steps.emplace_back(std::move(inside));
    seq.step_regions.push_back(box);
  }
  if (seq.steps.empty()) throw Error(ErrorCode::EmptySelection, "every drag step is empty");
  if (seq.steps.size() < 2) {
    throw Error(ErrorCode::EmptySelection, "drag yields fewer than two usable steps");
  }
  return seq;
}

}  // namespace predind
