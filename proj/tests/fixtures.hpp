#pragma once

// Synthetic datasets shared by the unit and acceptance suites.

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/ingest.hpp"
#include "predind/selection.hpp"

namespace predind::support {

inline std::vector<std::string> dim_names(std::size_t m, const std::string& prefix = "d") {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

inline Matrix uniform_matrix(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix v(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) v(i, j) = unit(rng);
  }
  return v;
}

/// Uniform points; positives are those inside a box on two dimensions whose
/// bounds are given in normalized units. The projection is the pair of
/// planted dimensions, so a projection box reproduces the labels.
struct PlantedBox {
  Dataset ds;
  Labels labels;
  std::array<std::size_t, 2> dims{2, 7};
  double lo = 0.3;
  double hi = 0.6;

  /// The planted box expressed as a projection-space region.
  Box projection_box() const {
    const Extent& ex = ds.extent(dims[0]);
    const Extent& ey = ds.extent(dims[1]);
    return {ex.min + lo * ex.width(), ey.min + lo * ey.width(), ex.min + hi * ex.width(),
            ey.min + hi * ey.width()};
  }
};

inline PlantedBox planted_box(std::uint64_t seed = 0, std::size_t n = 1000, std::size_t m = 10) {
  if (m < 8) throw std::invalid_argument("planted_box needs at least 8 dimensions");
  Matrix v = uniform_matrix(n, m, seed);
  const std::array<std::size_t, 2> dims{2, 7};
  Matrix proj(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    proj(i, 0) = v(i, dims[0]);
    proj(i, 1) = v(i, dims[1]);
  }
  Dataset ds(dim_names(m), std::move(v), std::move(proj));
  const Box box = PlantedBox{ds, {}, dims}.projection_box();
  Labels labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = box.contains(ds.projection()(i, 0), ds.projection()(i, 1)) ? 1 : 0;
  }
  return {std::move(ds), std::move(labels), dims};
}

/// CSV with the dimension columns followed by projection columns x, y.
/// Values are written with round-trip precision.
inline std::string to_csv(const Dataset& ds) {
  std::string out;
  for (const auto& name : ds.dim_names()) out += name + ",";
  out += "x,y\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_dims(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", ds.value(i, j));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g,", ds.projection()(i, 0));
    out += buf;
    std::snprintf(buf, sizeof buf, "%.17g\n", ds.projection()(i, 1));
    out += buf;
  }
  return out;
}

/// Ten boxes on dims (0, 1) whose first-dimension window slides by 0.05 per step.
inline std::vector<LabeledSelection> sliding_boxes(const Dataset& ds, const NormalizedView& view,
                                                   std::size_t steps = 10) {
  std::vector<LabeledSelection> out;
  for (std::size_t t = 0; t < steps; ++t) {
    const double lo0 = 0.2 + 0.05 * static_cast<double>(t);
    Labels y(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double u0 = view.values()(i, 0);
      const double u1 = view.values()(i, 1);
      y[i] = (lo0 <= u0 && u0 <= lo0 + 0.3 && 0.3 <= u1 && u1 <= 0.6) ? 1 : 0;
    }
    out.emplace_back(std::move(y));
  }
  return out;
}

}  // namespace predind::support
