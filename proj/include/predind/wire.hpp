#pragma once

// JSON wire formats. Predicates travel with dimension names and original-unit
// bounds; regions and drag paths use projection coordinates.

#include <json.hpp>

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/metrics.hpp"
#include "predind/regression.hpp"
#include "predind/rpi.hpp"
#include "predind/selection.hpp"

namespace predind::wire {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::InvalidInput, "missing field", std::string(key));
  return *it;
}

inline double number(const json& j, std::string_view key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorCode::InvalidInput, "field must be a number", std::string(key));
  return v.get<double>();
}

inline void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be a JSON object");
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, std::string_view what) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::InvalidInput, "unknown field in " + std::string(what), key);
    }
  }
}

inline Point2 point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::InvalidInput, "point must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Format, "malformed JSON", e.what());
  }
}

// ---------------------------------------------------------------- predicates

inline json to_json(const Predicate& pred, const Dataset& ds) {
  json clauses = json::array();
  for (const auto& c : pred.clauses()) {
    clauses.push_back({{"dim", ds.dim_names().at(c.dim)}, {"lo", c.lo}, {"hi", c.hi}});
  }
  return {{"clauses", std::move(clauses)}};
}

inline Predicate predicate_from_json(const json& j, const Dataset& ds) {
  detail::require_object(j, "predicate");
  const json& clauses = detail::field(j, "clauses");
  if (!clauses.is_array()) throw Error(ErrorCode::InvalidInput, "clauses must be an array");
  std::vector<Clause> out;
  for (const auto& c : clauses) {
    detail::require_object(c, "clause");
    const json& dim = detail::field(c, "dim");
    if (!dim.is_string()) throw Error(ErrorCode::InvalidInput, "clause dim must be a name");
    out.push_back({ds.dim_index(dim.get<std::string>()), detail::number(c, "lo"), detail::number(c, "hi")});
  }
  return Predicate(std::move(out));
}

inline json dim_names(std::span<const std::size_t> dims, const Dataset& ds) {
  json out = json::array();
  for (auto j : dims) out.push_back(ds.dim_names().at(j));
  return out;
}

inline json to_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

inline json to_json(std::span<const PointCategory> cats) {
  json out = json::array();
  for (auto c : cats) out.push_back(std::string(to_string(c)));
  return out;
}

inline json category_counts(std::span<const PointCategory> cats) {
  std::size_t counts[4] = {0, 0, 0, 0};
  for (auto c : cats) ++counts[static_cast<std::size_t>(c)];
  return {{"TP", counts[0]}, {"FP", counts[1]}, {"FN", counts[2]}, {"TN", counts[3]}};
}

// ----------------------------------------------------------- regions & paths

inline Box box_from_json(const json& j) {
  detail::require_object(j, "box");
  Box b{detail::number(j, "x0"), detail::number(j, "y0"), detail::number(j, "x1"), detail::number(j, "y1")};
  b.validate();
  return b;
}

inline Region region_from_json(const json& j) {
  detail::require_object(j, "region");
  const json& kind = detail::field(j, "kind");
  if (kind == "box") return box_from_json(j);
  if (kind == "lasso") {
    const json& pts = detail::field(j, "points");
    if (!pts.is_array()) throw Error(ErrorCode::InvalidInput, "lasso points must be an array");
    Lasso lasso;
    for (const auto& p : pts) lasso.points.push_back(detail::point(p));
    lasso.validate();
    return lasso;
  }
  throw Error(ErrorCode::InvalidInput, "region kind must be box or lasso");
}

inline json to_json(const Box& b) {
  return {{"kind", "box"}, {"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
}

inline json to_json(const Region& region) {
  if (const auto* b = std::get_if<Box>(&region)) return to_json(*b);
  json pts = json::array();
  for (const auto& [x, y] : std::get<Lasso>(region).points) pts.push_back({x, y});
  return {{"kind", "lasso"}, {"points", std::move(pts)}};
}

inline DragPath drag_path_from_json(const json& j) {
  detail::require_object(j, "drag path");
  DragPath path;
  path.start = box_from_json(detail::field(j, "start"));
  const json& wps = detail::field(j, "waypoints");
  if (!wps.is_array()) throw Error(ErrorCode::InvalidInput, "waypoints must be an array");
  for (const auto& w : wps) path.waypoints.push_back(detail::point(w));
  path.validate();
  return path;
}

// ------------------------------------------------------------------ configs

inline RegressionConfig regression_config_from_json(const json& j, RegressionConfig cfg = {}) {
  if (j.is_null()) return cfg;
  detail::require_object(j, "regression config");
  detail::reject_unknown(j,
                         {"gamma_1", "gamma_a", "gamma_mu", "b", "learning_rate", "max_iters", "convergence_tol",
                          "convergence_window", "prob_clip", "seed"},
                         "regression config");
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = detail::number(j, key);
  };
  auto integer = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::InvalidInput, "field must be an integer", key);
    out = v.get<std::remove_reference_t<decltype(out)>>();
  };
  num("gamma_1", cfg.gamma_1);
  num("gamma_a", cfg.gamma_a);
  num("gamma_mu", cfg.gamma_mu);
  num("b", cfg.b);
  num("learning_rate", cfg.learning_rate);
  integer("max_iters", cfg.max_iters);
  num("convergence_tol", cfg.convergence_tol);
  integer("convergence_window", cfg.convergence_window);
  num("prob_clip", cfg.prob_clip);
  integer("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline json to_json(const RegressionConfig& cfg) {
  return {{"gamma_1", cfg.gamma_1},
          {"gamma_a", cfg.gamma_a},
          {"gamma_mu", cfg.gamma_mu},
          {"b", cfg.b},
          {"learning_rate", cfg.learning_rate},
          {"max_iters", cfg.max_iters},
          {"convergence_tol", cfg.convergence_tol},
          {"convergence_window", cfg.convergence_window},
          {"prob_clip", cfg.prob_clip},
          {"seed", cfg.seed}};
}

inline RpiConfig rpi_config_from_json(const json& j, RpiConfig cfg = {}) {
  if (j.is_null()) return cfg;
  detail::require_object(j, "rpi config");
  detail::reject_unknown(j, {"bins_per_dim", "max_clauses", "beam_width", "min_improvement"}, "rpi config");
  for (const char* key : {"bins_per_dim", "max_clauses", "beam_width"}) {
    if (j.contains(key) && !j.at(key).is_number_unsigned()) {
      throw Error(ErrorCode::InvalidInput, "field must be a non-negative integer", key);
    }
  }
  if (j.contains("bins_per_dim")) cfg.bins_per_dim = j.at("bins_per_dim").get<std::size_t>();
  if (j.contains("max_clauses")) cfg.max_clauses = j.at("max_clauses").get<std::size_t>();
  if (j.contains("beam_width")) cfg.beam_width = j.at("beam_width").get<std::size_t>();
  if (j.contains("min_improvement")) cfg.min_improvement = detail::number(j, "min_improvement");
  cfg.validate();
  return cfg;
}

inline IngestConfig ingest_config_from_json(const json& j) {
  IngestConfig cfg;
  if (j.is_null()) return cfg;
  detail::require_object(j, "ingest config");
  detail::reject_unknown(j, {"projection_columns", "dimension_columns", "pca_fallback"}, "ingest config");
  if (j.contains("projection_columns")) {
    const json& p = j.at("projection_columns");
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
      throw Error(ErrorCode::InvalidInput, "projection_columns must be two column names");
    }
    cfg.projection_columns = std::pair{p[0].get<std::string>(), p[1].get<std::string>()};
  }
  if (j.contains("dimension_columns")) {
    for (const auto& d : j.at("dimension_columns")) {
      if (!d.is_string()) throw Error(ErrorCode::InvalidInput, "dimension_columns must be names");
      cfg.dimension_columns.push_back(d.get<std::string>());
    }
  }
  if (j.contains("pca_fallback")) {
    if (!j.at("pca_fallback").is_boolean()) throw Error(ErrorCode::InvalidInput, "pca_fallback must be boolean");
    cfg.pca_fallback = j.at("pca_fallback").get<bool>();
  }
  return cfg;
}

inline json to_json(const LoadReport& report) {
  json rejected = json::array();
  for (const auto& r : report.rows_rejected) rejected.push_back({{"row", r.row}, {"reason", r.reason}});
  return {{"rows_loaded", report.rows_loaded},
          {"rows_rejected", std::move(rejected)},
          {"constant_dims", report.constant_dims},
          {"warnings", report.warnings},
          {"projection_from_pca", report.projection_from_pca}};
}

inline json error_body(std::string_view code, std::string_view message, std::string_view detail = {}) {
  return {{"error", {{"code", code}, {"message", message}, {"detail", detail}}}};
}

}  // namespace predind::wire
