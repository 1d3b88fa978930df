#pragma once

// Gesture -> labeled brushes -> induced predicates -> result document.
// Shared by the HTTP service and the batch CLI so both emit the same schema.

#include <chrono>
#include <cstddef>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/metrics.hpp"
#include "predind/regression.hpp"
#include "predind/rpi.hpp"
#include "predind/selection.hpp"
#include "predind/wire.hpp"

namespace predind {

enum class Algorithm { Regression, Rpi };

struct SelectGesture {
  Region region;
};

struct ContrastGesture {
  Region region_p;
  Region region_b;
  ContrastBackground background = ContrastBackground::Pair;
};

struct DrawGesture {
  DragPath path;
};

using Gesture = std::variant<SelectGesture, ContrastGesture, DrawGesture>;

struct QueryRequest {
  Gesture gesture;
  Algorithm algorithm = Algorithm::Regression;
  RegressionConfig regression;
  RpiConfig rpi;
};

/// Brushes a gesture produces, plus what the result document reports about them.
struct GestureBrushes {
  std::vector<LabeledSelection> brushes;
  std::vector<std::string> labels;
  std::vector<wire::json> regions;
  std::vector<std::string> warnings;
  std::size_t ambiguous_count = 0;
  bool restricted_rows = false;
};

struct QueryOutcome {
  wire::json result;
  GestureBrushes gesture;
};

namespace wire {

inline Gesture gesture_from_json(const json& j) {
  detail::require_object(j, "gesture");
  const json& type = detail::field(j, "type");
  if (type == "select") {
    detail::reject_unknown(j, {"type", "region"}, "select gesture");
    return SelectGesture{region_from_json(detail::field(j, "region"))};
  }
  if (type == "contrast") {
    detail::reject_unknown(j, {"type", "region_p", "region_b", "background"}, "contrast gesture");
    ContrastGesture g{region_from_json(detail::field(j, "region_p")),
                      region_from_json(detail::field(j, "region_b"))};
    if (j.contains("background")) {
      const json& bg = j.at("background");
      if (bg == "pair") g.background = ContrastBackground::Pair;
      else if (bg == "global") g.background = ContrastBackground::Global;
      else throw Error(ErrorCode::InvalidInput, "background must be pair or global");
    }
    return g;
  }
  if (type == "draw") {
    detail::reject_unknown(j, {"type", "path"}, "draw gesture");
    return DrawGesture{drag_path_from_json(detail::field(j, "path"))};
  }
  throw Error(ErrorCode::InvalidInput, "gesture type must be select, contrast or draw");
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "regression") return Algorithm::Regression;
  if (s == "rpi") return Algorithm::Rpi;
  throw Error(ErrorCode::InvalidInput, "algorithm must be regression or rpi", std::string(s));
}

/// `{"gesture": {...}, "algorithm": "regression"|"rpi", "config": {...}}`
inline QueryRequest query_from_json(const json& j) {
  detail::require_object(j, "query");
  detail::reject_unknown(j, {"gesture", "algorithm", "config", "session"}, "query");
  QueryRequest req;
  req.gesture = gesture_from_json(detail::field(j, "gesture"));
  if (j.contains("algorithm")) {
    if (!j.at("algorithm").is_string()) throw Error(ErrorCode::InvalidInput, "algorithm must be a string");
    req.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  }
  if (j.contains("config")) {
    if (req.algorithm == Algorithm::Regression) req.regression = regression_config_from_json(j.at("config"));
    else req.rpi = rpi_config_from_json(j.at("config"));
  }
  return req;
}

}  // namespace wire

inline std::string_view gesture_name(const Gesture& g) {
  if (std::holds_alternative<SelectGesture>(g)) return "select";
  if (std::holds_alternative<ContrastGesture>(g)) return "contrast";
  return "draw";
}

inline GestureBrushes gesture_brushes(const Gesture& gesture, const Dataset& ds) {
  GestureBrushes out;
  if (const auto* sg = std::get_if<SelectGesture>(&gesture)) {
    out.brushes.push_back(select(sg->region, ds));
    out.labels.push_back("selection");
    out.regions.push_back(wire::to_json(sg->region));
  } else if (const auto* cg = std::get_if<ContrastGesture>(&gesture)) {
    ContrastSelection c = select_contrast(cg->region_p, cg->region_b, ds, cg->background);
    out.restricted_rows = !c.first.covers_all_rows();
    out.brushes.push_back(std::move(c.first));
    out.brushes.push_back(std::move(c.second));
    out.labels = {"p", "b"};
    out.regions = {wire::to_json(cg->region_p), wire::to_json(cg->region_b)};
    out.ambiguous_count = c.ambiguous_count;
  } else {
    const auto& dg = std::get<DrawGesture>(gesture);
    BrushSequence seq = discretize_drag(dg.path, ds);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      out.labels.push_back("step");
      out.regions.push_back(wire::to_json(seq.step_regions[t]));
    }
    out.brushes = std::move(seq.steps);
    out.warnings = std::move(seq.warnings);
  }
  return out;
}

inline QueryOutcome run_query(const Dataset& ds, const NormalizedView& view, const QueryRequest& req,
                              std::chrono::steady_clock::time_point deadline =
                                  std::chrono::steady_clock::time_point::max()) {
  using wire::json;
  GestureBrushes g = gesture_brushes(req.gesture, ds);
  const std::size_t t_count = g.brushes.size();

  std::vector<Predicate> preds;
  std::vector<std::vector<std::size_t>> dropped(t_count);
  std::vector<json> beams(t_count);
  json algo_info;
  if (req.algorithm == Algorithm::Regression) {
    RegressionConfig cfg = req.regression;
    cfg.deadline = deadline;
    auto results = fit(ds, view, g.brushes, cfg);
    for (std::size_t t = 0; t < t_count; ++t) {
      preds.push_back(results[t].hard);
      dropped[t] = results[t].dropped_dims;
    }
    algo_info = {{"name", "regression"},
                 {"iterations", results.front().iterations},
                 {"converged", results.front().converged},
                 {"final_loss", results.front().loss_trace.back()},
                 {"config", wire::to_json(req.regression)}};
  } else {
    RpiConfig cfg = req.rpi;
    cfg.deadline = deadline;
    for (std::size_t t = 0; t < t_count; ++t) {
      auto beam = rpi_fit(g.brushes[t], ds, cfg);
      if (beam.empty()) throw Error(ErrorCode::InvalidInput, "no candidate clauses; every dimension is constant");
      json jb = json::array();
      for (const auto& sp : beam) jb.push_back({{"predicate", wire::to_json(sp.predicate, ds)}, {"f1", sp.f1}});
      beams[t] = std::move(jb);
      preds.push_back(beam.front().predicate);
    }
    algo_info = {{"name", "rpi"},
                 {"config",
                  {{"bins_per_dim", cfg.bins_per_dim},
                   {"max_clauses", cfg.max_clauses},
                   {"beam_width", cfg.beam_width},
                   {"min_improvement", cfg.min_improvement}}}};
  }

  std::set<std::size_t> dim_union;
  json brushes = json::array();
  for (std::size_t t = 0; t < t_count; ++t) {
    const LabeledSelection& sel = g.brushes[t];
    const Labels membership = evaluate_predicate(preds[t], ds, sel);
    const auto cats = categorize(membership, sel.labels());
    const Confusion conf = confusion(membership, sel.labels());
    for (const auto& c : preds[t].clauses()) dim_union.insert(c.dim);

    json b = {{"step", t},
              {"label", g.labels[t]},
              {"region", g.regions[t]},
              {"predicate", wire::to_json(preds[t], ds)},
              {"f1", conf.f1()},
              {"confusion", wire::to_json(conf)},
              {"category_counts", wire::category_counts(cats)},
              {"categories", wire::to_json(cats)},
              {"n_positive", sel.n_positive()},
              {"n_background", sel.n_background()}};
    if (req.algorithm == Algorithm::Regression) {
      b["dropped_dims"] = wire::dim_names(dropped[t], ds);
    } else {
      b["beam"] = std::move(beams[t]);
    }
    brushes.push_back(std::move(b));
  }

  // One interval per brush for every dimension any brush constrains; a brush
  // without a clause on that dimension spans the full extent.
  json view_rows = json::array();
  for (auto j : dim_union) {
    json intervals = json::array();
    for (std::size_t t = 0; t < t_count; ++t) {
      const Clause* c = preds[t].find(j);
      const Extent& e = ds.extent(j);
      intervals.push_back({{"lo", c ? c->lo : e.min}, {"hi", c ? c->hi : e.max}, {"constrained", c != nullptr}});
    }
    view_rows.push_back({{"dim", ds.dim_names()[j]},
                         {"extent", {ds.extent(j).min, ds.extent(j).max}},
                         {"intervals", std::move(intervals)}});
  }

  const std::vector<std::size_t> dims(dim_union.begin(), dim_union.end());
  json result = {{"gesture", gesture_name(req.gesture)},
                 {"algorithm", std::move(algo_info)},
                 {"brushes", std::move(brushes)},
                 {"dims", wire::dim_names(dims, ds)},
                 {"predicate_view", std::move(view_rows)},
                 {"warnings", g.warnings}};
  if (std::holds_alternative<ContrastGesture>(req.gesture)) {
    result["ambiguous_count"] = g.ambiguous_count;
    if (g.restricted_rows) result["rows"] = g.brushes.front().rows();
  }
  return {std::move(result), std::move(g)};
}

}  // namespace predind
