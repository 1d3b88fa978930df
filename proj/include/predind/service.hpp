#pragma once

// HTTP JSON API over immutable datasets.
//
//   POST /datasets                 CSV upload (raw body or multipart "file")
//   POST /datasets/{id}/query      gesture -> predicates + categories
//   POST /datasets/{id}/evaluate   predicate (+ labels) -> membership
//   GET  /datasets/{id}/splom      column slices for the named dims
//   GET  /healthz
//
// The handlers are plain member functions so they can be exercised without a
// socket; mount() binds them to a cpp-httplib server.

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen's internal parameter names.
#include "predind/ingest.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/metrics.hpp"
#include "predind/query.hpp"
#include "predind/wire.hpp"

namespace predind {

struct ServiceOptions {
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  std::chrono::milliseconds query_budget{30'000};
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  using json = wire::json;
  using Params = std::multimap<std::string, std::string>;

  explicit Service(ServiceOptions options = {}) : options_(options) {}

  const ServiceOptions& options() const noexcept { return options_; }

  Response healthz() const { return {200, "ok", "text/plain"}; }

  Response create_dataset(std::string_view csv_body, const Params& params = {}) {
    if (csv_body.size() > options_.max_upload_bytes) {
      return error(413, "payload_too_large", "upload exceeds the size cap",
                   std::to_string(options_.max_upload_bytes) + " bytes");
    }
    IngestConfig cfg;
    try {
      if (auto p = param(params, "projection")) {
        const auto cols = split_list(*p);
        if (cols.size() != 2) return error(400, "invalid_input", "projection must name two columns", *p);
        cfg.projection_columns = std::pair{cols[0], cols[1]};
      }
      if (auto d = param(params, "dims")) cfg.dimension_columns = split_list(*d);
      if (auto f = param(params, "pca_fallback")) {
        if (*f != "true" && *f != "false") return error(400, "invalid_input", "pca_fallback must be true or false");
        cfg.pca_fallback = *f == "true";
      }
      LoadResult loaded = load_csv_text(csv_body, cfg);
      auto entry = std::make_shared<const Entry>(std::move(loaded.dataset), std::move(loaded.report));
      const std::string id = "ds-" + std::to_string(++next_id_);
      {
        std::unique_lock lock(registry_mutex_);
        registry_.emplace(id, entry);
      }
      const Dataset& ds = entry->dataset;
      json extents = json::array();
      for (std::size_t j = 0; j < ds.n_dims(); ++j) {
        extents.push_back({{"dim", ds.dim_names()[j]}, {"min", ds.extent(j).min}, {"max", ds.extent(j).max}});
      }
      json projection = json::array();
      for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        projection.push_back({ds.projection()(i, 0), ds.projection()(i, 1)});
      }
      json body = {{"dataset_id", id},
                   {"load_report", wire::to_json(entry->report)},
                   {"dims", ds.dim_names()},
                   {"extents", std::move(extents)},
                   {"projection", std::move(projection)},
                   {"row_ids", ds.row_ids()}};
      return {201, body.dump()};
    } catch (const Error& e) {
      return error(400, to_string(e.code()), e.what(), e.detail());
    }
  }

  Response query(const std::string& id, std::string_view body) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    try {
      const json request = wire::parse(body);
      const QueryRequest req = wire::query_from_json(request);
      const auto deadline = std::chrono::steady_clock::now() + options_.query_budget;
      QueryOutcome outcome = run_query(entry->dataset, entry->view, req, deadline);
      outcome.result["dataset_id"] = id;
      if (auto it = request.find("session"); it != request.end() && it->is_string()) {
        auto session = std::make_shared<const Session>(Session{id, std::move(outcome.gesture.brushes)});
        std::unique_lock lock(session_mutex_);
        sessions_[it->get<std::string>()] = std::move(session);
      }
      return {200, outcome.result.dump()};
    } catch (const Error& e) {
      return from_error(e);
    }
  }

  /// `{"predicate": {...}, "labels": [0,1,...]}`; instead of labels a request may
  /// name `"session"` and `"brush"` to reuse the labels of an earlier query.
  Response evaluate(const std::string& id, std::string_view body) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    const Dataset& ds = entry->dataset;
    try {
      const json request = wire::parse(body);
      wire::detail::require_object(request, "evaluate request");
      wire::detail::reject_unknown(request, {"predicate", "labels", "session", "brush"}, "evaluate request");
      const Predicate pred = wire::predicate_from_json(wire::detail::field(request, "predicate"), ds);

      std::optional<LabeledSelection> sel;
      if (request.contains("labels")) {
        const json& jl = request.at("labels");
        if (!jl.is_array() || jl.size() != ds.n_rows()) {
          return error(422, "invalid_input", "labels must be an array with one entry per row");
        }
        Labels labels;
        labels.reserve(jl.size());
        for (const auto& v : jl) {
          if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
            return error(422, "invalid_input", "labels must be 0 or 1");
          }
          labels.push_back(static_cast<std::uint8_t>(v.get<int>()));
        }
        sel.emplace(std::move(labels));
      } else if (request.contains("session")) {
        sel = session_brush(id, request);
      }

      json out;
      if (!sel) {
        const Labels membership = evaluate_predicate(pred, ds);
        out["membership"] = membership;
      } else {
        const Labels membership = evaluate_predicate(pred, ds, *sel);
        const auto cats = categorize(membership, sel->labels());
        const Confusion conf = confusion(membership, sel->labels());
        out["membership"] = membership;
        out["categories"] = wire::to_json(cats);
        out["category_counts"] = wire::category_counts(cats);
        out["confusion"] = wire::to_json(conf);
        out["f1"] = conf.f1();
        if (!sel->covers_all_rows()) out["rows"] = sel->rows();
      }
      return {200, out.dump()};
    } catch (const Error& e) {
      return from_error(e);
    }
  }

  Response splom(const std::string& id, std::string_view dims_param) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    const Dataset& ds = entry->dataset;
    std::vector<std::string> dims;
    for (auto& d : split_list(dims_param)) {
      if (std::find(dims.begin(), dims.end(), d) == dims.end()) dims.push_back(std::move(d));
    }
    if (dims.empty()) return error(422, "invalid_input", "dims must name at least one dimension");
    json columns = json::object();
    for (const auto& d : dims) {
      const auto j = ds.find_dim(d);
      if (!j) return error(422, "unknown_dimension", "unknown dimension", d);
      json values = json::array();
      for (std::size_t i = 0; i < ds.n_rows(); ++i) values.push_back(ds.value(i, *j));
      columns[d] = std::move(values);
    }
    json out = {{"dims", dims}, {"row_ids", ds.row_ids()}, {"columns", std::move(columns)}};
    return {200, out.dump()};
  }

  void mount(httplib::Server& server) {
    server.set_payload_max_length(options_.max_upload_bytes);
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, healthz()); });
    server.Post("/datasets", [this, reply](const httplib::Request& req, httplib::Response& res) {
      Params params(req.params.begin(), req.params.end());
      if (req.is_multipart_form_data()) {
        if (req.files.empty()) return reply(res, error(400, "format_error", "multipart upload has no file part"));
        const auto it = req.files.find("file");
        const auto& part = it != req.files.end() ? it->second : req.files.begin()->second;
        return reply(res, create_dataset(part.content, params));
      }
      reply(res, create_dataset(req.body, params));
    });
    server.Post(R"(/datasets/([^/]+)/query)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, query(req.matches[1], req.body));
    });
    server.Post(R"(/datasets/([^/]+)/evaluate)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, evaluate(req.matches[1], req.body));
    });
    server.Get(R"(/datasets/([^/]+)/splom)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, splom(req.matches[1], req.has_param("dims") ? req.get_param_value("dims") : std::string()));
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const char* code = res.status == 413 ? "payload_too_large" : res.status == 404 ? "not_found" : "http_error";
      res.set_content(wire::error_body(code, httplib::status_message(res.status)).dump(), "application/json");
    });
  }

  static int status_for(ErrorCode code) noexcept {
    switch (code) {
      case ErrorCode::Format: return 400;
      case ErrorCode::Divergence: return 500;
      case ErrorCode::Timeout: return 503;
      default: return 422;
    }
  }

 private:
  struct Entry {
    Entry(Dataset ds, LoadReport rep) : dataset(std::move(ds)), view(dataset), report(std::move(rep)) {}
    Dataset dataset;
    NormalizedView view;
    LoadReport report;
  };

  struct Session {
    std::string dataset_id;
    std::vector<LabeledSelection> brushes;
  };

  std::shared_ptr<const Entry> find(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = registry_.find(id);
    return it == registry_.end() ? nullptr : it->second;
  }

  LabeledSelection session_brush(const std::string& id, const json& request) const {
    const json& token = request.at("session");
    if (!token.is_string()) throw Error(ErrorCode::InvalidInput, "session must be a string");
    std::shared_ptr<const Session> session;
    {
      std::shared_lock lock(session_mutex_);
      auto it = sessions_.find(token.get<std::string>());
      if (it != sessions_.end()) session = it->second;
    }
    if (!session || session->dataset_id != id) {
      throw Error(ErrorCode::InvalidInput, "no stored query for this session and dataset");
    }
    std::size_t brush = 0;
    if (request.contains("brush")) {
      if (!request.at("brush").is_number_unsigned()) throw Error(ErrorCode::InvalidInput, "brush must be an index");
      brush = request.at("brush").get<std::size_t>();
    }
    if (brush >= session->brushes.size()) throw Error(ErrorCode::InvalidInput, "brush index out of range");
    return session->brushes[brush];
  }

  static std::optional<std::string> param(const Params& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
  }

  static std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      const auto piece = csv::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
      if (!piece.empty()) out.emplace_back(piece);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  static Response error(int status, std::string_view code, std::string_view message, std::string_view detail = {}) {
    return {status, wire::error_body(code, message, detail).dump()};
  }

  static Response from_error(const Error& e) {
    return error(status_for(e.code()), to_string(e.code()), e.what(), e.detail());
  }

  static Response not_found(const std::string& id) { return error(404, "not_found", "unknown dataset", id); }

  ServiceOptions options_;
  std::atomic<std::size_t> next_id_{0};
  mutable std::shared_mutex registry_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Entry>> registry_;
  mutable std::shared_mutex session_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Session>> sessions_;
};

}  // namespace predind
