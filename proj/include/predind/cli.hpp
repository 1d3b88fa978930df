#pragma once

// Batch front door: CSV + gesture file -> predicates.json, categories.json,
// report.txt and projection.svg in an output directory.
//
// Exit codes: 0 success, 1 input error, 2 optimizer divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/query.hpp"
#include "predind/svg.hpp"
#include "predind/wire.hpp"

namespace predind::cli {

struct CliRun {
  std::string input_csv;
  std::string gesture_file;
  std::string algorithm = "regression";
  std::string config_file;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string projection;
  bool force = false;
  bool svg = true;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot read file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write file", path.string());
  out << content;
}

inline std::string report_text(const wire::json& result) {
  std::ostringstream r;
  r << std::setprecision(6);
  const auto& algo = result.at("algorithm");
  r << "algorithm: " << algo.at("name").get<std::string>() << "\n";
  r << "gesture: " << result.at("gesture").get<std::string>() << "\n";
  r << "brushes: " << result.at("brushes").size() << "\n";
  if (algo.contains("iterations")) {
    r << "iterations: " << algo.at("iterations").get<std::size_t>() << "\n";
    r << "converged: " << (algo.at("converged").get<bool>() ? "true" : "false") << "\n";
  }
  if (result.contains("ambiguous_count")) r << "ambiguous_count: " << result.at("ambiguous_count") << "\n";
  for (const auto& b : result.at("brushes")) {
    const auto& c = b.at("confusion");
    const double n = c.at("tp").get<double>() + c.at("fp").get<double>() + c.at("fn").get<double>() +
                     c.at("tn").get<double>();
    const double acc = (c.at("tp").get<double>() + c.at("tn").get<double>()) / n;
    r << "brush " << b.at("step").get<std::size_t>() << " (" << b.at("label").get<std::string>() << "): f1="
      << b.at("f1").get<double>() << " accuracy=" << acc << " clauses=" << b.at("predicate").at("clauses").size();
    if (b.contains("dropped_dims")) {
      r << " dropped_dims=";
      bool first = true;
      for (const auto& d : b.at("dropped_dims")) {
        r << (first ? "" : ",") << d.get<std::string>();
        first = false;
      }
    }
    r << "\n";
    for (const auto& cl : b.at("predicate").at("clauses")) {
      r << "  " << cl.at("dim").get<std::string>() << " in [" << cl.at("lo").get<double>() << ", "
        << cl.at("hi").get<double>() << "]\n";
    }
  }
  for (const auto& w : result.at("warnings")) r << "warning: " << w.get<std::string>() << "\n";
  return r.str();
}

}  // namespace detail

inline int execute(const CliRun& run, std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    const fs::path out_dir(run.out_dir);
    const std::vector<std::string> outputs = {"predicates.json", "categories.json", "report.txt", "projection.svg"};
    if (fs::exists(out_dir) && !fs::is_directory(out_dir)) {
      throw Error(ErrorCode::InvalidInput, "output path exists and is not a directory", run.out_dir);
    }
    if (!run.force) {
      for (const auto& name : outputs) {
        if (fs::exists(out_dir / name)) {
          throw Error(ErrorCode::InvalidInput, "refusing to overwrite existing output (use --force)",
                      (out_dir / name).string());
        }
      }
    }

    wire::json config = wire::json::object();
    if (!run.config_file.empty()) {
      config = wire::parse(detail::read_file(run.config_file));
      wire::detail::require_object(config, "config file");
      wire::detail::reject_unknown(config, {"ingest", "regression", "rpi"}, "config file");
    }
    IngestConfig ingest = wire::ingest_config_from_json(config.value("ingest", wire::json()));
    if (!run.projection.empty()) {
      const auto comma = run.projection.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::InvalidInput, "--projection expects x,y");
      ingest.projection_columns = std::pair{run.projection.substr(0, comma), run.projection.substr(comma + 1)};
    }

    QueryRequest req;
    req.gesture = wire::gesture_from_json(wire::parse(detail::read_file(run.gesture_file)));
    req.algorithm = wire::algorithm_from_string(run.algorithm);
    req.regression = wire::regression_config_from_json(config.value("regression", wire::json()));
    req.rpi = wire::rpi_config_from_json(config.value("rpi", wire::json()));
    if (run.seed) req.regression.seed = *run.seed;

    const LoadResult loaded = load_csv_file(run.input_csv, ingest);
    for (const auto& w : loaded.report.warnings) err << "warning: " << w << "\n";
    if (!loaded.report.rows_rejected.empty()) {
      err << "warning: rejected " << loaded.report.rows_rejected.size() << " row(s)\n";
    }
    const Dataset& ds = loaded.dataset;
    const NormalizedView view(ds);
    const QueryOutcome outcome = run_query(ds, view, req);
    const wire::json& result = outcome.result;

    wire::json categories = {{"row_ids", ds.row_ids()}, {"brushes", wire::json::array()}};
    for (const auto& b : result.at("brushes")) {
      categories["brushes"].push_back({{"step", b.at("step")}, {"categories", b.at("categories")}});
    }
    if (result.contains("rows")) categories["rows"] = result.at("rows");

    fs::create_directories(out_dir);
    detail::write_file(out_dir / "predicates.json", result.dump(2) + "\n");
    detail::write_file(out_dir / "categories.json", categories.dump() + "\n");
    detail::write_file(out_dir / "report.txt", detail::report_text(result));
    if (run.svg) {
      std::vector<PointCategory> cats;
      for (const auto& c : result.at("brushes").front().at("categories")) {
        const auto s = c.get<std::string>();
        cats.push_back(s == "TP"   ? PointCategory::TruePositive
                       : s == "FP" ? PointCategory::FalsePositive
                       : s == "FN" ? PointCategory::FalseNegative
                                   : PointCategory::TrueNegative);
      }
      const auto& rows = outcome.gesture.brushes.front().rows();
      detail::write_file(out_dir / "projection.svg", projection_svg(ds, cats, rows));
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (!e.detail().empty()) err << " (" << e.detail() << ")";
    err << "\n";
    return e.code() == ErrorCode::Divergence ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Explain a brushed pattern in a 2D projection with interval predicates"};
  CliRun run;
  std::uint64_t seed = 0;
  app.add_option("--input", run.input_csv, "CSV table with a header row")->required();
  app.add_option("--gestures", run.gesture_file, "gesture JSON (select, contrast or draw)")->required();
  app.add_option("--algorithm", run.algorithm, "induction algorithm")
      ->check(CLI::IsMember({"regression", "rpi"}));
  app.add_option("--config", run.config_file, "JSON with optional ingest/regression/rpi sections");
  app.add_option("--out", run.out_dir, "output directory")->required();
  auto* seed_opt = app.add_option("--seed", seed, "optimizer seed");
  app.add_option("--projection", run.projection, "projection columns as x,y (default: PCA)");
  app.add_flag("--force", run.force, "overwrite existing outputs");
  bool no_svg = false;
  app.add_flag("--no-svg", no_svg, "skip projection.svg");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (seed_opt->count() > 0) run.seed = seed;
  run.svg = !no_svg;
  return execute(run, err);
}

}  // namespace predind::cli
