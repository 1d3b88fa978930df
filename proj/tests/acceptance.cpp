// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "predind/predind.hpp"
#include "predind/service.hpp"

#ifndef PREDIND_CLI_PATH
#define PREDIND_CLI_PATH "predind"
#endif

namespace {

using namespace predind;
using json = wire::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bs[] = {3.0, 5.0, 7.0};
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 50, m = 5, t_count = 2 + inst % 3;
    const Matrix x = support::uniform_matrix(n, m, 7000 + inst);
    RegressionConfig cfg;
    cfg.gamma_1 = 0.1 * u(rng);
    cfg.gamma_a = u(rng);
    cfg.gamma_mu = u(rng);
    std::vector<SoftPredicate> seq;
    std::vector<LabeledSelection> brushes;
    for (std::size_t t = 0; t < t_count; ++t) {
      SoftPredicate s{std::vector<double>(m), std::vector<double>(m), bs[inst % 3]};
      for (std::size_t j = 0; j < m; ++j) {
        s.mu[j] = u(rng);
        s.a[j] = 0.25 + 4.0 * u(rng);
      }
      seq.push_back(std::move(s));
      Labels y(n);
      for (auto& v : y) v = u(rng) < 0.3;
      y[0] = 1;
      y[1] = 0;
      brushes.emplace_back(std::move(y));
    }
    const auto an = gradients(seq, brushes, x, cfg);
    const auto fd = support::finite_difference_gradients(seq, brushes, x, cfg, 1e-5);
    for (std::size_t t = 0; t < t_count; ++t) {
      for (std::size_t j = 0; j < m; ++j) {
        worst = std::max(worst, support::relative_error(an[t].d_a[j], fd[t].d_a[j]));
        worst = std::max(worst, support::relative_error(an[t].d_mu[j], fd[t].d_mu[j]));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 10.0,
          fmt("worst relative error %.3g over 100 instances (T=2..4); %.2f s", worst, secs)};
}

Outcome proxy_level_set() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + trial % 6;
    const std::size_t active = trial % m;
    SoftPredicate s{std::vector<double>(m), std::vector<double>(m, 0.0), 1.5 + 10.0 * u(rng)};
    for (auto& v : s.mu) v = -0.5 + 2.0 * u(rng);
    s.a[active] = 0.1 + 50.0 * u(rng);
    std::vector<double> x(m);
    for (auto& v : x) v = u(rng);
    x[active] = s.mu[active] + (trial % 2 ? 1.0 : -1.0) / s.a[active];
    worst = std::max(worst, std::abs(proxy(x, s) - 0.5));
  }
  return {worst <= 1e-12, fmt("max |proxy - 0.5| on box faces %.3g over 1000 draws", worst)};
}

Outcome planted_box_recovery() {
  const auto pb = support::planted_box(0);
  const NormalizedView view(pb.ds);
  const auto t0 = Clock::now();
  RegressionConfig cfg;
  cfg.seed = 0;
  const auto r = fit(pb.ds, view, LabeledSelection(pb.labels), cfg);
  const double secs = seconds_since(t0);
  bool dims_ok = r.hard.size() == 2;
  double err = 0.0;
  std::string dims;
  for (std::size_t k = 0; k < r.hard.size(); ++k) {
    const Clause& c = r.hard.clauses()[k];
    dims += (k ? "," : "") + pb.ds.dim_names()[c.dim];
    if (dims_ok) {
      dims_ok = c.dim == pb.dims[k];
      err = std::max({err, std::abs(view.normalize(c.dim, c.lo) - pb.lo), std::abs(view.normalize(c.dim, c.hi) - pb.hi)});
    }
  }
  const bool pass = dims_ok && err <= 0.05 && r.f1 >= 0.95 && secs < 5.0;
  return {pass, fmt("dims {%s}, max endpoint error %.4f, F1 %.4f; %.2f s", dims.c_str(), err, r.f1, secs)};
}

Outcome sparsity_monotonicity() {
  bool pass = true;
  std::string counts;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pb = support::planted_box(seed);
    const NormalizedView view(pb.ds);
    const LabeledSelection sel(pb.labels);
    std::size_t prev = pb.ds.n_dims() + 1;
    counts += seed ? " | " : "";
    for (double g : {0.0, 0.01, 0.05, 0.2}) {
      RegressionConfig cfg;
      cfg.gamma_1 = g;
      const std::size_t n = fit(pb.ds, view, sel, cfg).hard.size();
      pass = pass && n <= prev;
      prev = n;
      counts += fmt("%zu ", n);
    }
  }
  return {pass, "surviving clauses at gamma_1 = 0, 0.01, 0.05, 0.2 per seed: " + counts};
}

Outcome smoothness_ablation() {
  const auto pb = support::planted_box(0);
  const NormalizedView view(pb.ds);
  const auto brushes = support::sliding_boxes(pb.ds, view);
  const auto t0 = Clock::now();
  auto run = [&](double g) {
    RegressionConfig cfg;
    cfg.gamma_a = g;
    cfg.gamma_mu = g;
    const auto rs = fit(pb.ds, view, brushes, cfg);
    std::vector<double> f1s;
    std::vector<StepParams> params;
    for (const auto& r : rs) {
      f1s.push_back(r.f1);
      params.push_back({r.soft.a, r.soft.mu});
    }
    return sequence_stats(f1s, params);
  };
  const auto on = run(1.0);
  const auto off = run(0.0);
  const double secs = seconds_since(t0);
  const double drop = off.mean_f1 - on.mean_f1;
  const bool pass = on.mu_energy < off.mu_energy && drop <= 0.05 && secs < 30.0;
  return {pass, fmt("mu energy %.4f (smooth) vs %.4f (free); mean F1 %.4f vs %.4f; %.2f s", on.mu_energy,
                    off.mu_energy, on.mean_f1, off.mean_f1, secs)};
}

Outcome rpi_vs_brute_force() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RpiConfig cfg;
  cfg.bins_per_dim = 5;
  double worst_ratio = 1e9;
  std::size_t exact = 0, exact_tried = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Dataset ds(support::dim_names(3), support::uniform_matrix(100, 3, 8000 + inst), Matrix(100, 2));
    const auto cands = candidate_clauses(ds, cfg);

    // Noisy labels from a random 2-clause bin-aligned predicate.
    Labels y;
    for (;;) {
      const Clause& c1 = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
      const Clause& c2 = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
      if (c1.dim == c2.dim) continue;
      y = evaluate_predicate(Predicate({c1, c2}), ds);
      for (auto& v : y) v = u(rng) < 0.1 ? !v : v;
      const auto pos = std::count(y.begin(), y.end(), 1);
      if (pos >= 5 && pos <= 95) break;
    }
    const double got = rpi_fit(LabeledSelection(y), ds, cfg).front().f1;
    const double best = support::exhaustive_best_f1(ds, cands, y);
    worst_ratio = std::min(worst_ratio, got / best);

    // Labels from one candidate clause must be recovered exactly.
    for (;;) {
      const Clause& c = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
      const Labels z = evaluate_predicate(Predicate({c}), ds);
      const auto pos = std::count(z.begin(), z.end(), 1);
      if (pos == 0 || pos == 100) continue;
      ++exact_tried;
      if (rpi_fit(LabeledSelection(z), ds, cfg).front().f1 == 1.0) ++exact;
      break;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_ratio >= 0.9 && exact == exact_tried && secs < 60.0;
  return {pass, fmt("worst F1 ratio to exhaustive %.4f; exact single-clause recovery %zu/%zu; %.2f s", worst_ratio,
                    exact, exact_tried, secs)};
}

Outcome partition_invariant() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 97;
    const std::size_t m = 1 + trial % 4;
    const Dataset ds(support::dim_names(m), support::uniform_matrix(n, m, 9000 + trial), Matrix(n, 2));
    std::vector<Clause> clauses;
    for (std::size_t j = 0; j < m; ++j) {
      if (u(rng) < 0.4) continue;
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      clauses.push_back({j, a, b});
    }
    Labels y(n);
    for (auto& v : y) v = u(rng) < u(rng);
    const Labels member = evaluate_predicate(Predicate(clauses), ds);
    const Confusion c = confusion(member, y);
    const auto cats = categorize(member, y);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto cat : cats) ++counts[static_cast<int>(cat)];
    const bool good = c.total() == n && counts[0] + counts[1] + counts[2] + counts[3] == n &&
                      counts[0] == c.tp && counts[1] == c.fp && counts[2] == c.fn && counts[3] == c.tn;
    ok += good;
  }
  return {ok == 1000, fmt("%zu/1000 random pairs partition N", ok)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string select_gesture(const Box& b) {
  return json{{"type", "select"}, {"region", {{"kind", "box"}, {"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}}}}
      .dump();
}

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "predind_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto pb = support::planted_box(0);
  std::ofstream(dir / "planted_box.csv", std::ios::binary) << support::to_csv(pb.ds);
  std::ofstream(dir / "select.json", std::ios::binary) << select_gesture(pb.projection_box());
  std::vector<std::string> outputs;
  for (const char* name : {"run1", "run2"}) {
    const std::string cmd = std::string("\"") + PREDIND_CLI_PATH + "\" --input \"" + (dir / "planted_box.csv").string() +
                            "\" --gestures \"" + (dir / "select.json").string() + "\" --out \"" +
                            (dir / name).string() + "\" --projection x,y --seed 0";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      fs::remove_all(dir);
      return {false, fmt("CLI exited with status %d", rc)};
    }
    outputs.push_back(slurp(dir / name / "predicates.json"));
  }
  fs::remove_all(dir);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt("predicates.json %s across two runs (%zu bytes)", same ? "byte-identical" : "differs",
                    outputs[0].size())};
}

Outcome service_contract() {
  Service service({.max_upload_bytes = 1 << 20});
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) return {false, "could not bind a local port"};
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  Outcome out;
  std::string notes;
  bool pass = true;
  auto check = [&](bool ok, const std::string& what) {
    pass = pass && ok;
    notes += (notes.empty() ? "" : "; ") + what + (ok ? " ok" : " FAILED");
  };

  httplib::Client client("127.0.0.1", port);
  const auto pb = support::planted_box(0);
  const std::string csv = support::to_csv(pb.ds);
  auto up = client.Post("/datasets?projection=x,y", csv, "text/csv");
  if (up && up->status == 201) {
    const std::string id = json::parse(up->body).at("dataset_id");
    auto q = client.Post("/datasets/" + id + "/query", json{{"gesture", json::parse(select_gesture(pb.projection_box()))}}.dump(),
                         "application/json");
    if (q && q->status == 200) {
      const json pred = json::parse(q->body).at("brushes")[0].at("predicate");
      auto ev = client.Post("/datasets/" + id + "/evaluate", json{{"predicate", pred}}.dump(), "application/json");
      IngestConfig cfg;
      cfg.projection_columns = std::pair{"x", "y"};
      const Dataset local = load_csv_text(csv, cfg).dataset;
      const Labels expected = evaluate_predicate(wire::predicate_from_json(pred, local), local);
      const bool equal = ev && ev->status == 200 && json::parse(ev->body).at("membership") == json(expected);
      check(equal && pred.at("clauses").size() == 2, "evaluate membership equals local oracle");
    } else {
      check(false, "query");
    }
    auto missing = client.Post("/datasets/ds-missing/query", "{}", "application/json");
    check(missing && missing->status == 404, "404 unknown dataset");
    auto empty = client.Post("/datasets/" + id + "/query",
                             json{{"gesture", json::parse(select_gesture(Box{50, 50, 60, 60}))}}.dump(),
                             "application/json");
    check(empty && empty->status == 422, "422 empty selection");
    auto unknown = client.Post("/datasets/" + id + "/evaluate",
                               R"({"predicate":{"clauses":[{"dim":"zz","lo":0,"hi":1}]}})", "application/json");
    check(unknown && unknown->status == 422, "422 unknown dimension");
    auto splom = client.Get("/datasets/" + id + "/splom?dims=");
    check(splom && splom->status == 422, "422 empty splom dims");
  } else {
    check(false, "upload");
  }
  auto big = client.Post("/datasets", std::string(2 << 20, '7'), "text/csv");
  check(big && big->status == 413, "413 oversize upload");

  server.stop();
  worker.join();
  return {pass, notes};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 gradient correctness", gradient_correctness},
      {"AC2 proxy level set", proxy_level_set},
      {"AC3 planted-box recovery", planted_box_recovery},
      {"AC4 sparsity monotonicity", sparsity_monotonicity},
      {"AC5 smoothness ablation", smoothness_ablation},
      {"AC6 RPI vs brute force", rpi_vs_brute_force},
      {"AC7 partition invariant", partition_invariant},
      {"AC8 CLI determinism", cli_determinism},
      {"AC9 service contract", service_contract},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
