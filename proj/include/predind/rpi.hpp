#pragma once

// Recursive predicate induction: a greedy, bottom-up beam search over
// bin-aligned interval clauses scored by F1 against the user's labels.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/metrics.hpp"

namespace predind {

struct RpiConfig {
  std::size_t bins_per_dim = 20;
  /// 0 means the number of dimensions.
  std::size_t max_clauses = 0;
  std::size_t beam_width = 3;
  double min_improvement = 1e-4;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();

  void validate() const {
    if (bins_per_dim < 2) throw Error(ErrorCode::InvalidInput, "bins_per_dim must be at least 2");
    if (beam_width < 1) throw Error(ErrorCode::InvalidInput, "beam_width must be at least 1");
    if (!(min_improvement >= 0.0)) throw Error(ErrorCode::InvalidInput, "min_improvement must be non-negative");
  }
};

struct ScoredPredicate {
  Predicate predicate;
  double f1 = 0.0;
};

/// Equal-frequency bins of one dimension. Every bin is non-empty; lo/hi are
/// the smallest and largest values that fall in it.
struct DimBins {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> bin_of_row;

  std::size_t count() const noexcept { return lo.size(); }
};

inline DimBins make_bins(const Dataset& ds, std::size_t dim, std::size_t bins_per_dim) {
  const std::size_t n = ds.n_rows();
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = ds.value(i, dim);
  std::sort(sorted.begin(), sorted.end());

  // Cut values are data values; a bin spans [cut_k, cut_{k+1}).
  std::vector<double> cuts;
  for (std::size_t k = 1; k < bins_per_dim; ++k) {
    const double c = sorted[k * n / bins_per_dim];
    if (c > sorted.front() && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
  }
  if (cuts.empty() && sorted.back() > sorted.front()) {
    cuts.push_back(*std::upper_bound(sorted.begin(), sorted.end(), sorted.front()));
  }

  DimBins bins;
  const std::size_t nb = cuts.size() + 1;
  bins.lo.assign(nb, std::numeric_limits<double>::infinity());
  bins.hi.assign(nb, -std::numeric_limits<double>::infinity());
  bins.bin_of_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = ds.value(i, dim);
    const auto b = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    bins.bin_of_row[i] = b;
    bins.lo[b] = std::min(bins.lo[b], v);
    bins.hi[b] = std::max(bins.hi[b], v);
  }
  return bins;
}

/// Every contiguous run of bins on every non-constant dimension, as clauses
/// in original units, ordered by dimension then first bin then last bin.
inline std::vector<Clause> candidate_clauses(const Dataset& ds, const RpiConfig& cfg = {}) {
  cfg.validate();
  std::vector<Clause> out;
  for (std::size_t j = 0; j < ds.n_dims(); ++j) {
    if (ds.extent(j).constant()) continue;
    const DimBins bins = make_bins(ds, j, cfg.bins_per_dim);
    for (std::size_t first = 0; first < bins.count(); ++first) {
      for (std::size_t last = first; last < bins.count(); ++last) {
        out.push_back({j, bins.lo[first], bins.hi[last]});
      }
    }
  }
  return out;
}

namespace detail {

struct BinClause {
  std::size_t dim;
  std::size_t first;
  std::size_t last;

  friend auto operator<=>(const BinClause&, const BinClause&) = default;
};

struct RpiNode {
  std::vector<BinClause> clauses;  // sorted by dim
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double f1() const noexcept {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
  }
};

class RpiSearch {
 public:
  RpiSearch(const LabeledSelection& sel, const Dataset& ds, const RpiConfig& cfg)
      : sel_(sel), ds_(ds), cfg_(cfg) {
    bins_.resize(ds.n_dims());
    for (std::size_t j = 0; j < ds.n_dims(); ++j) {
      if (!ds.extent(j).constant()) bins_[j] = make_bins(ds, j, cfg.bins_per_dim);
    }
    total_pos_ = sel.n_positive();
  }

  std::vector<RpiNode> run() {
    const std::size_t max_clauses = cfg_.max_clauses == 0 ? ds_.n_dims() : cfg_.max_clauses;
    const std::vector<std::uint8_t> all(sel_.size(), 1);

    std::vector<RpiNode> level;
    for (std::size_t j = 0; j < ds_.n_dims(); ++j) {
      if (bins_[j].count() < 2) continue;
      const auto counts = bin_counts(j, all);
      for (std::size_t first = 0; first < bins_[j].count(); ++first) {
        for (std::size_t last = first; last < bins_[j].count(); ++last) {
          level.push_back(score({}, {j, first, last}, counts));
        }
      }
    }
    std::vector<RpiNode> beam = top(std::move(level));
    if (beam.empty()) return beam;

    for (;;) {
      check_deadline();
      std::vector<RpiNode> pool = beam;
      for (const auto& node : beam) {
        if (node.clauses.size() < max_clauses) extend(node, pool);
        refine(node, pool);
      }
      std::vector<RpiNode> next = top(std::move(pool));
      const double gain = next.front().f1() - beam.front().f1();
      beam = std::move(next);
      if (gain <= 0.0 || gain < cfg_.min_improvement) break;
    }
    return beam;
  }

  Predicate to_predicate(const RpiNode& node) const {
    std::vector<Clause> clauses;
    for (const auto& c : node.clauses) {
      clauses.push_back({c.dim, bins_[c.dim].lo[c.first], bins_[c.dim].hi[c.last]});
    }
    return Predicate(std::move(clauses));
  }

 private:
  struct Counts {
    std::vector<std::size_t> pos;  // prefix sums over bins
    std::vector<std::size_t> neg;
  };

  void check_deadline() const {
    if (std::chrono::steady_clock::now() > cfg_.deadline) {
      throw Error(ErrorCode::Timeout, "predicate induction exceeded its compute budget");
    }
  }

  bool full_range(const BinClause& c) const noexcept {
    return c.first == 0 && c.last + 1 == bins_[c.dim].count();
  }

  Counts bin_counts(std::size_t dim, const std::vector<std::uint8_t>& mask) const {
    const std::size_t nb = bins_[dim].count();
    Counts c{std::vector<std::size_t>(nb + 1, 0), std::vector<std::size_t>(nb + 1, 0)};
    for (std::size_t k = 0; k < sel_.size(); ++k) {
      if (!mask[k]) continue;
      const std::size_t b = bins_[dim].bin_of_row[sel_.row(k)];
      (sel_.labels()[k] ? c.pos : c.neg)[b + 1] += 1;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      c.pos[b + 1] += c.pos[b];
      c.neg[b + 1] += c.neg[b];
    }
    return c;
  }

  RpiNode score(std::vector<BinClause> base, const BinClause& added, const Counts& counts) const {
    RpiNode node;
    node.clauses = std::move(base);
    node.clauses.push_back(added);
    std::sort(node.clauses.begin(), node.clauses.end());
    node.tp = counts.pos[added.last + 1] - counts.pos[added.first];
    node.fp = counts.neg[added.last + 1] - counts.neg[added.first];
    node.fn = total_pos_ - node.tp;
    return node;
  }

  /// Rows satisfying every clause of `clauses` except the one on `skip_dim`.
  std::vector<std::uint8_t> mask_of(const std::vector<BinClause>& clauses, std::size_t skip_dim) const {
    std::vector<std::uint8_t> mask(sel_.size(), 1);
    for (std::size_t k = 0; k < sel_.size(); ++k) {
      const std::size_t row = sel_.row(k);
      for (const auto& c : clauses) {
        if (c.dim == skip_dim) continue;
        const std::size_t b = bins_[c.dim].bin_of_row[row];
        if (b < c.first || b > c.last) {
          mask[k] = 0;
          break;
        }
      }
    }
    return mask;
  }

  // The best clause on each unused dimension.
  void extend(const RpiNode& node, std::vector<RpiNode>& pool) const {
    const auto mask = mask_of(node.clauses, std::numeric_limits<std::size_t>::max());
    for (std::size_t j = 0; j < ds_.n_dims(); ++j) {
      if (bins_[j].count() < 2) continue;
      if (std::any_of(node.clauses.begin(), node.clauses.end(), [&](const BinClause& c) { return c.dim == j; })) {
        continue;
      }
      const auto counts = bin_counts(j, mask);
      std::optional<RpiNode> best;
      for (std::size_t first = 0; first < bins_[j].count(); ++first) {
        for (std::size_t last = first; last < bins_[j].count(); ++last) {
          const BinClause c{j, first, last};
          if (full_range(c)) continue;
          RpiNode cand = score(node.clauses, c, counts);
          if (!best || better(cand, *best)) best = std::move(cand);
        }
      }
      if (best) pool.push_back(std::move(*best));
    }
  }

  // Move one endpoint of one clause by a single bin.
  void refine(const RpiNode& node, std::vector<RpiNode>& pool) const {
    for (std::size_t idx = 0; idx < node.clauses.size(); ++idx) {
      const BinClause& c = node.clauses[idx];
      const auto counts = bin_counts(c.dim, mask_of(node.clauses, c.dim));
      std::vector<BinClause> rest = node.clauses;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(idx));
      const std::size_t nb = bins_[c.dim].count();
      const std::array<std::pair<std::ptrdiff_t, std::ptrdiff_t>, 4> moves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
      for (const auto& [dfirst, dlast] : moves) {
        const auto first = static_cast<std::ptrdiff_t>(c.first) + dfirst;
        const auto last = static_cast<std::ptrdiff_t>(c.last) + dlast;
        if (first < 0 || last >= static_cast<std::ptrdiff_t>(nb) || first > last) continue;
        const BinClause moved{c.dim, static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
        if (full_range(moved)) continue;
        pool.push_back(score(rest, moved, counts));
      }
    }
  }

  // Higher F1, then fewer clauses, then lower dimension index, then lower lo.
  bool better(const RpiNode& x, const RpiNode& y) const {
    const double fx = x.f1();
    const double fy = y.f1();
    if (fx != fy) return fx > fy;
    if (x.clauses.size() != y.clauses.size()) return x.clauses.size() < y.clauses.size();
    for (std::size_t k = 0; k < x.clauses.size(); ++k) {
      const auto& a = x.clauses[k];
      const auto& b = y.clauses[k];
      if (a.dim != b.dim) return a.dim < b.dim;
      const double alo = bins_[a.dim].lo[a.first];
      const double blo = bins_[b.dim].lo[b.first];
      if (alo != blo) return alo < blo;
      if (a.last != b.last) return a.last < b.last;
    }
    return false;
  }

  std::vector<RpiNode> top(std::vector<RpiNode> pool) const {
    std::stable_sort(pool.begin(), pool.end(), [&](const RpiNode& x, const RpiNode& y) { return better(x, y); });
    std::vector<RpiNode> out;
    std::set<std::vector<BinClause>> seen;
    for (auto& node : pool) {
      if (out.size() == cfg_.beam_width) break;
      if (seen.insert(node.clauses).second) out.push_back(std::move(node));
    }
    return out;
  }

  const LabeledSelection& sel_;
  const Dataset& ds_;
  const RpiConfig& cfg_;
  std::vector<DimBins> bins_;
  std::size_t total_pos_ = 0;
};

}  // namespace detail

/// Beam of the best predicates found, best first, at most beam_width long.
inline std::vector<ScoredPredicate> rpi_fit(const LabeledSelection& sel, const Dataset& ds,
                                            const RpiConfig& cfg = {}) {
  cfg.validate();
  sel.check_against(ds);
  detail::RpiSearch search(sel, ds, cfg);
  std::vector<ScoredPredicate> out;
  for (const auto& node : search.run()) {
    Predicate pred = search.to_predicate(node);
    const double f1 = f1_score(evaluate_predicate(pred, ds, sel), sel.labels());
    out.push_back({std::move(pred), f1});
  }
  return out;
}

}  // namespace predind
