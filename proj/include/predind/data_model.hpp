#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "predind/error.hpp"

namespace predind {

/// Binary per-row flags (selection labels or predicate membership).
using Labels = std::vector<std::uint8_t>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::InvalidInput, "matrix data size does not match shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Extent {
  double min = 0.0;
  double max = 0.0;

  bool constant() const noexcept { return min == max; }
  double width() const noexcept { return max - min; }
};

/// N x M table of finite values plus its N x 2 projection. Immutable once built.
class Dataset {
 public:
  Dataset(std::vector<std::string> dim_names, Matrix values, Matrix projection,
          std::vector<std::string> row_ids = {})
      : dim_names_(std::move(dim_names)),
        values_(std::move(values)),
        projection_(std::move(projection)),
        row_ids_(std::move(row_ids)) {
    if (values_.rows() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    if (dim_names_.size() != values_.cols()) {
      throw Error(ErrorCode::InvalidInput, "dimension name count does not match column count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : dim_names_) {
      if (!seen.insert(name).second) {
        throw Error(ErrorCode::InvalidInput, "duplicate dimension name", name);
      }
    }
    if (projection_.rows() != values_.rows() || projection_.cols() != 2) {
      throw Error(ErrorCode::InvalidInput, "projection must be N x 2");
    }
    for (double v : values_.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "dataset values must be finite");
    }
    for (double v : projection_.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "projection must be finite");
    }
    if (row_ids_.empty()) {
      row_ids_.reserve(values_.rows());
      for (std::size_t i = 0; i < values_.rows(); ++i) row_ids_.push_back(std::to_string(i));
    } else if (row_ids_.size() != values_.rows()) {
      throw Error(ErrorCode::InvalidInput, "row id count does not match row count");
    }

    extents_.resize(values_.cols());
    for (std::size_t j = 0; j < values_.cols(); ++j) {
      Extent e{values_(0, j), values_(0, j)};
      for (std::size_t i = 1; i < values_.rows(); ++i) {
        e.min = std::min(e.min, values_(i, j));
        e.max = std::max(e.max, values_(i, j));
      }
      extents_[j] = e;
    }
  }

  std::size_t n_rows() const noexcept { return values_.rows(); }
  std::size_t n_dims() const noexcept { return values_.cols(); }

  const std::vector<std::string>& dim_names() const noexcept { return dim_names_; }
  const Matrix& values() const noexcept { return values_; }
  const Matrix& projection() const noexcept { return projection_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  const std::vector<Extent>& extents() const noexcept { return extents_; }
  const Extent& extent(std::size_t dim) const { return extents_.at(dim); }

  double value(std::size_t row, std::size_t dim) const noexcept { return values_(row, dim); }

  std::optional<std::size_t> find_dim(std::string_view name) const noexcept {
    auto it = std::find(dim_names_.begin(), dim_names_.end(), name);
    if (it == dim_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - dim_names_.begin());
  }

  std::size_t dim_index(std::string_view name) const {
    if (auto j = find_dim(name)) return *j;
    throw Error(ErrorCode::UnknownDimension, "unknown dimension", std::string(name));
  }

 private:
  std::vector<std::string> dim_names_;
  Matrix values_;
  Matrix projection_;
  std::vector<std::string> row_ids_;
  std::vector<Extent> extents_;
};

/// Closed interval [lo, hi] on one dimension.
struct Clause {
  std::size_t dim = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return lo <= v && v <= hi; }

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// Conjunction of clauses, at most one per dimension, kept sorted by dimension.
class Predicate {
 public:
  Predicate() = default;

  explicit Predicate(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {
    for (const auto& c : clauses_) {
      if (!(c.lo <= c.hi)) {
        throw Error(ErrorCode::InvalidPredicate, "clause requires lo <= hi",
                    "dim " + std::to_string(c.dim));
      }
    }
    std::sort(clauses_.begin(), clauses_.end(),
              [](const Clause& x, const Clause& y) { return x.dim < y.dim; });
    for (std::size_t k = 1; k < clauses_.size(); ++k) {
      if (clauses_[k].dim == clauses_[k - 1].dim) {
        throw Error(ErrorCode::InvalidPredicate, "two clauses on the same dimension",
                    "dim " + std::to_string(clauses_[k].dim));
      }
    }
  }

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  std::size_t size() const noexcept { return clauses_.size(); }
  bool empty() const noexcept { return clauses_.empty(); }

  const Clause* find(std::size_t dim) const noexcept {
    for (const auto& c : clauses_) {
      if (c.dim == dim) return &c;
    }
    return nullptr;
  }

  /// Copy with `clause` added, replacing any clause on the same dimension.
  Predicate with(const Clause& clause) const {
    std::vector<Clause> out;
    out.reserve(clauses_.size() + 1);
    for (const auto& c : clauses_) {
      if (c.dim != clause.dim) out.push_back(c);
    }
    out.push_back(clause);
    return Predicate(std::move(out));
  }

  Predicate without(std::size_t dim) const {
    std::vector<Clause> out;
    for (const auto& c : clauses_) {
      if (c.dim != dim) out.push_back(c);
    }
    return Predicate(std::move(out));
  }

  bool contains(std::span<const double> row) const noexcept {
    for (const auto& c : clauses_) {
      if (!c.contains(row[c.dim])) return false;
    }
    return true;
  }

  friend bool operator==(const Predicate&, const Predicate&) = default;

 private:
  std::vector<Clause> clauses_;
};

/// Binary labels over a set of dataset rows. `rows` empty means the labels
/// cover every dataset row in order; otherwise labels[k] belongs to rows[k].
class LabeledSelection {
 public:
  explicit LabeledSelection(Labels labels, std::vector<std::size_t> rows = {})
      : labels_(std::move(labels)), rows_(std::move(rows)) {
    if (!rows_.empty() && rows_.size() != labels_.size()) {
      throw Error(ErrorCode::InvalidInput, "selection rows and labels differ in length");
    }
    for (auto y : labels_) {
      if (y > 1) throw Error(ErrorCode::InvalidInput, "labels must be 0 or 1");
      n_positive_ += y;
    }
    n_background_ = labels_.size() - n_positive_;
    if (n_positive_ == 0) throw Error(ErrorCode::EmptySelection, "selection contains no points");
    if (n_background_ == 0) {
      throw Error(ErrorCode::EmptySelection, "selection leaves no background points");
    }
  }

  const Labels& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  bool covers_all_rows() const noexcept { return rows_.empty(); }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t n_positive() const noexcept { return n_positive_; }
  std::size_t n_background() const noexcept { return n_background_; }

  /// Dataset row index of the k-th labeled entry.
  std::size_t row(std::size_t k) const noexcept { return rows_.empty() ? k : rows_[k]; }

  void check_against(const Dataset& ds) const {
    if (rows_.empty()) {
      if (labels_.size() != ds.n_rows()) {
        throw Error(ErrorCode::InvalidInput, "selection length does not match dataset rows");
      }
      return;
    }
    for (auto r : rows_) {
      if (r >= ds.n_rows()) throw Error(ErrorCode::InvalidInput, "selection row out of range");
    }
  }

 private:
  Labels labels_;
  std::vector<std::size_t> rows_;
  std::size_t n_positive_ = 0;
  std::size_t n_background_ = 0;
};

enum class PointCategory : std::uint8_t { TruePositive, FalsePositive, FalseNegative, TrueNegative };

constexpr std::string_view to_string(PointCategory c) noexcept {
  switch (c) {
    case PointCategory::TruePositive: return "TP";
    case PointCategory::FalsePositive: return "FP";
    case PointCategory::FalseNegative: return "FN";
    case PointCategory::TrueNegative: return "TN";
  }
  return "?";
}

constexpr PointCategory categorize(bool selected, bool member) noexcept {
  if (selected) return member ? PointCategory::TruePositive : PointCategory::FalseNegative;
  return member ? PointCategory::FalsePositive : PointCategory::TrueNegative;
}

inline void check_dims(const Predicate& pred, std::size_t n_dims) {
  for (const auto& c : pred.clauses()) {
    if (c.dim >= n_dims) {
      throw Error(ErrorCode::InvalidPredicate, "clause dimension out of range",
                  "dim " + std::to_string(c.dim));
    }
  }
}

/// Membership of every dataset row. Endpoints are inclusive.
inline Labels evaluate_predicate(const Predicate& pred, const Dataset& ds) {
  check_dims(pred, ds.n_dims());
  Labels out(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) out[i] = pred.contains(ds.values().row(i)) ? 1 : 0;
  return out;
}

/// Membership restricted to the rows a selection covers, aligned with its labels.
inline Labels evaluate_predicate(const Predicate& pred, const Dataset& ds,
                                 const LabeledSelection& sel) {
  check_dims(pred, ds.n_dims());
  sel.check_against(ds);
  Labels out(sel.size());
  for (std::size_t k = 0; k < sel.size(); ++k) {
    out[k] = pred.contains(ds.values().row(sel.row(k))) ? 1 : 0;
  }
  return out;
}

inline std::vector<PointCategory> categorize(std::span<const std::uint8_t> membership,
                                             std::span<const std::uint8_t> labels) {
  if (membership.size() != labels.size()) {
    throw Error(ErrorCode::InvalidInput, "membership and labels differ in length");
  }
  std::vector<PointCategory> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = categorize(labels[i] != 0, membership[i] != 0);
  }
  return out;
}

inline std::vector<PointCategory> categorize(const Predicate& pred, const LabeledSelection& sel,
                                             const Dataset& ds) {
  const Labels membership = evaluate_predicate(pred, ds, sel);
  return categorize(membership, sel.labels());
}

struct ClampedPredicate {
  Predicate predicate;
  /// Dimensions whose clause missed the extent entirely and collapsed to a bound.
  std::vector<std::size_t> degenerate_dims;
};

/// Intersects every clause with its dimension's extent, for display.
inline ClampedPredicate clamp_to_extent(const Predicate& pred, const Dataset& ds) {
  check_dims(pred, ds.n_dims());
  ClampedPredicate out;
  std::vector<Clause> clauses;
  clauses.reserve(pred.size());
  for (const auto& c : pred.clauses()) {
    const Extent& e = ds.extent(c.dim);
    Clause clamped{c.dim, std::max(c.lo, e.min), std::min(c.hi, e.max)};
    if (clamped.lo > clamped.hi) {
      const double bound = c.hi < e.min ? e.min : e.max;
      clamped.lo = clamped.hi = bound;
      out.degenerate_dims.push_back(c.dim);
    }
    clauses.push_back(clamped);
  }
  out.predicate = Predicate(std::move(clauses));
  return out;
}

}  // namespace predind
