#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "predind/data_model.hpp"
#include "predind/error.hpp"

namespace predind {

struct IngestConfig {
  std::optional<std::pair<std::string, std::string>> projection_columns;
  /// Explicit dimension columns; empty selects every numeric non-projection column.
  std::vector<std::string> dimension_columns;
  bool pca_fallback = true;
};

struct RejectedRow {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string reason;
};

struct LoadReport {
  std::size_t rows_loaded = 0;
  std::vector<RejectedRow> rows_rejected;
  std::vector<std::string> constant_dims;
  std::vector<std::string> warnings;
  bool projection_from_pca = false;
};

struct LoadResult {
  Dataset dataset;
  LoadReport report;
};

namespace csv {

using Record = std::vector<std::string>;

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool row_has_content = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (row_has_content || !record.empty()) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
    row_has_content = false;
  };

  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(ErrorCode::Format, "unexpected quote inside unquoted field",
                      "record " + std::to_string(records.size() + 1));
        }
        in_quotes = true;
        field_started = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
        row_has_content = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::Format, "unterminated quoted field");
  end_record();
  return records;
}

inline std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

/// Parses a finite real; NaN, Inf, blanks and trailing junk are rejected.
inline std::optional<double> parse_finite(std::string_view s) noexcept {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace csv

/// Top-2 principal component scores of the mean-centered data. Each
/// eigenvector is signed so its largest-magnitude entry is positive.
inline Matrix pca_2d(const Matrix& values) {
  const auto n = values.rows();
  const auto m = values.cols();
  if (n < 2 || m < 2) throw Error(ErrorCode::InvalidInput, "pca_2d needs at least 2 rows and 2 columns");

  Eigen::MatrixXd centered(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) centered(i, j) = values(i, j);
  }
  const Eigen::RowVectorXd mean = centered.colwise().mean();
  centered.rowwise() -= mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateProjection, "covariance eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const double top = evals(m - 1);
  if (!(top > 1e-12 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff()))) {
    throw Error(ErrorCode::DegenerateProjection, "data has rank 0; all rows are identical");
  }

  Matrix out(n, 2);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(m) - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    const Eigen::VectorXd scores = centered * v;
    for (std::size_t i = 0; i < n; ++i) out(i, static_cast<std::size_t>(k)) = scores(static_cast<Eigen::Index>(i));
  }
  return out;
}

inline LoadResult load_csv_text(std::string_view text, const IngestConfig& cfg = {}) {
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::Format, "missing header row");
  if (records.size() == 1) throw Error(ErrorCode::EmptyDataset, "no data rows");
  const csv::Record& header = records.front();
  const std::size_t n_cols = header.size();

  std::vector<std::string> names;
  names.reserve(n_cols);
  for (const auto& h : header) names.emplace_back(csv::trim(h));
  {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::Format, "duplicate column names in header");
    }
  }
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::Format, "column not found", name);
    return static_cast<std::size_t>(it - names.begin());
  };

  LoadReport report;
  std::optional<std::pair<std::size_t, std::size_t>> proj_cols;
  if (cfg.projection_columns) {
    proj_cols = std::pair{column(cfg.projection_columns->first), column(cfg.projection_columns->second)};
  }

  // A column is numeric when more than half of its non-blank cells parse as numbers.
  std::vector<std::size_t> dim_cols;
  if (!cfg.dimension_columns.empty()) {
    for (const auto& d : cfg.dimension_columns) dim_cols.push_back(column(d));
  } else {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (proj_cols && (c == proj_cols->first || c == proj_cols->second)) continue;
      std::size_t parsed = 0;
      std::size_t nonblank = 0;
      for (std::size_t r = 1; r < records.size(); ++r) {
        if (c >= records[r].size() || csv::trim(records[r][c]).empty()) continue;
        ++nonblank;
        // Non-finite tokens still count as numeric so the row gets rejected instead.
        const auto cell = csv::trim(records[r][c]);
        double tmp = 0.0;
        const auto body = cell.front() == '+' ? cell.substr(1) : cell;
        const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), tmp);
        if (ec == std::errc() && ptr == body.data() + body.size()) ++parsed;
      }
      if (nonblank > 0 && 2 * parsed > nonblank) {
        dim_cols.push_back(c);
      } else {
        report.warnings.push_back("ignored non-numeric column '" + names[c] + "'");
      }
    }
  }
  if (dim_cols.empty()) throw Error(ErrorCode::Format, "no numeric dimensions");

  std::vector<double> values;
  std::vector<double> proj;
  std::vector<std::string> row_ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != n_cols) {
      report.rows_rejected.push_back({r, "expected " + std::to_string(n_cols) + " fields, found " +
                                             std::to_string(rec.size())});
      continue;
    }
    std::vector<double> row;
    row.reserve(dim_cols.size());
    std::string bad;
    for (auto c : dim_cols) {
      if (auto v = csv::parse_finite(rec[c])) row.push_back(*v);
      else if (bad.empty()) bad = names[c];
    }
    std::array<double, 2> p{};
    if (proj_cols) {
      const auto px = csv::parse_finite(rec[proj_cols->first]);
      const auto py = csv::parse_finite(rec[proj_cols->second]);
      if (!px && bad.empty()) bad = names[proj_cols->first];
      if (!py && bad.empty()) bad = names[proj_cols->second];
      if (px && py) p = {*px, *py};
    }
    if (!bad.empty()) {
      report.rows_rejected.push_back({r, "unparseable or non-finite value in column '" + bad + "'"});
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    proj.insert(proj.end(), p.begin(), p.end());
    row_ids.push_back(std::to_string(r));
  }

  const std::size_t n = row_ids.size();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "no usable rows");
  report.rows_loaded = n;

  std::vector<std::string> dim_names;
  for (auto c : dim_cols) dim_names.push_back(names[c]);
  Matrix value_matrix(n, dim_cols.size(), std::move(values));

  Matrix projection;
  if (proj_cols) {
    projection = Matrix(n, 2, std::move(proj));
  } else if (cfg.pca_fallback) {
    projection = pca_2d(value_matrix);
    report.projection_from_pca = true;
  } else {
    throw Error(ErrorCode::MissingProjection, "no projection columns and PCA fallback disabled");
  }

  Dataset ds(std::move(dim_names), std::move(value_matrix), std::move(projection), std::move(row_ids));
  for (std::size_t j = 0; j < ds.n_dims(); ++j) {
    if (ds.extent(j).constant()) report.constant_dims.push_back(ds.dim_names()[j]);
  }
  return {std::move(ds), std::move(report)};
}

inline LoadResult load_csv(std::istream& in, const IngestConfig& cfg = {}) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_csv_text(text, cfg);
}

inline LoadResult load_csv_file(const std::string& path, const IngestConfig& cfg = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open file", path);
  return load_csv(in, cfg);
}

/// Per-dimension min-max scaling to [0,1]; constant dimensions map to 0.5.
class NormalizedView {
 public:
  explicit NormalizedView(const Dataset& ds)
      : values_(ds.n_rows(), ds.n_dims()), offset_(ds.n_dims()), scale_(ds.n_dims()),
        max_(ds.n_dims()), constant_(ds.n_dims()) {
    for (std::size_t j = 0; j < ds.n_dims(); ++j) {
      const Extent& e = ds.extent(j);
      offset_[j] = e.min;
      scale_[j] = e.width();
      max_[j] = e.max;
      constant_[j] = e.constant();
    }
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      for (std::size_t j = 0; j < ds.n_dims(); ++j) {
        values_(i, j) = constant_[j] ? 0.5 : (ds.value(i, j) - offset_[j]) / scale_[j];
      }
    }
  }

  const Matrix& values() const noexcept { return values_; }
  std::size_t n_rows() const noexcept { return values_.rows(); }
  std::size_t n_dims() const noexcept { return values_.cols(); }
  bool constant(std::size_t dim) const { return constant_.at(dim) != 0; }
  double offset(std::size_t dim) const { return offset_.at(dim); }
  double scale(std::size_t dim) const { return scale_.at(dim); }

  double normalize(std::size_t dim, double x) const {
    return constant(dim) ? 0.5 : (x - offset_[dim]) / scale_[dim];
  }

  /// Exact at the extent endpoints; constant dimensions return their single value.
  double denormalize(std::size_t dim, double u) const {
    if (constant(dim) || u == 0.0) return offset_.at(dim);
    if (u == 1.0) return max_.at(dim);
    return offset_[dim] + u * scale_[dim];
  }

 private:
  Matrix values_;
  std::vector<double> offset_;
  std::vector<double> scale_;
  std::vector<double> max_;
  std::vector<std::uint8_t> constant_;
};

inline NormalizedView normalize(const Dataset& ds) { return NormalizedView(ds); }

}  // namespace predind
