#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "predind/ingest.hpp"

namespace {

using namespace predind;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected predind::Error";
  return ErrorCode::InvalidInput;
}

TEST(Csv, QuotedFieldsAndLineEndings) {
  const auto recs = csv::parse("\xEF\xBB\xBF" "a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0], (csv::Record{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(recs[1], (csv::Record{"1", "2", "3"}));
  EXPECT_FALSE(csv::parse_finite("nan"));
  EXPECT_FALSE(csv::parse_finite("inf"));
  EXPECT_FALSE(csv::parse_finite("1.5x"));
  EXPECT_EQ(*csv::parse_finite(" 2.5 "), 2.5);
}

TEST(LoadCsv, PartitionsProjectionAndDimensionColumns) {
  IngestConfig cfg;
  cfg.projection_columns = std::pair{"x", "y"};
  const auto r = load_csv_text("a,b,x,y\n1,2,0.1,0.2\n3,4,0.3,0.4\n5,6,0.5,0.6\n", cfg);
  EXPECT_EQ(r.dataset.n_dims(), 2u);
  EXPECT_EQ(r.dataset.dim_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.dataset.projection()(2, 1), 0.6);
  EXPECT_FALSE(r.report.projection_from_pca);
  EXPECT_EQ(r.report.rows_loaded, 3u);
}

TEST(LoadCsv, RejectsRowsWithNaN) {
  IngestConfig cfg;
  cfg.projection_columns = std::pair{"x", "y"};
  const auto r = load_csv_text("a,b,x,y\n1,2,0,0\n3,NaN,1,1\n5,6,2,2\n", cfg);
  EXPECT_EQ(r.dataset.n_rows(), 2u);
  ASSERT_EQ(r.report.rows_rejected.size(), 1u);
  EXPECT_EQ(r.report.rows_rejected[0].row, 2u);
  EXPECT_EQ(r.dataset.row_ids(), (std::vector<std::string>{"1", "3"}));
}

TEST(LoadCsv, RejectsRowsWithWrongFieldCount) {
  const auto r = load_csv_text("a,b\n1,2\n3\n4,5\n6,7\n");
  EXPECT_EQ(r.report.rows_rejected.size(), 1u);
  EXPECT_EQ(r.dataset.n_rows(), 3u);
}

TEST(LoadCsv, IgnoresTextColumnsWithWarning) {
  const auto r = load_csv_text("name,a,b\nfoo,1,2\nbar,3,5\nbaz,4,4\n");
  EXPECT_EQ(r.dataset.dim_names(), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(r.report.warnings.size(), 1u);
  EXPECT_NE(r.report.warnings[0].find("name"), std::string::npos);
}

TEST(LoadCsv, Errors) {
  EXPECT_EQ(code_of([] { load_csv_text(""); }), ErrorCode::Format);
  EXPECT_EQ(code_of([] { load_csv_text("a,b\nx,y\nz,w\n"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([] { load_csv_text("a,b\n"); }), ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([] { load_csv_text("a,b\n1,nan\n"); }), ErrorCode::EmptyDataset);
  IngestConfig no_pca;
  no_pca.pca_fallback = false;
  EXPECT_EQ(code_of([&] { load_csv_text("a,b\n1,2\n3,4\n", no_pca); }), ErrorCode::MissingProjection);
  IngestConfig missing;
  missing.projection_columns = std::pair{"x", "q"};
  EXPECT_EQ(code_of([&] { load_csv_text("a,x\n1,2\n", missing); }), ErrorCode::Format);
  EXPECT_EQ(code_of([] { load_csv_file("/nonexistent/file.csv"); }), ErrorCode::InvalidInput);
}

TEST(LoadCsv, ConstantDimensionsReported) {
  const auto r = load_csv_text("a,b,c\n1,7,0\n2,7,1\n3,7,5\n");
  EXPECT_EQ(r.report.constant_dims, std::vector<std::string>{"b"});
}

TEST(LoadCsv, DeterministicAndRoundTripsFixtureCsv) {
  const auto pb = support::planted_box(3, 200, 10);
  const std::string text = support::to_csv(pb.ds);
  IngestConfig cfg;
  cfg.projection_columns = std::pair{"x", "y"};
  const auto a = load_csv_text(text, cfg);
  std::istringstream in(text);
  const auto b = load_csv(in, cfg);
  ASSERT_EQ(a.dataset.n_rows(), 200u);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(a.dataset.value(i, j), pb.ds.value(i, j));
      EXPECT_EQ(a.dataset.value(i, j), b.dataset.value(i, j));
    }
  }
}

TEST(Pca, MatchesJacobiOracleOnSmallTable) {
  // 10 x 4 table with distinct variances along mixed axes.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix v(10, 4);
  for (std::size_t i = 0; i < 10; ++i) {
    const double s = 3.0 * g(rng), t = 1.5 * g(rng), u = 0.5 * g(rng), w = 0.1 * g(rng);
    v(i, 0) = s + t;
    v(i, 1) = s - t + u;
    v(i, 2) = u + w;
    v(i, 3) = 0.5 * s + w;
  }
  const Matrix proj = pca_2d(v);
  const auto eig = support::jacobi_eigen(support::covariance(v), 4);

  std::vector<double> mean(4, 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 4; ++j) mean[j] += v(i, j) / 10.0;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> vec = eig.vectors[k];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < 4; ++j) {
      if (std::abs(vec[j]) > std::abs(vec[arg])) arg = j;
    }
    if (vec[arg] < 0) {
      for (auto& e : vec) e = -e;
    }
    double var = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      double score = 0.0;
      for (std::size_t j = 0; j < 4; ++j) score += (v(i, j) - mean[j]) * vec[j];
      EXPECT_NEAR(proj(i, k), score, 1e-9);
      var += proj(i, k) * proj(i, k) / 9.0;
    }
    EXPECT_NEAR(var, eig.values[k], 1e-9 * eig.values[0]);
  }
  EXPECT_GT(eig.values[0], eig.values[1]);
}

TEST(Pca, AxisAlignedDataRecoversAxes) {
  Matrix v(6, 2, {-3, 0, 3, 0, 0, 0.5, 0, -0.5, 0, 0, 0, 0});
  const Matrix proj = pca_2d(v);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(proj(i, 0), v(i, 0), 1e-12);
    EXPECT_NEAR(proj(i, 1), v(i, 1), 1e-12);
  }
}

TEST(Pca, RankOneDataHasZeroSecondComponent) {
  Matrix v(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    v(i, 0) = static_cast<double>(i);
    v(i, 1) = 2.0 * static_cast<double>(i) + 1.0;
  }
  const Matrix proj = pca_2d(v);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(proj(i, 1), 0.0, 1e-9);
}

TEST(Pca, TwoRowsGiveDistinctPoints) {
  const Matrix proj = pca_2d(Matrix(2, 3, {1, 2, 3, 4, 0, -1}));
  EXPECT_NE(proj(0, 0), proj(1, 0));
}

TEST(Pca, IdenticalRowsAreDegenerate) {
  EXPECT_EQ(code_of([] { pca_2d(Matrix(3, 2, {1, 1, 1, 1, 1, 1})); }), ErrorCode::DegenerateProjection);
  EXPECT_EQ(code_of([] { load_csv_text("a,b\n1,2\n1,2\n"); }), ErrorCode::DegenerateProjection);
}

TEST(LoadCsv, PcaFallbackWhenNoProjection) {
  const auto r = load_csv_text("a,b,c\n1,2,0\n2,1,1\n3,5,5\n4,4,2\n");
  EXPECT_TRUE(r.report.projection_from_pca);
  EXPECT_EQ(r.dataset.n_dims(), 3u);
}

TEST(Normalize, MinMaxAndConstantDims) {
  const Dataset ds({"a", "k"}, Matrix(3, 2, {2, 7, 4, 7, 6, 7}), Matrix(3, 2));
  const NormalizedView view = normalize(ds);
  EXPECT_EQ(view.values()(0, 0), 0.0);
  EXPECT_EQ(view.values()(1, 0), 0.5);
  EXPECT_EQ(view.values()(2, 0), 1.0);
  EXPECT_TRUE(view.constant(1));
  EXPECT_FALSE(view.constant(0));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(view.values()(i, 1), 0.5);
  EXPECT_EQ(view.denormalize(1, 0.9), 7.0);
}

TEST(Normalize, RoundTripWithinTolerance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix v(30, 3);
    for (std::size_t i = 0; i < 30; ++i) {
      v(i, 0) = wide(rng);
      v(i, 1) = 1e-3 * wide(rng) + 42.0;
      v(i, 2) = wide(rng) * wide(rng);
    }
    const Dataset ds(support::dim_names(3), v, Matrix(30, 2));
    const NormalizedView view(ds);
    for (std::size_t j = 0; j < 3; ++j) {
      double lo = 1.0, hi = 0.0;
      for (std::size_t i = 0; i < 30; ++i) {
        const double x = ds.value(i, j);
        const double u = view.values()(i, j);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        // Relative to the column's magnitude; a value near zero inside a
        // wide column cannot be recovered to its own relative precision.
        const double mag = std::max(std::abs(ds.extent(j).min), std::abs(ds.extent(j).max));
        EXPECT_LE(std::abs(view.denormalize(j, u) - x), 1e-12 * mag);
      }
      EXPECT_EQ(lo, 0.0);
      EXPECT_EQ(hi, 1.0);
      EXPECT_EQ(view.denormalize(j, 0.0), ds.extent(j).min);
      EXPECT_EQ(view.denormalize(j, 1.0), ds.extent(j).max);
    }
  }
}

}  // namespace
