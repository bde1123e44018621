#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmon/som.hpp"
#include "oracles.hpp"

using namespace cmon;

namespace {

SomGrid random_grid(std::size_t rows, std::size_t cols, std::size_t dim, std::mt19937_64& rng) {
  SomGrid g;
  g.rows = rows;
  g.cols = cols;
  g.dim = dim;
  g.weights = oracle::random_matrix(rows * cols, dim, rng);
  return g;
}

Matrix two_clusters(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.03);
  Matrix m;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = i % 2 ? 0.8 : 0.2;
    m.append_row(std::vector<double>{c + g(rng), c + g(rng), 1.0 - c + g(rng)});
  }
  return m;
}

double mean_qe(const SomGrid& g, const Matrix& x) {
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += quantization_error(g, x.row(i));
  return s / static_cast<double>(x.rows());
}

}  // namespace

TEST(Bmu, MatchesExhaustiveScan) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12, dim = 1 + rng() % 6;
    const SomGrid g = random_grid(rows, cols, dim, rng);
    const Matrix x = oracle::random_matrix(1, dim, rng, -0.5, 1.5);
    const Bmu got = bmu(g, x.row(0));
    const auto want = oracle::bmu(g, x.row(0));
    EXPECT_EQ(got.row * cols + got.col, want.index);
    EXPECT_EQ(got.distance, want.distance);
    EXPECT_EQ(quantization_error(g, x.row(0)), want.distance);
  }
}

TEST(Bmu, TiesGoToSmallestLinearIndex) {
  SomGrid g;
  g.rows = 2;
  g.cols = 2;
  g.dim = 1;
  g.weights = Matrix(4, 1, {3.0, 1.0, -1.0, 1.0});
  const Bmu b = bmu(g, std::vector<double>{0.0});
  EXPECT_EQ(b.row, 0u);
  EXPECT_EQ(b.col, 1u);
  EXPECT_DOUBLE_EQ(b.distance, 1.0);
}

TEST(Bmu, DimensionMismatchThrows) {
  std::mt19937_64 rng(1);
  const SomGrid g = random_grid(2, 2, 3, rng);
  EXPECT_THROW(bmu(g, std::vector<double>{1.0, 2.0}), Error);
}

TEST(Schedule, ExponentialDecayEndpoints) {
  TrainSchedule s;
  s.initial_rate = 0.5;
  s.final_rate = 0.01;
  s.final_radius = 1.0;
  EXPECT_DOUBLE_EQ(s.rate_at(0, 100), 0.5);
  EXPECT_NEAR(s.rate_at(100, 100), 0.01, 1e-15);
  EXPECT_NEAR(s.rate_at(50, 100), std::sqrt(0.5 * 0.01), 1e-15);
  EXPECT_DOUBLE_EQ(s.radius_at(10.0, 0, 100), 10.0);
  EXPECT_NEAR(s.radius_at(10.0, 50, 100), std::sqrt(10.0), 1e-12);
  s.initial_rate = 0.0;
  s.final_rate = 0.0;
  EXPECT_EQ(s.rate_at(3, 10), 0.0);
}

TEST(Init, UnitsAreTrainingRows) {
  const Matrix x = two_clusters(50, 2);
  const SomGrid g = init_grid(4, 5, x, 9);
  EXPECT_EQ(g.units(), 20u);
  for (std::size_t u = 0; u < g.units(); ++u) {
    bool found = false;
    for (std::size_t i = 0; i < x.rows() && !found; ++i) {
      found = std::equal(x.row(i).begin(), x.row(i).end(), g.weights.row(u).begin());
    }
    EXPECT_TRUE(found);
  }
  EXPECT_EQ(init_grid(4, 5, x, 9), g);
}

TEST(Train, OneStepMatchesHandComputedUpdate) {
  // One sample, one epoch: the update uses sigma0 and alpha0 exactly.
  std::mt19937_64 rng(4);
  SomGrid g = random_grid(3, 4, 2, rng);
  const Matrix x(1, 2, {0.25, 0.75});
  TrainSchedule s;
  s.epochs = 1;
  s.initial_radius = 1.5;
  s.final_radius = 0.5;
  s.initial_rate = 0.4;
  s.final_rate = 0.1;
  const auto b = oracle::bmu(g, x.row(0));
  const double br = static_cast<double>(b.index / 4), bc = static_cast<double>(b.index % 4);
  const SomGrid t = train(g, x, s, 1);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double d2 = (r - br) * (r - br) + (c - bc) * (c - bc);
      const double h = std::exp(-d2 / (2 * 1.5 * 1.5));
      for (std::size_t k = 0; k < 2; ++k) {
        const double w = g.unit(r, c)[k];
        EXPECT_NEAR(t.unit(r, c)[k], w + 0.4 * h * (x(0, k) - w), 1e-14);
      }
    }
  }
  EXPECT_EQ(t.trained_epochs, 1u);
}

TEST(Train, CutoffLeavesDistantUnitsUntouched) {
  std::mt19937_64 rng(5);
  const SomGrid g = random_grid(1, 10, 1, rng);
  const Matrix x(1, 1, {g.unit(0, 0)[0] - 1e-3});
  TrainSchedule s;
  s.epochs = 1;
  s.initial_radius = 1.0;
  s.final_radius = 1.0;
  s.neighborhood_cutoff = 3.0;
  const SomGrid t = train(g, x, s, 1);
  const auto b = oracle::bmu(g, x.row(0));
  for (std::size_t c = 0; c < 10; ++c) {
    const double d = std::abs(static_cast<double>(c) - static_cast<double>(b.index));
    if (d > 3.0) {
      EXPECT_EQ(t.unit(0, c)[0], g.unit(0, c)[0]) << c;
    }
  }
}

TEST(Train, ZeroRateIsIdentity) {
  const Matrix x = two_clusters(40, 1);
  const SomGrid g = init_grid(3, 3, x, 1);
  TrainSchedule s;
  s.initial_rate = 0.0;
  s.final_rate = 0.0;
  const SomGrid t = train(g, x, s, 2);
  EXPECT_EQ(t.weights, g.weights);
  EXPECT_EQ(t.trained_epochs, s.epochs);
}

TEST(Train, ReducesQuantizationErrorAndIsDeterministic) {
  const Matrix x = two_clusters(400, 3);
  const SomGrid g = init_grid(6, 6, x, 5);
  TrainSchedule s;
  s.epochs = 10;
  const SomGrid a = train(g, x, s, 8);
  const SomGrid b = train(g, x, s, 8);
  EXPECT_EQ(a, b);
  const Matrix held = two_clusters(200, 99);
  EXPECT_LT(mean_qe(a, held), 0.06);
  // a random map sampled from the data fits worse than the trained one on average
  EXPECT_NE(train(g, x, s, 9).weights, a.weights);
}

TEST(Train, RejectsInvalidSchedules) {
  const Matrix x = two_clusters(10, 3);
  const SomGrid g = init_grid(2, 2, x, 5);
  TrainSchedule s;
  s.epochs = 0;
  EXPECT_THROW(train(g, x, s, 1), Error);
  s = {};
  s.initial_rate = 0.001;  // below the final rate
  EXPECT_THROW(train(g, x, s, 1), Error);
  s = {};
  s.final_radius = 0.0;
  EXPECT_THROW(train(g, x, s, 1), Error);
}

TEST(Persist, JsonRoundTripIsExact) {
  const Matrix x = two_clusters(100, 4);
  SomGrid g = init_grid(4, 3, x, 5);
  g.norm_fingerprint = 0xfeedfacecafebeefULL;
  TrainSchedule s;
  s.epochs = 2;
  s.neighborhood_cutoff = 3.0;
  g = train(g, x, s, 1);
  const nlohmann::json j = to_json(g);
  const SomGrid back = grid_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, g);
  nlohmann::json bad = j;
  bad["format"] = "other";
  EXPECT_THROW(grid_from_json(bad), Error);
  bad = j;
  bad["weights"].erase(0);
  EXPECT_THROW(grid_from_json(bad), Error);
}

TEST(QeSeriesTest, TagsWindowsAndChecksFingerprint) {
  const Matrix x = two_clusters(20, 4);
  SomGrid g = init_grid(3, 3, x, 5);
  g.norm_fingerprint = 42;
  NormalizedWindow a{Timestamp{std::chrono::seconds(100)}, Matrix(2, 3, 0.5), 42};
  NormalizedWindow b{Timestamp{std::chrono::seconds(200)}, Matrix(3, 3, 0.1), 42};
  const std::vector<NormalizedWindow> ws{a, b};
  const QeSeries s = batch_qe(g, ws);
  ASSERT_EQ(s.size(), 5u);
  ASSERT_EQ(s.windows.size(), 2u);
  EXPECT_EQ(s.windows[1].offset, 2u);
  EXPECT_EQ(s.windows[1].rows, 3u);
  EXPECT_EQ(s.windows[1].timestamp, b.timestamp);
  EXPECT_EQ(s.qe[4], quantization_error(g, b.values.row(2)));

  b.norm_fingerprint = 43;
  try {
    batch_qe(g, std::vector<NormalizedWindow>{a, b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
  }
  b.norm_fingerprint = 42;
  EXPECT_THROW(batch_qe(g, std::vector<NormalizedWindow>{b, a}), Error);
}
