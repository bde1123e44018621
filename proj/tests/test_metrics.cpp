#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmon/clustering.hpp"
#include "cmon/metrics.hpp"
#include "oracles.hpp"

using namespace cmon;

namespace {

std::vector<Label> labels_of(std::initializer_list<int> v) {
  std::vector<Label> out;
  for (int b : v) out.push_back(to_label(b != 0));
  return out;
}

}  // namespace

TEST(Confusion, CountsAndScores) {
  const auto pred = labels_of({1, 1, 0, 0, 1, 0});
  const auto truth = labels_of({1, 0, 0, 1, 1, 0});
  const ConfusionMatrix m = confusion(pred, truth);
  EXPECT_EQ(m, (ConfusionMatrix{2, 1, 2, 1}));
  const Scores s = prf_accuracy(m);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.accuracy, 4.0 / 6.0);
  EXPECT_FALSE(s.degenerate);
  EXPECT_THROW(confusion(pred, labels_of({1})), Error);
}

TEST(Confusion, ZeroOverZeroIsZeroAndFlagged) {
  const Scores none = prf_accuracy({0, 0, 5, 0});  // nothing predicted, nothing positive
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(none.accuracy, 1.0);
  EXPECT_TRUE(none.degenerate);
  EXPECT_THROW(prf_accuracy({}), Error);
}

TEST(F1, HarmonicMeanProperties) {
  EXPECT_DOUBLE_EQ(f1_score(1.0, 1.0), 1.0);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), r = u(rng);
    const double f = f1_score(p, r);
    EXPECT_LE(f, std::max(p, r) + 1e-15);
    EXPECT_GE(f, std::min(p, r) - 1e-15);
    EXPECT_NEAR(f, 1.0 / (0.5 / p + 0.5 / r), 1e-12);
  }
}

TEST(Roc, MatchesMannWhitneyOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 10) / 4.0;  // many ties
      y[i] = to_label(rng() % 2);
    }
    y[0] = Label::fault;
    y[1] = Label::normal;
    EXPECT_NEAR(roc_auc(s, y).auc, oracle::auc(s, y), 1e-12);
  }
}

TEST(Roc, CurveShape) {
  const std::vector<double> s{0.9, 0.8, 0.8, 0.1};
  const auto y = labels_of({1, 1, 0, 0});
  const RocCurve c = roc_auc(s, y);
  ASSERT_EQ(c.points.size(), 4u);
  EXPECT_EQ(c.points.front().fpr, 0.0);
  EXPECT_EQ(c.points.front().tpr, 0.0);
  EXPECT_EQ(c.points[1].tpr, 0.5);
  EXPECT_EQ(c.points[2].fpr, 0.5);  // tied scores form one step
  EXPECT_EQ(c.points[2].tpr, 1.0);
  EXPECT_EQ(c.points.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(c.auc, 0.875);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
    EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
  }
}

TEST(Roc, PerfectInvertedAndSingleClass) {
  EXPECT_EQ(roc_auc(std::vector<double>{3, 2, 1}, labels_of({1, 0, 0})).auc, 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{1, 2, 3}, labels_of({1, 0, 0})).auc, 0.0);
  EXPECT_EQ(roc_auc(std::vector<double>{1, 1, 1}, labels_of({1, 0, 0})).auc, 0.5);
  try {
    roc_auc(std::vector<double>{1, 2}, labels_of({0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Silhouette, HandComputed) {
  // clusters {0, 1} and {4}; item 2 is noise
  const Matrix x(4, 1, {0, 1, 100, 4});
  const std::vector<int> a{0, 0, kNoise, 1};
  const Silhouette s = silhouette(x, a);
  // item0: a=1, b=4 -> 0.75 ; item1: a=1, b=3 -> 2/3 ; item3: singleton -> 0
  EXPECT_NEAR(s.mean, (0.75 + 2.0 / 3.0 + 0.0) / 3.0, 1e-15);
  EXPECT_EQ(s.noise_excluded, 1u);
  EXPECT_THROW(silhouette(x, std::vector<int>{0, 0, 0, 0}), Error);
}

TEST(Silhouette, Bounded) {
  std::mt19937_64 rng(3);
  const Matrix x = oracle::random_matrix(50, 2, rng);
  const Clustering c = kmeans(x, 4, 100, 1);
  const double s = silhouette(x, c.assignments).mean;
  EXPECT_GE(s, -1.0);
  EXPECT_LE(s, 1.0);
}

TEST(Cpcc, OneOnUltrametricInput) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(3 + rng() % 10, 2, rng);
    for (Linkage l : {Linkage::average, Linkage::single, Linkage::complete}) {
      const Dendrogram d = build_dendrogram(x, l);
      // cophenetic distances of any dendrogram are an ultrametric it reproduces exactly
      EXPECT_NEAR(cpcc(d, oracle::cophenetic(d)), 1.0, 1e-9);
    }
  }
}

TEST(Cpcc, MatchesPearsonOracle) {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_matrix(12, 3, rng);
  const Dendrogram d = build_dendrogram(x, Linkage::average);
  const Matrix dist = pairwise_distances(x);
  const Matrix coph = oracle::cophenetic(d);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = i + 1; j < 12; ++j) {
      a.push_back(coph(i, j));
      b.push_back(oracle::euclid(x.row(i), x.row(j)));
    }
  }
  EXPECT_NEAR(cpcc(d, dist), oracle::pearson(a, b), 1e-12);
  EXPECT_THROW(cpcc(d, Matrix(3, 3)), Error);
}

TEST(Cpcc, ZeroVarianceIsDegenerate) {
  const Matrix x(3, 2, {0, 0, 1, 0, 0.5, std::sqrt(0.75)});  // equilateral triangle
  const Dendrogram d = build_dendrogram(x, Linkage::single);
  try {
    cpcc(d, pairwise_distances(x));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}
