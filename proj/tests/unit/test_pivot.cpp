#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tlf/errors.hpp"
#include "tlf/forest.hpp"
#include "tlf/pivot.hpp"

using namespace tlf;

namespace {

// Textbook definition with natural logs, converted to bits at the end.
double jsd_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (p[i] + q[i]) / 2.0;
    if (p[i] > 0) total += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0) total += 0.5 * q[i] * std::log(q[i] / m);
  }
  return total / std::log(2.0);
}

DistributionBundle bundle(const std::vector<std::vector<double>>& rows, const std::vector<std::vector<double>>& cents,
                          std::vector<AttributeKind> kinds, std::size_t classes = 2) {
  DistributionBundle b;
  b.distributions.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(classes));
  b.centroids.resize(static_cast<Eigen::Index>(cents.size()), static_cast<Eigen::Index>(kinds.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < classes; ++c) b.distributions(i, c) = rows[i][c];
    for (std::size_t j = 0; j < kinds.size(); ++j) b.centroids(i, j) = cents[i][j];
    b.labels.push_back(static_cast<int>(std::max_element(rows[i].begin(), rows[i].end()) - rows[i].begin()));
  }
  b.kinds = std::move(kinds);
  b.class_names = tlf::testing::class_list(classes);
  return b;
}

}  // namespace

TEST(NumericCentroid, MeanPlusLogOfSampleStd) {
  EXPECT_DOUBLE_EQ(numeric_centroid(std::vector<double>{1, 2, 3}), 2.0);
  EXPECT_DOUBLE_EQ(numeric_centroid(std::vector<double>{5, 5}), 5.0);
  EXPECT_DOUBLE_EQ(numeric_centroid(std::vector<double>{7}), 7.0);
  // {0, 4}: mean 2, sample std sqrt(8)
  EXPECT_NEAR(numeric_centroid(std::vector<double>{0, 4}), 2.0 + std::log(std::sqrt(8.0)), 1e-15);
  EXPECT_THROW(numeric_centroid(std::vector<double>{}), DataError);
}

TEST(ExtractDistributions, CountsLabelsAndComputesCentroids) {
  const auto ds = tlf::testing::read_text("a,b,label\n1,x,A\n2,y,A\n3,y,B\n9,x,B\n");
  std::vector<LeafRef> leaves{{0, 0, {0, 1, 2}}, {0, 1, {3}}};
  const auto b = extract_distributions(ds, leaves);
  ASSERT_EQ(b.rows(), 2u);
  EXPECT_NEAR(b.distributions(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.distributions(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(b.labels[0], 0);
  EXPECT_EQ(b.labels[1], 1);
  EXPECT_DOUBLE_EQ(b.centroids(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(b.centroids(0, 1), 1.0);  // mode y
  EXPECT_DOUBLE_EQ(b.centroids(1, 0), 9.0);
}

TEST(ExtractDistributions, ArgmaxTieGoesToLowestClass) {
  const auto ds = tlf::testing::read_text("a,label\n1,A\n2,B\n");
  std::vector<LeafRef> leaves{{0, 0, {1, 0}}};
  EXPECT_EQ(extract_distributions(ds, leaves).labels[0], 0);
}

TEST(ExtractDistributions, EmptyLeafIsAnError) {
  const auto ds = tlf::testing::read_text("a,label\n1,A\n2,B\n");
  std::vector<LeafRef> leaves{{0, 0, {}}};
  EXPECT_THROW(extract_distributions(ds, leaves), DataError);
}

TEST(ExtractDistributions, RowsAreDistributionsOnRealForests) {
  std::mt19937_64 rng(3);
  const auto blobs = tlf::testing::make_blobs(3, 5, 1.0, rng);
  const auto ds = blobs.sample(300, rng);
  const auto leaves = collect_leaves(train_forest(ds, 5, 5, 1));
  const auto b = extract_distributions(ds, leaves);
  for (std::size_t i = 0; i < b.rows(); ++i) {
    EXPECT_NEAR(b.distributions.row(i).sum(), 1.0, 1e-9);
    EXPECT_GE(b.distributions.row(i).minCoeff(), 0.0);
    Eigen::Index best;
    b.distributions.row(i).maxCoeff(&best);
    EXPECT_EQ(b.labels[i], best);
  }
}

TEST(Dedup, IdenticalRowsAverageTheirCentroids) {
  const auto b = bundle({{0.5, 0.5}, {0.5, 0.5}}, {{2.0}, {4.0}}, {AttributeKind::numeric});
  const auto d = dedup(b);
  ASSERT_EQ(d.rows(), 1u);
  EXPECT_DOUBLE_EQ(d.centroids(0, 0), 3.0);
}

TEST(Dedup, DistinctRowsAreUnchanged) {
  const auto b = bundle({{1, 0}, {0.25, 0.75}}, {{2.0}, {4.0}}, {AttributeKind::numeric});
  const auto d = dedup(b);
  EXPECT_EQ(d.distributions, b.distributions);
  EXPECT_EQ(d.centroids, b.centroids);
  EXPECT_EQ(d.labels, b.labels);
}

TEST(Dedup, CategoricalCentroidsTakeTheModeOfModes) {
  const auto b = bundle({{1, 0}, {1, 0}, {1, 0}}, {{0}, {0}, {1}}, {AttributeKind::categorical});
  const auto d = dedup(b);
  ASSERT_EQ(d.rows(), 1u);
  EXPECT_DOUBLE_EQ(d.centroids(0, 0), 0.0);
}

TEST(Dedup, RoundsToSixDecimals) {
  const auto b = bundle({{1.0 / 3.0, 2.0 / 3.0}, {0.3333333, 0.6666667}, {0.33334, 0.66666}},
                        {{1}, {2}, {3}}, {AttributeKind::numeric});
  const auto r = dedup_with_map(b);
  EXPECT_EQ(r.bundle.rows(), 2u);
  EXPECT_EQ(r.row_of, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(Dedup, IsIdempotent) {
  std::mt19937_64 rng(11);
  const auto blobs = tlf::testing::make_blobs(3, 4, 1.0, rng);
  const auto ds = blobs.sample(200, rng);
  const auto b = extract_distributions(ds, collect_leaves(train_forest(ds, 10, 3, 2)));
  const auto once = dedup(b);
  const auto twice = dedup(once);
  EXPECT_LT(once.rows(), b.rows());
  EXPECT_EQ(twice.distributions, once.distributions);
  EXPECT_EQ(twice.centroids, once.centroids);
  EXPECT_EQ(twice.labels, once.labels);
}

TEST(Jsd, KnownValues) {
  const std::vector<double> a{1, 0}, b{0, 1}, p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_EQ(jsd(a, b), 1.0);
  EXPECT_EQ(jsd(p, p), 0.0);
  EXPECT_NEAR(jsd(p, q), 0.048795, 1e-6);
  EXPECT_NEAR(jsd(p, q), jsd_oracle(p, q), 1e-15);
}

TEST(Jsd, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> classes(2, 10);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = classes(rng);
    const auto p = tlf::testing::random_distribution(rng, c);
    const auto q = tlf::testing::random_distribution(rng, c);
    const double v = jsd(p, q);
    EXPECT_NEAR(v, jsd_oracle(p, q), 1e-12);
    EXPECT_EQ(v, jsd(q, p));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Jsd, RejectsInvalidInputs) {
  const std::vector<double> two{0.5, 0.5}, three{0.2, 0.3, 0.5}, bad{0.7, 0.7}, neg{1.5, -0.5};
  EXPECT_THROW(jsd(two, three), DataError);
  EXPECT_THROW(jsd(two, bad), DataError);
  EXPECT_THROW(jsd(neg, two), DataError);
}

TEST(SelectPivotPairs, KeepsOnlyBelowThreshold) {
  Eigen::MatrixXd d(1, 2);
  d << 0.05, 0.2;
  const auto pairs = select_pivot_pairs(d, 0.1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].target_row, 0u);
}

TEST(SelectPivotPairs, GreedyOneToOne) {
  Eigen::MatrixXd d(2, 1);
  d << 0.01, 0.02;
  const auto pairs = select_pivot_pairs(d, 0.1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (PivotPair{0, 0, 0.01}));
}

TEST(SelectPivotPairs, RandomMatricesGiveOneToOneBelowThreshold) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd d(1 + trial % 7, 1 + trial % 5);
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = u(rng);
    const auto pairs = select_pivot_pairs(d, 0.1);
    std::set<std::size_t> s, t;
    for (const auto& p : pairs) {
      EXPECT_LT(p.divergence, 0.1);
      EXPECT_TRUE(s.insert(p.source_row).second);
      EXPECT_TRUE(t.insert(p.target_row).second);
    }
    // Maximality: any remaining cell below threshold touches a used row or column.
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      for (Eigen::Index k = 0; k < d.cols(); ++k) {
        if (d(i, k) < 0.1) EXPECT_TRUE(s.count(i) || t.count(k));
      }
    }
  }
}

TEST(MatchPivots, IdenticalSingleRowBundles) {
  const auto b = bundle({{0.3, 0.7}}, {{1.5}}, {AttributeKind::numeric});
  const auto p = match_pivots(b, b, 0.1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.pairs[0].divergence, 0.0);
  EXPECT_EQ(p.source_centroids(0, 0), 1.5);
  EXPECT_EQ(p.source_labels, (std::vector<int>{1}));
}

TEST(MatchPivots, ComparesOverSharedClassesOnly) {
  auto src = bundle({{0.5, 0.25, 0.25}}, {{1}}, {AttributeKind::numeric}, 3);
  src.class_names = {"a", "b", "only_src"};
  auto tgt = bundle({{0.25, 0.5, 0.25}}, {{2}}, {AttributeKind::numeric}, 3);
  tgt.class_names = {"b", "a", "only_tgt"};
  const auto p = match_pivots(src, tgt, 0.1);
  EXPECT_EQ(p.shared_classes, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(p.size(), 1u);
  // Restricted to {a, b}: source (2/3, 1/3), target a=0.5/0.75, b=0.25/0.75.
  EXPECT_NEAR(p.pairs[0].divergence, 0.0, 1e-15);
}

TEST(MatchPivots, DisjointClassesAreAnError) {
  auto src = bundle({{1, 0}}, {{1}}, {AttributeKind::numeric});
  auto tgt = src;
  tgt.class_names = {"x", "y"};
  EXPECT_THROW(match_pivots(src, tgt, 0.1), DataError);
}

TEST(MatchPivots, RowsWithoutSharedMassNeverMatch) {
  auto src = bundle({{0, 1}}, {{1}}, {AttributeKind::numeric});
  src.class_names = {"a", "z"};
  auto tgt = bundle({{1, 0}}, {{1}}, {AttributeKind::numeric});
  tgt.class_names = {"a", "b"};
  EXPECT_EQ(match_pivots(src, tgt, 0.99).size(), 0u);
}

TEST(PivotJson, CarriesPairsAndCentroids) {
  const auto b = bundle({{0.3, 0.7}}, {{1.5}}, {AttributeKind::numeric});
  const auto j = to_json(match_pivots(b, b, 0.1));
  EXPECT_EQ(j.at("pairs").size(), 1u);
  EXPECT_TRUE(to_json(b).contains("distributions"));
}
