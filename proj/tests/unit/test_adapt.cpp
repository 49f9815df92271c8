#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tlf/adapt.hpp"
#include "tlf/errors.hpp"

using namespace tlf;

namespace {

StackedPivots pivots_from(const Eigen::MatrixXd& src, const Eigen::MatrixXd& tgt, std::vector<int> labels,
                          std::size_t classes) {
  StackedPivots p;
  p.source = src;
  p.target = tgt;
  p.labels = std::move(labels);
  p.num_classes = classes;
  return p;
}

StackedPivots random_pivots(std::mt19937_64& rng, std::size_t np, std::size_t classes, std::size_t ds,
                            std::size_t dt) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, static_cast<int>(classes) - 1);
  Eigen::MatrixXd s(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(ds));
  Eigen::MatrixXd t(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(dt));
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = g(rng);
  std::vector<int> labels(2 * np);
  for (auto& y : labels) y = label(rng);
  return pivots_from(s, t, labels, classes);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

TEST(StackPivots, LayoutOfRowsAndEmbeddings) {
  Eigen::MatrixXd s(1, 2), t(1, 3);
  s << 1, 2;
  t << 3, 4, 5;
  const auto p = pivots_from(s, t, {0, 0}, 1);
  EXPECT_EQ(p.z(), 2u);
  Eigen::MatrixXd rows(2, 3);
  rows << 1, 2, 0, 3, 4, 5;
  EXPECT_EQ(p.rows(), rows);
  Eigen::MatrixXd padded(2, 5);
  padded << 1, 2, 0, 0, 0, 0, 0, 3, 4, 5;
  EXPECT_EQ(p.padded(), padded);
  Eigen::MatrixXd gs(2, 2), gt(2, 3);
  gs << 1, 2, 0, 0;
  gt << 0, 0, 0, 3, 4, 5;
  EXPECT_EQ(p.source_embedding(), gs);
  EXPECT_EQ(p.target_embedding(), gt);
}

TEST(StackPivots, ValidateRejectsBadShapes) {
  EXPECT_THROW(pivots_from(Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(1, 1), {0, 0, 0}, 1).validate(),
               DataError);
  EXPECT_THROW(pivots_from(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), {0, 3}, 2).validate(),
               DataError);
}

TEST(BuildKernel, LinearOnKnownRows) {
  // Both rows live in the source block so padding does not separate them.
  Eigen::MatrixXd s(1, 2), t(1, 2);
  s << 1, 0;
  t << 1, 1;
  const auto p = pivots_from(s, t, {0, 0}, 1);
  // Padded: (1,0,0,0) and (0,0,1,1): inner product 0, norms 1 and 2.
  Eigen::MatrixXd expect(2, 2);
  expect << 1, 0, 0, 2;
  EXPECT_EQ(build_kernel(p, KernelKind::linear), expect);
}

TEST(BuildKernel, LinearGramOfRowsOneZeroAndOneOne) {
  // Same-domain pair: the two source pivots (1,0) and (1,1) give [[1,1],[1,2]].
  Eigen::MatrixXd s(2, 2), t = Eigen::MatrixXd::Zero(2, 1);
  s << 1, 0, 1, 1;
  const auto k = build_kernel(pivots_from(s, t, {0, 0, 0, 0}, 1), KernelKind::linear);
  Eigen::Matrix2d expect;
  expect << 1, 1, 1, 2;
  EXPECT_EQ(k.topLeftCorner(2, 2), expect);
}

TEST(BuildKernel, OrthonormalRowsGiveIdentity) {
  Eigen::MatrixXd s(1, 2), t(1, 2);
  s << 0.6, 0.8;
  t << 0, 1;
  EXPECT_TRUE(build_kernel(pivots_from(s, t, {0, 0}, 1), KernelKind::linear).isIdentity(1e-15));
}

TEST(BuildKernel, RbfHasUnitDiagonalAndMedianBandwidth) {
  std::mt19937_64 rng(1);
  const auto p = random_pivots(rng, 4, 2, 3, 3);
  const auto k = build_kernel(p, KernelKind::rbf);
  for (Eigen::Index i = 0; i < k.rows(); ++i) EXPECT_DOUBLE_EQ(k(i, i), 1.0);
  EXPECT_TRUE(k.isApprox(k.transpose()));
  EXPECT_GE(min_eigenvalue(k), -1e-8);
  // Independent bandwidth: median of the 28 pairwise distances.
  const Eigen::MatrixXd x = p.padded();
  std::vector<double> d;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
  }
  std::sort(d.begin(), d.end());
  const double h = (d[13] + d[14]) / 2.0;
  EXPECT_NEAR(k(0, 1), std::exp(-(x.row(0) - x.row(1)).squaredNorm() / (2 * h * h)), 1e-14);
}

TEST(BuildKernel, RbfOnIdenticalRowsIsABandwidthError) {
  // Identical padded rows need both domains at zero.
  const auto p = pivots_from(Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 2), {0, 0}, 1);
  EXPECT_THROW(build_kernel(p, KernelKind::rbf), NumericalError);
}

TEST(BuildKernel, LinearIsPsd) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_GE(min_eigenvalue(build_kernel(random_pivots(rng, 5, 3, 4, 6), KernelKind::linear)), -1e-8);
  }
}

TEST(Mu, FormulaEndpoints) {
  EXPECT_DOUBLE_EQ(mu_from_distances(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(mu_from_distances(2, 2), 0.5);
  EXPECT_DOUBLE_EQ(mu_from_distances(2, 0), 0.0);
  EXPECT_DOUBLE_EQ(mu_from_distances(0, 0), 0.5);
}

TEST(Mu, ADistanceOfSeparableAndIdenticalSets) {
  Eigen::MatrixXd a(3, 1), b(3, 1);
  a << -3, -2, -1;
  b << 1, 2, 3;
  EXPECT_DOUBLE_EQ(a_distance(a, b), 2.0);
  // Identical sets: the best separator is the constant, which errs on half.
  EXPECT_DOUBLE_EQ(a_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(a_distance(a, Eigen::MatrixXd(0, 1)), 0.0);
}

TEST(Mu, StaysInUnitInterval) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const double mu = compute_mu(random_pivots(rng, 2 + trial % 6, 2, 3, 2));
    EXPECT_GE(mu, 0.0);
    EXPECT_LE(mu, 1.0);
  }
}

TEST(MmdMatrix, MarginalBlocksForTwoPivots) {
  const auto p = pivots_from(Eigen::MatrixXd::Ones(2, 1), Eigen::MatrixXd::Ones(2, 1), {0, 1, 0, 1}, 2);
  const auto m = build_mmd_matrix(p, 0.0);
  Eigen::MatrixXd expect(4, 4);
  expect << 0.25, 0.25, -0.25, -0.25, 0.25, 0.25, -0.25, -0.25, -0.25, -0.25, 0.25, 0.25, -0.25, -0.25, 0.25,
      0.25;
  EXPECT_EQ(m, expect);
}

TEST(MmdMatrix, SingletonClassGivesPlusMinusOne) {
  const auto p = pivots_from(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), {0, 0}, 1);
  Eigen::Matrix2d expect;
  expect << 1, -1, -1, 1;
  EXPECT_EQ(build_mmd_matrix(p, 1.0), expect);
}

TEST(MmdMatrix, ConvexCombinationEndpoints) {
  std::mt19937_64 rng(4);
  const auto p = random_pivots(rng, 5, 3, 2, 2);
  const auto m0 = build_mmd_matrix(p, 0.0);
  const auto m1 = build_mmd_matrix(p, 1.0);
  EXPECT_EQ(m0, marginal_mmd_matrix(5));
  const auto mid = build_mmd_matrix(p, 0.3);
  EXPECT_TRUE(mid.isApprox(0.7 * m0 + 0.3 * m1, 1e-14));
}

TEST(MmdMatrix, ClassConditionalOracle) {
  // Independent construction: M_c = e_c e_c^T with e_c = 1/n on source class
  // rows and -1/m on target class rows.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_pivots(rng, 2 + trial % 8, 3, 2, 2);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(p.z(), p.z());
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(p.z());
      double n = 0, m = 0;
      for (std::size_t i = 0; i < p.z(); ++i) {
        if (p.labels[i] == c) (i < p.pivots() ? n : m) += 1;
      }
      for (std::size_t i = 0; i < p.z(); ++i) {
        if (p.labels[i] != c) continue;
        e(i) = i < p.pivots() ? 1.0 / n : -1.0 / m;
      }
      // With one side empty this leaves just the defined within-domain block.
      oracle += e * e.transpose();
    }
    EXPECT_TRUE(build_mmd_matrix(p, 1.0).isApprox(oracle, 1e-13));
  }
}

TEST(MmdMatrix, SquaredCrossTermCompatibilityMode) {
  StackedPivots p = pivots_from(Eigen::MatrixXd::Ones(2, 1), Eigen::MatrixXd::Ones(2, 1), {0, 0, 0, 1}, 2);
  const auto m = build_mmd_matrix(p, 1.0, CrossTermForm::squared);
  // Class 0: n = 2 source rows, m = 1 target row -> cross -1/(4*1).
  EXPECT_DOUBLE_EQ(m(0, 2), -0.25);
  EXPECT_DOUBLE_EQ(build_mmd_matrix(p, 1.0, CrossTermForm::product)(0, 2), -0.5);
}

TEST(MmdMatrix, RowSumsZeroSymmetricAndPsd) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> np(2, 20), cls(2, 5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_pivots(rng, np(rng), cls(rng), 3, 3);
    const auto m0 = marginal_mmd_matrix(p.pivots());
    EXPECT_LT(m0.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    const auto m = build_mmd_matrix(p, u(rng));
    EXPECT_EQ(m, m.transpose());
    EXPECT_GE(min_eigenvalue(m), -1e-8);
  }
}

TEST(AutoK, StoppingRule) {
  const std::vector<int> mixed{0, 1, 0, 0, 1, 0};
  const std::vector<int> run{0, 0, 0, 0, 0, 1, 0};
  const std::vector<int> same{0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(auto_k(mixed, 0), 4u);
  EXPECT_EQ(auto_k(run, 0), 5u);
  EXPECT_EQ(auto_k(same, 0), same.size());
}

TEST(AutoKnn, NeedsFivePivotRows) {
  std::mt19937_64 rng(7);
  EXPECT_THROW(auto_knn(random_pivots(rng, 2, 2, 2, 2), 0), DataError);
  EXPECT_NO_THROW(auto_knn(random_pivots(rng, 3, 2, 2, 2), 0));
}

TEST(AutoKnn, NeighborsBeyondFourShareTheLabel) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_pivots(rng, 3 + trial % 10, 2, 3, 4);
    for (std::size_t i = 0; i < p.z(); ++i) {
      const auto nb = auto_knn(p, i);
      ASSERT_GE(nb.size(), 4u);
      for (std::size_t r = 4; r < nb.size(); ++r) EXPECT_EQ(p.labels[nb[r]], p.labels[i]);
      for (auto j : nb) EXPECT_NE(j, i);
    }
  }
}

TEST(Laplacian, TwoNodeGraph) {
  Eigen::Matrix2d b;
  b << 0, 1, 1, 0;
  Eigen::Matrix2d expect;
  expect << 1, -1, -1, 1;
  EXPECT_TRUE(normalized_laplacian(b).isApprox(expect, 1e-15));
}

TEST(Laplacian, NoEdgesGiveIdentity) {
  EXPECT_EQ(normalized_laplacian(Eigen::MatrixXd::Zero(3, 3)), Eigen::MatrixXd::Identity(3, 3));
}

TEST(Laplacian, SmallGraphsConnectAllOtherRows) {
  Eigen::MatrixXd s(1, 2), t(1, 2);
  s << 1, 0;
  t << 1, 1;
  const auto g = build_laplacian(pivots_from(s, t, {0, 0}, 1));
  EXPECT_NEAR(g.affinity(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(g.affinity(0, 0), 0.0);
}

TEST(Laplacian, SpectrumWithinZeroAndTwo) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_pivots(rng, 3 + trial % 12, 3, 4, 3);
    const auto graph = build_laplacian(p);
    EXPECT_EQ(graph.affinity, graph.affinity.transpose());
    EXPECT_EQ(graph.affinity.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(graph.affinity.minCoeff(), 0.0);
    EXPECT_EQ(graph.laplacian, graph.laplacian.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(graph.laplacian, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 2.0 + 1e-8);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd x(p.z());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
      EXPECT_GE(x.dot(graph.laplacian * x), -1e-8);
    }
  }
}

TEST(ComputeAlpha, LiteralSubstitutions) {
  const Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3), z3 = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd k = Eigen::MatrixXd::Random(3, 3);
  EXPECT_EQ(compute_alpha(k, z3, z3, {0.5, 5, 0.01}, AlphaMode::literal), 0.5 * i3);
  EXPECT_EQ(compute_alpha(i3, i3, z3, {0, 1, 0}, AlphaMode::literal), i3);
  EXPECT_TRUE(compute_alpha(i3, z3, z3, {1, 0, 0}, AlphaMode::inverse).isApprox(i3, 1e-15));
}

TEST(ComputeAlpha, LiteralMatchesDirectEvaluation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_pivots(rng, 2 + trial, 2, 3, 3);
    const auto k = build_kernel(p, KernelKind::linear);
    const auto m = build_mmd_matrix(p, 0.4);
    const auto l = build_laplacian(p).laplacian;
    const Regularization reg{0.001, 5, 0.01};
    Eigen::MatrixXd direct(p.z(), p.z());
    for (Eigen::Index i = 0; i < direct.rows(); ++i) {
      for (Eigen::Index j = 0; j < direct.cols(); ++j) {
        double s = i == j ? reg.ridge : 0.0;
        for (Eigen::Index q = 0; q < direct.rows(); ++q) s += (reg.mmd * m(i, q) + reg.manifold * l(i, q)) * k(q, j);
        direct(i, j) = s;
      }
    }
    EXPECT_LE((compute_alpha(k, m, l, reg, AlphaMode::literal) - direct).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ComputeAlpha, InverseSatisfiesResidualBound) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_pivots(rng, 3 + trial, 3, 4, 4);
    const auto k = build_kernel(p, KernelKind::rbf);
    const auto m = build_mmd_matrix(p, compute_mu(p));
    const auto l = build_laplacian(p).laplacian;
    const Regularization reg{1.0, 5, 0.01};
    const auto alpha = compute_alpha(k, m, l, reg, AlphaMode::inverse);
    const auto a = system_matrix(k, m, l, reg);
    EXPECT_LE((a * alpha - Eigen::MatrixXd::Identity(p.z(), p.z())).norm(), 1e-6 * p.z());
  }
}

TEST(ComputeAlpha, SingularSystemIsANumericalError) {
  const Eigen::MatrixXd z3 = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_THROW(compute_alpha(z3, z3, z3, {0, 5, 0.01}, AlphaMode::inverse), NumericalError);
}

TEST(ComputeAlpha, ShapeAndSignChecks) {
  EXPECT_THROW(compute_alpha(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(2, 2),
                             {}, AlphaMode::literal),
               DataError);
  const Eigen::MatrixXd z2 = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(compute_alpha(z2, z2, z2, {-1, 0, 0}, AlphaMode::literal), DataError);
}

TEST(BuildProjection, HandProduct) {
  Eigen::MatrixXd s(1, 1), t(1, 1), alpha(2, 2);
  s << 2;
  t << 3;
  alpha << 0, 1, 0, 0;
  const auto p = build_projection(pivots_from(s, t, {0, 0}, 1), alpha);
  ASSERT_EQ(p.rows(), 1);
  EXPECT_EQ(p(0, 0), 6.0);
}

TEST(BuildProjection, ZeroAlphaAndShapeErrors) {
  std::mt19937_64 rng(13);
  const auto p = random_pivots(rng, 3, 2, 4, 5);
  const auto proj = build_projection(p, Eigen::MatrixXd::Zero(6, 6));
  EXPECT_EQ(proj.rows(), 4);
  EXPECT_EQ(proj.cols(), 5);
  EXPECT_TRUE(proj.isZero(0));
  EXPECT_THROW(build_projection(p, Eigen::MatrixXd::Zero(5, 5)), DataError);
}

TEST(BuildProjection, MatchesTripleLoop) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_pivots(rng, 3, 2, 6, 6);
    Eigen::MatrixXd alpha(6, 6);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = g(rng);
    const auto gs = p.source_embedding();
    const auto gt = p.target_embedding();
    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(6, 6);
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) brute(a, b) += gs(i, a) * alpha(i, j) * gt(j, b);
        }
      }
    }
    EXPECT_LE((build_projection(p, alpha) - brute).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Adapt, FillsStateAndDiagnostics) {
  std::mt19937_64 rng(15);
  const auto p = random_pivots(rng, 4, 2, 3, 5);
  const auto state = adapt(p, {KernelKind::linear, AlphaMode::inverse, CrossTermForm::product, {1.0, 5, 0.01}});
  EXPECT_EQ(state.projection.rows(), 3);
  EXPECT_EQ(state.projection.cols(), 5);
  ASSERT_TRUE(state.residual.has_value());
  EXPECT_LE(*state.residual, 1e-6 * 8);
  const auto j = diagnostics_json(state);
  EXPECT_EQ(j.at("z"), 8);
  EXPECT_TRUE(j.contains("laplacian_spectrum"));
}

TEST(AdaptEnums, ParseAndPrint) {
  EXPECT_EQ(parse_kernel_kind("rbf"), KernelKind::rbf);
  EXPECT_EQ(parse_alpha_mode(to_string(AlphaMode::inverse)), AlphaMode::inverse);
  EXPECT_EQ(parse_cross_term("squared"), CrossTermForm::squared);
  EXPECT_THROW(parse_kernel_kind("poly"), UsageError);
}
