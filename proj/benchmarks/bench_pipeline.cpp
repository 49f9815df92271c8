#include <benchmark/benchmark.h>

#include <random>

#include "tlf/adapt.hpp"
#include "tlf/forest.hpp"
#include "tlf/pivot.hpp"
#include "tlf/transfer.hpp"

using namespace tlf;

namespace {

Schema numeric_schema(std::size_t d, const std::string& prefix) {
  Schema s;
  for (std::size_t j = 0; j < d; ++j) s.push_back({prefix + std::to_string(j), AttributeKind::numeric, {}});
  return s;
}

// Three Gaussian classes; `rotate` mixes the features with a fixed orthogonal matrix.
Dataset blobs(std::size_t n, std::size_t d, std::uint64_t seed, bool rotate, DomainTag domain) {
  std::mt19937_64 centre_rng(42);
  std::normal_distribution<double> g;
  Eigen::MatrixXd centres(3, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = 2.0 * g(centre_rng);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (rotate) {
    Eigen::MatrixXd a(q.rows(), q.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(centre_rng);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = pick(rng);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(static_cast<Eigen::Index>(i), j) = centres(y[i], j) + g(rng);
  }
  return Dataset(numeric_schema(d, rotate ? "s" : "t"), x * q, std::move(y), {"a", "b", "c"}, domain);
}

void BM_TrainForest(benchmark::State& state) {
  const auto ds = blobs(static_cast<std::size_t>(state.range(0)), 10, 1, false, DomainTag::target);
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(ds, 10, 20, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainForest)->Arg(600)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_JsdMatrix(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  DistributionBundle a, b;
  auto fill = [&](DistributionBundle& bundle) {
    bundle.class_names = {"a", "b", "c", "d"};
    bundle.kinds = {AttributeKind::numeric, AttributeKind::numeric};
    bundle.distributions.resize(static_cast<Eigen::Index>(rows), 4);
    for (Eigen::Index i = 0; i < bundle.distributions.rows(); ++i) {
      double total = 0.0;
      for (Eigen::Index k = 0; k < 4; ++k) total += bundle.distributions(i, k) = u(rng);
      bundle.distributions.row(i) /= total;
      Eigen::Index best = 0;
      bundle.distributions.row(i).maxCoeff(&best);
      bundle.labels.push_back(static_cast<int>(best));
    }
    bundle.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), 2);
  };
  fill(a);
  fill(b);
  b.domain = DomainTag::target;
  for (auto _ : state) benchmark::DoNotOptimize(match_pivots(a, b, 0.1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JsdMatrix)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMicrosecond)->Complexity();

void BM_Adapt(benchmark::State& state) {
  const auto np = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  StackedPivots s;
  s.source.resize(np, 10);
  s.target.resize(np, 10);
  for (Eigen::Index i = 0; i < s.source.size(); ++i) s.source.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < s.target.size(); ++i) s.target.data()[i] = g(rng);
  s.num_classes = 3;
  for (Eigen::Index i = 0; i < 2 * np; ++i) s.labels.push_back(static_cast<int>(i % 3));
  AdaptOptions opts;
  opts.alpha_mode = state.range(1) ? AlphaMode::inverse : AlphaMode::literal;
  opts.reg.ridge = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(adapt(s, opts));
}
BENCHMARK(BM_Adapt)->ArgsProduct({{5, 30, 100}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_RunTlf(benchmark::State& state) {
  const auto source = blobs(600, 10, 4, true, DomainTag::source);
  const auto target = blobs(static_cast<std::size_t>(state.range(0)), 10, 5, false, DomainTag::target);
  TlfConfig cfg;
  cfg.min_leaf_size_small = 5;
  for (auto _ : state) benchmark::DoNotOptimize(run_tlf(source, target, cfg));
}
BENCHMARK(BM_RunTlf)->Arg(30)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
