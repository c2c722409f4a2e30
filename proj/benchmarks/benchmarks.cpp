// Microbenchmarks for the numerically heavy paths: the constrained solver,
// link subset selection, demand-model training and a full estimation step.

#include <benchmark/benchmark.h>

#include <random>

#include "tomograph/demand.hpp"
#include "tomograph/estimator.hpp"
#include "tomograph/netmodel.hpp"
#include "tomograph/numerics.hpp"
#include "tomograph/subset.hpp"

using namespace tomograph;

namespace {

struct Fixture {
  DatasetBundle train;
  DatasetBundle test;
  CompressedMeasurement phi;
  Matrix weight;
  Vector y;

  explicit Fixture(int n, double degree, int samples) {
    auto [topo, a] = gen_topology(7, n, degree);
    DatasetBundle full;
    full.topology = std::move(topo);
    full.A = std::move(a);
    full.X = gen_gravity_traffic(8, full.topology, samples, 90.0, 24.0, 0.3);
    full.provenance = "bench";
    std::tie(train, test) = split(full, SplitSpec{samples * 3 / 4, samples / 4});

    const Vector mean = train.X.values.colwise().mean().transpose();
    phi = build_phi(train.A, build_psi(mean, n));
    const LinkSeries y_train = link_counts(train.A, train.X);
    const Eigen::RowVectorXd mu = y_train.values.colwise().mean();
    const Matrix centered = y_train.values.rowwise() - mu;
    const Matrix cov =
        centered.transpose() * centered / double(y_train.values.rows() - 1);
    weight = regularize_covariance(cov).llt().solve(
        Matrix::Identity(cov.rows(), cov.cols()));
    y = link_counts(test.A, test.X).values.row(0).transpose();
  }
};

void BM_SolveCwls(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 2.5, 80);
  CwlsProblem p;
  p.design = f.phi.entries;
  p.target = f.y;
  p.weight = f.weight;
  p.constraint_mode = ConstraintMode::lower_bound;
  for (auto _ : state) benchmark::DoNotOptimize(solve_cwls(p));
}
BENCHMARK(BM_SolveCwls)->Arg(8)->Arg(11)->Arg(16);

void BM_SelectLinks(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 2.5, 80);
  const int s = static_cast<int>(f.phi.entries.rows() * 0.85);
  for (auto _ : state) benchmark::DoNotOptimize(select_links(f.phi, s));
}
BENCHMARK(BM_SelectLinks)->Arg(8)->Arg(11)->Arg(16);

void BM_QrPivot(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  const long k = state.range(0);
  Matrix m(k, 4 * k);
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(qr_pivot(m));
}
BENCHMARK(BM_QrPivot)->Arg(8)->Arg(16)->Arg(32);

void BM_TrainRegressor(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 2.5, 80);
  const int n = f.train.topology.node_count;
  const LinkSeries y_train = link_counts(f.train.A, f.train.X);
  std::vector<DemandTransform> psis;
  for (long t = 0; t < f.train.X.values.rows(); ++t)
    psis.push_back(build_psi(f.train.X.values.row(t).transpose(), n));
  for (auto _ : state) benchmark::DoNotOptimize(train_regressor(y_train, psis));
}
BENCHMARK(BM_TrainRegressor)->Arg(8)->Arg(11);

void BM_EstimatorStep(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 2.5, 80);
  EstimatorConfig cfg;
  cfg.monitored_links = static_cast<int>(f.train.A.link_count() * 0.85);
  EstimatorState prototype = init_state(f.train, cfg);
  for (auto _ : state) {
    EstimatorState st = prototype;
    benchmark::DoNotOptimize(step(st, f.y));
  }
}
BENCHMARK(BM_EstimatorStep)->Arg(8)->Arg(11);

}  // namespace

BENCHMARK_MAIN();
