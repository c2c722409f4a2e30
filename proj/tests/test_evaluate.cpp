#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support.hpp"
#include "tomograph/csv.hpp"
#include "tomograph/demand.hpp"
#include "tomograph/evaluate.hpp"

using namespace tomograph;

namespace {

Matrix random_matrix(std::mt19937_64& rng, long rows, long cols, bool nonneg = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = nonneg ? std::abs(g(rng)) : g(rng);
  return m;
}

}  // namespace

TEST_CASE("sre and tre match hand-computed values") {
  Matrix x(2, 2), x_hat(2, 2);
  x << 3, 0, 4, 0;
  x_hat << 3, 0, 0, 0;
  const Vector s = sre(x_hat, x);
  CHECK(s(0) == doctest::Approx(4.0 / 5.0));
  CHECK(s(1) == 0.0);  // zero actual, zero estimate
  const Vector t = tre(x_hat, x);
  CHECK(t(0) == 0.0);
  CHECK(t(1) == doctest::Approx(1.0));
}

TEST_CASE("zero actual with nonzero estimate reports infinity, excluded from CDFs") {
  Matrix x = Matrix::Zero(3, 2);
  Matrix x_hat = Matrix::Zero(3, 2);
  x_hat(0, 0) = 1.0;
  const MetricReport r = evaluate(x_hat, x);
  CHECK(std::isinf(r.sre(0)));
  CHECK(r.sre(1) == 0.0);
  CHECK(r.sre_excluded == 1);
  CHECK(r.tre_excluded == 1);
  for (const auto& [v, f] : r.cdf_sre) CHECK(std::isfinite(v));
}

TEST_CASE("metrics agree with the naive re-implementation on random input") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const long T = 2 + trial % 7;
    const long n = 1 + trial % 9;
    const Matrix x = random_matrix(rng, T, n, true);
    const Matrix x_hat = random_matrix(rng, T, n, true);
    const Vector s = sre(x_hat, x);
    const Vector t = tre(x_hat, x);
    const auto [bias, stddev] = bias_and_stddev(x_hat, x);
    const Vector ns = tsupport::naive_sre(x_hat, x);
    const Vector nt = tsupport::naive_tre(x_hat, x);
    const auto [nb, nsd] = tsupport::naive_bias_stddev(x_hat, x);
    CHECK((s - ns).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t - nt).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((bias - nb).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((stddev - nsd).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sre and tre are scale covariant; bias and stddev scale linearly") {
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(rng, 6, 5, true);
  const Matrix x_hat = random_matrix(rng, 6, 5, true);
  const double c = 37.5;
  CHECK((sre(c * x_hat, c * x) - sre(x_hat, x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((tre(c * x_hat, c * x) - tre(x_hat, x)).cwiseAbs().maxCoeff() < 1e-12);
  const auto [b1, s1] = bias_and_stddev(x_hat, x);
  const auto [b2, s2] = bias_and_stddev(c * x_hat, c * x);
  CHECK((b2 - c * b1).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((s2 - c * s1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stddev is NaN for a single sample") {
  Matrix x(1, 2), x_hat(1, 2);
  x << 1, 2;
  x_hat << 2, 2;
  const auto [bias, stddev] = bias_and_stddev(x_hat, x);
  CHECK(bias(0) == doctest::Approx(1.0));
  CHECK(std::isnan(stddev(0)));
}

TEST_CASE("empirical CDF is a nondecreasing counting step function ending at 1") {
  Vector v(6);
  v << 3, 1, 2, 2, 5, 1;
  int excluded = -1;
  const auto cdf = empirical_cdf(v, &excluded);
  CHECK(excluded == 0);
  REQUIRE(cdf.size() == 4);  // distinct: 1 2 3 5
  CHECK(cdf[0] == std::pair<double, double>{1.0, 2.0 / 6.0});
  CHECK(cdf[1] == std::pair<double, double>{2.0, 4.0 / 6.0});
  CHECK(cdf[2] == std::pair<double, double>{3.0, 5.0 / 6.0});
  CHECK(cdf[3] == std::pair<double, double>{5.0, 1.0});
  for (size_t i = 1; i < cdf.size(); ++i) {
    CHECK(cdf[i].first > cdf[i - 1].first);
    CHECK(cdf[i].second >= cdf[i - 1].second);
  }
}

TEST_CASE("spectrum report normalizes both sequences to start at 1") {
  RoutingMatrix a;
  a.entries = tsupport::toy_routing();
  const DemandTransform psi = build_psi(tsupport::toy_x(), 3);
  const CompressedMeasurement phi = build_phi(a, psi);
  const SpectrumReport rep = spectrum_report(a, phi);
  REQUIRE(rep.a_spectrum.size() == 4);
  REQUIRE(rep.phi_spectrum.size() == 3);
  CHECK(rep.a_spectrum(0) == doctest::Approx(1.0));
  CHECK(rep.phi_spectrum(0) == doctest::Approx(1.0));
  CHECK(rep.rank_a == 4);
  CHECK(rep.rank_phi == 3);
  CHECK(rep.phi_surface.size() == 12);
}

TEST_CASE("mean_variance_table sorts descending and matches hand values") {
  TrafficSeries x;
  x.values = Matrix(2, 3);
  x.values << 0, 5, 1, 2, 5, 1;
  const auto table = mean_variance_table(x);
  REQUIRE(table.size() == 3);
  CHECK(std::get<0>(table[0]) == 2);  // flow 2 has the max mean
  CHECK(std::get<1>(table[0]) == doctest::Approx(5.0));
  CHECK(std::get<2>(table[0]) == doctest::Approx(0.0));
  // flow 1: values {0,2} -> mean 1, sample variance 2
  CHECK(std::get<0>(table[1]) == 1);
  CHECK(std::get<1>(table[1]) == doctest::Approx(1.0));
  CHECK(std::get<2>(table[1]) == doctest::Approx(2.0));
  CHECK(std::get<1>(table[1]) >= std::get<1>(table[2]));
}

TEST_CASE("metric files land on disk with the documented schemas") {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(rng, 5, 4, true);
  const Matrix x_hat = random_matrix(rng, 5, 4, true);
  const auto dir = std::filesystem::temp_directory_path() / "tomograph_eval_test";
  write_metrics(dir, evaluate(x_hat, x));
  const CsvTable metrics = read_csv(dir / "metrics.csv", true);
  CHECK(metrics.header == std::vector<std::string>{"od", "sre", "bias", "stddev", "od_mean"});
  CHECK(metrics.values.rows() == 4);
  const CsvTable tre_table = read_csv(dir / "tre.csv", true);
  CHECK(tre_table.header == std::vector<std::string>{"t", "tre"});
  CHECK(tre_table.values.rows() == 5);
  const CsvTable cdf = read_csv(dir / "cdf_sre.csv", true);
  CHECK(cdf.header == std::vector<std::string>{"value", "fraction"});
  CHECK(cdf.values(cdf.values.rows() - 1, 1) == doctest::Approx(1.0));
}
