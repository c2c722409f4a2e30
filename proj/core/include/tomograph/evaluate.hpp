#ifndef TOMOGRAPH_EVALUATE_HPP
#define TOMOGRAPH_EVALUATE_HPP

#include <filesystem>
#include <tuple>
#include <utility>
#include <vector>

#include "tomograph/demand.hpp"
#include "tomograph/netmodel.hpp"

namespace tomograph {

/// Per-flow l2 relative error over the whole window. Flows with zero
/// actual energy report 0 when the estimate is also zero, +inf otherwise.
Vector sre(const Matrix& x_hat, const Matrix& x);

/// Per-timestamp l2 relative error over all flows, same zero rule.
Vector tre(const Matrix& x_hat, const Matrix& x);

/// Mean error and sample standard deviation (divisor T-1) of the centered
/// errors per flow. stddev is NaN when T < 2.
std::pair<Vector, Vector> bias_and_stddev(const Matrix& x_hat, const Matrix& x);

/// Empirical step CDF over the finite values, counting, no interpolation.
/// Infinite entries are excluded and counted in `excluded`.
std::vector<std::pair<double, double>> empirical_cdf(const Vector& values,
                                                     int* excluded = nullptr);

struct MetricReport {
  Vector sre;
  Vector tre;
  Vector bias;
  Vector stddev;
  Vector od_means;
  std::vector<std::pair<double, double>> cdf_sre;
  std::vector<std::pair<double, double>> cdf_tre;
  int sre_excluded = 0;
  int tre_excluded = 0;
};

MetricReport evaluate(const Matrix& x_hat, const Matrix& x);

struct SpectrumReport {
  Vector a_spectrum;    // normalized, starts at 1
  Vector phi_spectrum;  // normalized, starts at 1
  int rank_a = 0;
  int rank_phi = 0;
  std::vector<std::tuple<int, int, double>> phi_surface;  // (link, source, value)
};

SpectrumReport spectrum_report(const RoutingMatrix& a, const CompressedMeasurement& phi);

/// (od_index, mean, sample variance) sorted descending by mean.
std::vector<std::tuple<int, double, double>> mean_variance_table(const TrafficSeries& x);

void write_metrics(const std::filesystem::path& dir, const MetricReport& report);
void write_spectrum(const std::filesystem::path& dir, const SpectrumReport& report);
void write_mean_variance(const std::filesystem::path& dir,
                         const std::vector<std::tuple<int, double, double>>& table);

}  // namespace tomograph

#endif
