#include "tomograph/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tomograph/csv.hpp"
#include "tomograph/numerics.hpp"

namespace tomograph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

Vector sre(const Matrix& x_hat, const Matrix& x) {
  require_same_shape(x_hat, x, "sre");
  Vector out(x.cols());
  for (long i = 0; i < x.cols(); ++i) {
    const double denom = x.col(i).norm();
    const double num = (x_hat.col(i) - x.col(i)).norm();
    out(i) = denom > 0.0 ? num / denom : (num == 0.0 ? 0.0 : kInf);
  }
  return out;
}

Vector tre(const Matrix& x_hat, const Matrix& x) {
  require_same_shape(x_hat, x, "tre");
  Vector out(x.rows());
  for (long t = 0; t < x.rows(); ++t) {
    const double denom = x.row(t).norm();
    const double num = (x_hat.row(t) - x.row(t)).norm();
    out(t) = denom > 0.0 ? num / denom : (num == 0.0 ? 0.0 : kInf);
  }
  return out;
}

std::pair<Vector, Vector> bias_and_stddev(const Matrix& x_hat, const Matrix& x) {
  require_same_shape(x_hat, x, "bias_and_stddev");
  const long T = x.rows();
  const Matrix err = x_hat - x;
  Vector bias = err.colwise().mean().transpose();
  Vector stddev(x.cols());
  if (T < 2) {
    stddev.setConstant(std::numeric_limits<double>::quiet_NaN());
  } else {
    for (long i = 0; i < x.cols(); ++i)
      stddev(i) = std::sqrt((err.col(i).array() - bias(i)).square().sum() /
                            static_cast<double>(T - 1));
  }
  return {std::move(bias), std::move(stddev)};
}

std::vector<std::pair<double, double>> empirical_cdf(const Vector& values, int* excluded) {
  std::vector<double> finite;
  int dropped = 0;
  for (long i = 0; i < values.size(); ++i) {
    if (std::isfinite(values(i)))
      finite.push_back(values(i));
    else
      ++dropped;
  }
  if (excluded) *excluded = dropped;
  std::sort(finite.begin(), finite.end());
  std::vector<std::pair<double, double>> cdf;
  const double total = static_cast<double>(finite.size());
  for (size_t i = 0; i < finite.size(); ++i) {
    if (i + 1 < finite.size() && finite[i + 1] == finite[i]) continue;  // step per distinct value
    cdf.push_back({finite[i], static_cast<double>(i + 1) / total});
  }
  return cdf;
}

MetricReport evaluate(const Matrix& x_hat, const Matrix& x) {
  MetricReport r;
  r.sre = sre(x_hat, x);
  r.tre = tre(x_hat, x);
  std::tie(r.bias, r.stddev) = bias_and_stddev(x_hat, x);
  r.od_means = x.colwise().mean().transpose();
  r.cdf_sre = empirical_cdf(r.sre, &r.sre_excluded);
  r.cdf_tre = empirical_cdf(r.tre, &r.tre_excluded);
  return r;
}

SpectrumReport spectrum_report(const RoutingMatrix& a, const CompressedMeasurement& phi) {
  SpectrumReport rep;
  const SvdResult da = svd(a.entries);
  const SvdResult dp = svd(phi.entries);
  const long ka = std::min(da.U.rows(), da.V.rows());
  const long kp = std::min(dp.U.rows(), dp.V.rows());
  rep.a_spectrum = da.S.head(ka);
  rep.phi_spectrum = dp.S.head(kp);
  if (rep.a_spectrum.size() > 0 && rep.a_spectrum(0) > 0.0)
    rep.a_spectrum /= rep.a_spectrum(0);
  if (rep.phi_spectrum.size() > 0 && rep.phi_spectrum(0) > 0.0)
    rep.phi_spectrum /= rep.phi_spectrum(0);
  rep.rank_a = numerical_rank(a.entries);
  rep.rank_phi = numerical_rank(phi.entries);
  for (long l = 0; l < phi.entries.rows(); ++l)
    for (long j = 0; j < phi.entries.cols(); ++j)
      rep.phi_surface.push_back({static_cast<int>(l) + 1, static_cast<int>(j) + 1,
                                 phi.entries(l, j)});
  return rep;
}

std::vector<std::tuple<int, double, double>> mean_variance_table(const TrafficSeries& x) {
  const long T = x.values.rows();
  if (T < 2) throw std::invalid_argument("mean_variance_table: need at least 2 samples");
  std::vector<std::tuple<int, double, double>> table;
  for (long i = 0; i < x.values.cols(); ++i) {
    const double mean = x.values.col(i).mean();
    const double var =
        (x.values.col(i).array() - mean).square().sum() / static_cast<double>(T - 1);
    table.push_back({static_cast<int>(i) + 1, mean, var});
  }
  std::stable_sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
    return std::get<1>(a) > std::get<1>(b);
  });
  return table;
}

void write_metrics(const std::filesystem::path& dir, const MetricReport& report) {
  std::filesystem::create_directories(dir);
  const long odn = report.sre.size();
  Matrix per_flow(odn, 5);
  for (long i = 0; i < odn; ++i) {
    per_flow(i, 0) = static_cast<double>(i + 1);
    per_flow(i, 1) = report.sre(i);
    per_flow(i, 2) = report.bias(i);
    per_flow(i, 3) = report.stddev(i);
    per_flow(i, 4) = report.od_means(i);
  }
  write_csv(dir / "metrics.csv", {"od", "sre", "bias", "stddev", "od_mean"}, per_flow);

  Matrix per_t(report.tre.size(), 2);
  for (long t = 0; t < report.tre.size(); ++t) {
    per_t(t, 0) = static_cast<double>(t + 1);
    per_t(t, 1) = report.tre(t);
  }
  write_csv(dir / "tre.csv", {"t", "tre"}, per_t);

  const auto dump_cdf = [&](const std::filesystem::path& path,
                            const std::vector<std::pair<double, double>>& cdf) {
    Matrix table(static_cast<long>(cdf.size()), 2);
    for (size_t i = 0; i < cdf.size(); ++i) {
      table(static_cast<long>(i), 0) = cdf[i].first;
      table(static_cast<long>(i), 1) = cdf[i].second;
    }
    write_csv(path, {"value", "fraction"}, table);
  };
  dump_cdf(dir / "cdf_sre.csv", report.cdf_sre);
  dump_cdf(dir / "cdf_tre.csv", report.cdf_tre);
}

void write_spectrum(const std::filesystem::path& dir, const SpectrumReport& report) {
  std::filesystem::create_directories(dir);
  const long rows = std::max(report.a_spectrum.size(), report.phi_spectrum.size());
  Matrix table(rows, 3);
  for (long i = 0; i < rows; ++i) {
    table(i, 0) = static_cast<double>(i + 1);
    table(i, 1) = i < report.a_spectrum.size() ? report.a_spectrum(i) : 0.0;
    table(i, 2) = i < report.phi_spectrum.size() ? report.phi_spectrum(i) : 0.0;
  }
  write_csv(dir / "spectrum.csv", {"index", "a_normalized", "phi_normalized"}, table);

  Matrix surface(static_cast<long>(report.phi_surface.size()), 3);
  for (size_t i = 0; i < report.phi_surface.size(); ++i) {
    surface(static_cast<long>(i), 0) = std::get<0>(report.phi_surface[i]);
    surface(static_cast<long>(i), 1) = std::get<1>(report.phi_surface[i]);
    surface(static_cast<long>(i), 2) = std::get<2>(report.phi_surface[i]);
  }
  write_csv(dir / "phi_surface.csv", {"link", "source", "value"}, surface);
}

void write_mean_variance(const std::filesystem::path& dir,
                         const std::vector<std::tuple<int, double, double>>& table) {
  std::filesystem::create_directories(dir);
  Matrix out(static_cast<long>(table.size()), 3);
  for (size_t i = 0; i < table.size(); ++i) {
    out(static_cast<long>(i), 0) = std::get<0>(table[i]);
    out(static_cast<long>(i), 1) = std::get<1>(table[i]);
    out(static_cast<long>(i), 2) = std::get<2>(table[i]);
  }
  write_csv(dir / "mean_var.csv", {"od", "mean", "variance"}, out);
}

}  // namespace tomograph
