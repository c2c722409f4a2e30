#include "tomograph/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tomograph/csv.hpp"

namespace tomograph {

void DemandTransform::validate() const {
  if (entries.rows() != static_cast<long>(n) * n || entries.cols() != n)
    throw std::invalid_argument("demand transform: shape mismatch");
  for (long i = 0; i < entries.rows(); ++i) {
    const auto [src, dst] = od_pair(static_cast<int>(i) + 1, n);
    for (long j = 0; j < n; ++j) {
      const double v = entries(i, j);
      if (v < 0.0 || v > 1.0 + 1e-12)
        throw std::invalid_argument("demand transform: entry outside [0,1]");
      if (v != 0.0 && j + 1 != src)
        throw std::invalid_argument("demand transform: nonzero outside the source column");
    }
    if (src == dst && !include_self && entries(i, src - 1) != 0.0)
      throw std::invalid_argument("demand transform: self row must be zero under default policy");
  }
}

DemandTransform build_psi(const Vector& x_t, int n, const PsiPolicy& policy) {
  if (n < 2) throw std::invalid_argument("build_psi: n must be >= 2");
  if (x_t.size() != static_cast<long>(n) * n)
    throw std::invalid_argument("build_psi: expected n^2 entries");
  if (x_t.minCoeff() < 0.0) throw std::invalid_argument("build_psi: negative traffic value");

  DemandTransform psi;
  psi.n = n;
  psi.include_self = policy.include_self;
  psi.entries = Matrix::Zero(static_cast<long>(n) * n, n);

  for (int j = 1; j <= n; ++j) {
    double total = 0.0;
    for (int d = 1; d <= n; ++d) {
      if (d == j && !policy.include_self) continue;
      total += x_t(od_index(j, d, n) - 1);
    }
    if (total > 0.0) {
      for (int d = 1; d <= n; ++d) {
        if (d == j && !policy.include_self) continue;
        psi.entries(od_index(j, d, n) - 1, j - 1) = x_t(od_index(j, d, n) - 1) / total;
      }
    } else {
      // zero-demand source: uniform fractions keep the column summing to 1
      const double uniform = policy.include_self ? 1.0 / n : 1.0 / (n - 1);
      for (int d = 1; d <= n; ++d) {
        if (d == j && !policy.include_self) continue;
        psi.entries(od_index(j, d, n) - 1, j - 1) = uniform;
      }
    }
  }
  psi.validate();
  return psi;
}

CompressedMeasurement build_phi(const RoutingMatrix& a, const DemandTransform& psi) {
  if (a.entries.cols() != psi.entries.rows())
    throw std::invalid_argument("build_phi: dimension mismatch");
  CompressedMeasurement phi;
  phi.entries = a.entries * psi.entries;
  return phi;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (hi + v[mid - 1]);
  }
  return hi;
}

}  // namespace

DemandRegressor train_regressor(const LinkSeries& y_train,
                                const std::vector<DemandTransform>& psi_train,
                                const RegressorOptions& options) {
  const long samples = y_train.values.rows();
  if (samples < 2) throw std::invalid_argument("train_regressor: need at least 2 samples");
  if (static_cast<long>(psi_train.size()) != samples)
    throw std::invalid_argument("train_regressor: Y / Psi length mismatch");
  const int n = psi_train.front().n;
  const long m = y_train.values.cols();
  const long odn = static_cast<long>(n) * n;
  const long p = m + 1;

  Matrix design(samples, p);
  design.col(0).setOnes();
  design.rightCols(m) = y_train.values;

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  const bool full_rank = qr.rank() == p && samples >= p;
  const Matrix gram = design.transpose() * design;
  const double ridge = 1e-6 * gram.trace() / static_cast<double>(p);
  Eigen::LDLT<Matrix> ridge_solver;
  if (!full_rank)
    ridge_solver.compute(gram + ridge * Matrix::Identity(p, p));

  DemandRegressor reg;
  reg.beta = Matrix::Zero(p, odn);
  reg.fitted.assign(odn, false);
  reg.n = n;
  reg.include_self = psi_train.front().include_self;

  auto fit_ls = [&](const Vector& target) -> Vector {
    if (full_rank) return qr.solve(target);
    return ridge_solver.solve(design.transpose() * target);
  };

  for (long i = 0; i < odn; ++i) {
    const auto [src, dst] = od_pair(static_cast<int>(i) + 1, n);
    if (src == dst && !reg.include_self) continue;  // structurally zero

    Vector target(samples);
    for (long t = 0; t < samples; ++t) target(t) = psi_train[t].entries(i, src - 1);

    Vector beta = fit_ls(target);

    if (options.robust) {
      for (int it = 0; it < options.max_irls_iterations; ++it) {
        const Vector resid = target - design * beta;
        std::vector<double> absdev(samples);
        const double med = median_of({resid.data(), resid.data() + samples});
        for (long t = 0; t < samples; ++t) absdev[t] = std::abs(resid(t) - med);
        const double mad = median_of(absdev);
        const double scale = 1.4826 * mad;
        if (scale <= 1e-12 * (1.0 + target.cwiseAbs().maxCoeff())) break;
        const double cutoff = 1.345 * scale;

        Vector w(samples);
        for (long t = 0; t < samples; ++t) {
          const double a = std::abs(resid(t));
          w(t) = a <= cutoff ? 1.0 : cutoff / a;
        }
        const Matrix dw = w.asDiagonal() * design;
        Matrix g = design.transpose() * dw;
        if (!full_rank) g += ridge * Matrix::Identity(p, p);
        const Vector beta_next = g.ldlt().solve(design.transpose() * (w.asDiagonal() * target));
        const double change = (beta_next - beta).norm();
        beta = beta_next;
        if (change <= 1e-10 * (1.0 + beta.norm())) break;
      }
    }
    reg.beta.col(i) = beta;
    reg.fitted[i] = true;
  }
  return reg;
}

DemandTransform predict_psi(const DemandRegressor& reg, const Vector& y_hat,
                            const PredictOptions& options) {
  if (!y_hat.allFinite()) throw std::invalid_argument("predict_psi: non-finite link counts");
  if (y_hat.size() + 1 != reg.beta.rows())
    throw std::invalid_argument("predict_psi: link count dimension mismatch");
  const int n = reg.n;
  const long odn = static_cast<long>(n) * n;

  Vector z(reg.beta.rows());
  z(0) = 1.0;
  z.tail(y_hat.size()) = y_hat;

  DemandTransform psi;
  psi.n = n;
  psi.include_self = reg.include_self;
  psi.entries = Matrix::Zero(odn, n);
  for (long i = 0; i < odn; ++i) {
    if (!reg.fitted[i]) continue;
    const auto [src, dst] = od_pair(static_cast<int>(i) + 1, n);
    const double raw = reg.beta.col(i).dot(z);
    psi.entries(i, src - 1) = std::clamp(raw, 0.0, 1.0);
  }
  if (options.renormalize) {
    for (int j = 0; j < n; ++j) {
      const double sum = psi.entries.col(j).sum();
      if (sum > 0.0) psi.entries.col(j) /= sum;
    }
  }
  psi.validate();
  return psi;
}

void save_regressor(const std::filesystem::path& dir, const DemandRegressor& reg) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "beta.csv", {}, reg.beta);
  Matrix fitted(1, static_cast<long>(reg.fitted.size()));
  for (size_t i = 0; i < reg.fitted.size(); ++i) fitted(0, i) = reg.fitted[i] ? 1.0 : 0.0;
  write_csv(dir / "fitted.csv", {}, fitted);
}

DemandRegressor load_regressor(const std::filesystem::path& dir) {
  const CsvTable beta = read_csv(dir / "beta.csv", false);
  const CsvTable fitted = read_csv(dir / "fitted.csv", false);
  if (fitted.values.rows() != 1 || fitted.values.cols() != beta.values.cols())
    throw std::runtime_error("load_regressor: fitted.csv shape mismatch");
  DemandRegressor reg;
  reg.beta = beta.values;
  reg.n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(beta.values.cols()))));
  if (static_cast<long>(reg.n) * reg.n != beta.values.cols())
    throw std::runtime_error("load_regressor: beta.csv column count is not n^2");
  reg.fitted.resize(beta.values.cols());
  for (long i = 0; i < fitted.values.cols(); ++i) reg.fitted[i] = fitted.values(0, i) != 0.0;
  // include_self is recoverable from the fitted mask of the self rows
  reg.include_self = false;
  for (int j = 1; j <= reg.n; ++j)
    if (reg.fitted[od_index(j, j, reg.n) - 1]) reg.include_self = true;
  return reg;
}

}  // namespace tomograph
