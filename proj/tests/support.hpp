// Shared fixtures and independent oracles for the test suite. Everything
// here is deliberately naive: loops instead of linear algebra shortcuts,
// exhaustive enumeration instead of pivoting, so that agreement with the
// library is meaningful.
#ifndef TOMOGRAPH_TEST_SUPPORT_HPP
#define TOMOGRAPH_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "tomograph/demand.hpp"
#include "tomograph/ingest.hpp"
#include "tomograph/netmodel.hpp"
#include "tomograph/numerics.hpp"

namespace tsupport {

using tomograph::Matrix;
using tomograph::Vector;

// Three-node example network: four directed links, routing fixed by hand.
inline Matrix toy_routing() {
  Matrix a(4, 9);
  a << 0, 1, 1, 0, 0, 0, 0, 0, 0,  // link 1 carries 1->2 and 1->3
      0, 0, 0, 1, 0, 0, 1, 0, 0,   // link 2 carries 2->1 and 3->1
      0, 0, 1, 0, 0, 1, 0, 0, 0,   // link 3 carries 1->3 and 2->3
      0, 0, 0, 0, 0, 0, 1, 1, 0;   // link 4 carries 3->1 and 3->2
  return a;
}

inline Vector toy_x() {
  Vector x(9);
  x << 0, 6, 4, 5, 0, 5, 7, 3, 0;
  return x;
}

inline Matrix toy_phi() {
  Matrix phi(4, 3);
  phi << 1, 0, 0, 0, 0.5, 0.7, 0.4, 0.5, 0, 0, 0, 1;
  return phi;
}

inline Vector toy_y() {
  Vector y(4);
  y << 10, 12, 9, 10;
  return y;
}

inline Vector toy_xc() {
  Vector c(3);
  c << 10, 10, 10;
  return c;
}

// Weighted objective (y - D x)^T W (y - D x), plain loops.
inline double cwls_objective(const Matrix& d, const Vector& y, const Matrix& w,
                             const Vector& x) {
  const Vector r = y - d * x;
  double obj = 0.0;
  for (long i = 0; i < r.size(); ++i)
    for (long j = 0; j < r.size(); ++j) obj += r(i) * w(i, j) * r(j);
  return obj;
}

// Exhaustive nonnegative weighted least squares: try every passive set,
// solve the restricted unconstrained problem, keep the best feasible
// candidate. Only usable for n <= ~16.
inline Vector nnls_bruteforce(const Matrix& d, const Vector& y, const Matrix& w,
                              double* best_obj = nullptr) {
  const int n = static_cast<int>(d.cols());
  Vector best = Vector::Zero(n);
  double best_val = cwls_objective(d, y, w, best);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> passive;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) passive.push_back(j);
    Matrix dp(d.rows(), passive.size());
    for (size_t j = 0; j < passive.size(); ++j) dp.col(j) = d.col(passive[j]);
    const Matrix gram = dp.transpose() * w * dp;
    const Vector rhs = dp.transpose() * w * y;
    const Vector xp = gram.ldlt().solve(rhs);
    if ((gram * xp - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;  // singular subset
    if (xp.minCoeff() < -1e-12) continue;
    Vector x = Vector::Zero(n);
    for (size_t j = 0; j < passive.size(); ++j) x(passive[j]) = std::max(0.0, xp(j));
    const double val = cwls_objective(d, y, w, x);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  if (best_obj) *best_obj = best_val;
  return best;
}

// sigma_min of the rows of phi indexed by `rows` (0-based).
inline double sigma_min_rows(const Matrix& phi, const std::vector<int>& rows) {
  Matrix sub(rows.size(), phi.cols());
  for (size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<long>(i)) = phi.row(rows[i]);
  const Eigen::JacobiSVD<Matrix> dec(sub);
  return dec.singularValues().minCoeff();
}

// Best sigma_min over every size-s row subset, exhaustive C(m, s).
inline double best_subset_sigma_min(const Matrix& phi, int s) {
  const int m = static_cast<int>(phi.rows());
  std::vector<int> idx(s);
  double best = 0.0;
  const std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == s) {
      best = std::max(best, sigma_min_rows(phi, idx));
      return;
    }
    for (int i = start; i <= m - (s - depth); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Naive metric re-implementations, scalar loops only.
inline Vector naive_sre(const Matrix& x_hat, const Matrix& x) {
  Vector out(x.cols());
  for (long i = 0; i < x.cols(); ++i) {
    double num = 0.0, den = 0.0;
    for (long t = 0; t < x.rows(); ++t) {
      num += (x_hat(t, i) - x(t, i)) * (x_hat(t, i) - x(t, i));
      den += x(t, i) * x(t, i);
    }
    if (den > 0.0)
      out(i) = std::sqrt(num) / std::sqrt(den);
    else
      out(i) = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return out;
}

inline Vector naive_tre(const Matrix& x_hat, const Matrix& x) {
  Vector out(x.rows());
  for (long t = 0; t < x.rows(); ++t) {
    double num = 0.0, den = 0.0;
    for (long i = 0; i < x.cols(); ++i) {
      num += (x_hat(t, i) - x(t, i)) * (x_hat(t, i) - x(t, i));
      den += x(t, i) * x(t, i);
    }
    if (den > 0.0)
      out(t) = std::sqrt(num) / std::sqrt(den);
    else
      out(t) = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return out;
}

inline std::pair<Vector, Vector> naive_bias_stddev(const Matrix& x_hat, const Matrix& x) {
  const long T = x.rows();
  Vector bias(x.cols()), stddev(x.cols());
  for (long i = 0; i < x.cols(); ++i) {
    double sum = 0.0;
    for (long t = 0; t < T; ++t) sum += x_hat(t, i) - x(t, i);
    bias(i) = sum / static_cast<double>(T);
    if (T < 2) {
      stddev(i) = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double ss = 0.0;
    for (long t = 0; t < T; ++t) {
      const double c = x_hat(t, i) - x(t, i) - bias(i);
      ss += c * c;
    }
    stddev(i) = std::sqrt(ss / static_cast<double>(T - 1));
  }
  return {bias, stddev};
}

// Dataset where X(t) = Psi(t) * x_c with Psi exactly affine in Y(t), so a
// least-squares regressor recovers the demand model to machine precision.
// Perturbation directions respect the Psi support and have zero column
// sums; their images A*Psi_p*x_c span R^m so [1; Y] is a full-rank design.
struct ExactModel {
  tomograph::DatasetBundle train;
  tomograph::DatasetBundle test;
  Vector x_c;                             // constant source demands
  std::vector<tomograph::DemandTransform> psi_train;  // per training step
  std::vector<tomograph::DemandTransform> psi_test;
};

inline ExactModel make_exact_model(std::uint64_t seed, int n, double degree,
                                   int train_len, int test_len,
                                   bool constant_psi = false) {
  using namespace tomograph;
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    auto [topo, a] = gen_topology(seed + attempt, n, degree);
    const int m = a.link_count();
    if (tomograph::numerical_rank(a.entries) != m) continue;
    if (m > n * (n - 2)) continue;  // not enough support freedom

    std::mt19937_64 rng(seed + attempt + 1000);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    Vector c(n);
    for (int j = 0; j < n; ++j) c(j) = 60.0 + 7.0 * j;

    // Base transform: uniform fractions.
    Matrix psi0 = Matrix::Zero(n * n, n);
    for (int j = 1; j <= n; ++j)
      for (int d = 1; d <= n; ++d)
        if (j != d) psi0(od_index(j, d, n) - 1, j - 1) = 1.0 / (n - 1);

    const int P = constant_psi ? 0 : m;
    std::vector<Matrix> perts;
    Matrix images(m, std::max(P, 1));
    for (int p = 0; p < P; ++p) {
      Matrix pert = Matrix::Zero(n * n, n);
      for (int j = 1; j <= n; ++j) {
        std::vector<double> raw(n, 0.0);
        double sum = 0.0;
        for (int d = 1; d <= n; ++d)
          if (d != j) sum += (raw[d - 1] = unif(rng));
        for (int d = 1; d <= n; ++d)
          if (d != j) pert(od_index(j, d, n) - 1, j - 1) = raw[d - 1] - sum / (n - 1);
      }
      const double scale = 0.35 / ((n - 1.0) * P * pert.cwiseAbs().maxCoeff());
      pert *= scale;
      perts.push_back(pert);
      images.col(p) = a.entries * pert * c;
    }
    if (P > 0 && tomograph::numerical_rank(images) != m) continue;

    const int T = train_len + test_len;
    Matrix x_all(T, n * n);
    std::vector<DemandTransform> psis;
    psis.reserve(T);
    for (int t = 0; t < T; ++t) {
      Matrix psi_t = psi0;
      // Full-swing signals over the training window keep the regression
      // well conditioned; the test window moves slowly so that carried-over
      // link estimates stay representative between refreshes.
      const double envelope = t < train_len ? 1.0 : 3e-4;
      for (int p = 0; p < P; ++p) {
        const double g = std::sin(2.0 * M_PI * (p + 1) * (t + 1) / T + 0.7 * (p + 1));
        psi_t += envelope * g * perts[p];
      }
      DemandTransform psi;
      psi.entries = psi_t;
      psi.n = n;
      psi.validate();
      psis.push_back(psi);
      x_all.row(t) = (psi_t * c).transpose();
    }

    DatasetBundle full;
    full.topology = topo;
    full.A = a;
    full.X.values = x_all;
    full.X.timestep_seconds = 300.0;
    full.provenance = "exact-model";
    auto [train, test] = split(full, SplitSpec{train_len, test_len});

    ExactModel model;
    model.train = std::move(train);
    model.test = std::move(test);
    model.x_c = c;
    model.psi_train.assign(psis.begin(), psis.begin() + train_len);
    model.psi_test.assign(psis.begin() + train_len, psis.end());
    return model;
  }
  throw std::runtime_error("make_exact_model: no admissible topology found");
}

}  // namespace tsupport

#endif
