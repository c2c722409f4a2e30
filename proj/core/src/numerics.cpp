#include "tomograph/numerics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tomograph {

namespace {

void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult r;
  r.U = dec.matrixU();
  r.S = dec.singularValues();
  r.V = dec.matrixV();
  // Fix signs: largest-magnitude entry of each U column nonnegative.
  for (long j = 0; j < r.U.cols(); ++j) {
    long imax = 0;
    r.U.col(j).cwiseAbs().maxCoeff(&imax);
    if (r.U(imax, j) < 0.0) {
      r.U.col(j) = -r.U.col(j);
      if (j < r.V.cols()) r.V.col(j) = -r.V.col(j);
    }
  }
  return r;
}

int numerical_rank(const Matrix& m) {
  const SvdResult r = svd(m);
  if (r.S.size() == 0) return 0;
  const double cut = 1e-10 * r.S(0);
  int rank = 0;
  for (long i = 0; i < r.S.size(); ++i)
    if (r.S(i) > cut) ++rank;
  return rank;
}

PivotedQr qr_pivot(const Matrix& m) {
  require_finite(m, "qr_pivot");
  const long k = m.rows();
  const long cols = m.cols();
  const long steps = std::min(k, cols);

  Matrix a = m;
  Matrix q = Matrix::Identity(k, k);
  std::vector<int> perm(cols);
  for (long j = 0; j < cols; ++j) perm[j] = static_cast<int>(j);

  PivotedQr out;
  for (long s = 0; s < steps; ++s) {
    // residual norms of the not-yet-fixed columns
    double best = -1.0;
    long best_col = s;
    for (long c = s; c < cols; ++c) {
      const double norm = a.col(c).tail(k - s).norm();
      const bool tie = std::abs(norm - best) <= 1e-14 * std::max(1.0, best);
      if (norm > best && !tie) {
        best = norm;
        best_col = c;
      } else if (tie && perm[c] < perm[best_col]) {
        best_col = c;
      }
    }
    if (best_col != s) {
      a.col(best_col).swap(a.col(s));
      std::swap(perm[best_col], perm[s]);
    }
    out.step_norms.push_back(a.col(s).tail(k - s).norm());

    // Householder reflector on rows s..k-1 of column s
    Vector x = a.col(s).tail(k - s);
    const double xnorm = x.norm();
    if (xnorm > 0.0) {
      Vector v = x;
      v(0) += (x(0) >= 0.0 ? xnorm : -xnorm);
      const double vtv = v.squaredNorm();
      if (vtv > 0.0) {
        const double beta = 2.0 / vtv;
        a.bottomRightCorner(k - s, cols - s) -=
            beta * v * (v.transpose() * a.bottomRightCorner(k - s, cols - s));
        q.rightCols(k - s) -= beta * (q.rightCols(k - s) * v) * v.transpose();
      }
    }
  }

  out.Q = q;
  out.R = a.triangularView<Eigen::Upper>();
  out.pivot_order.resize(cols);
  for (long j = 0; j < cols; ++j) out.pivot_order[j] = perm[j] + 1;
  return out;
}

Matrix regularize_covariance(const Matrix& cov) {
  const long k = cov.rows();
  if (k == 0 || cov.cols() != k)
    throw std::invalid_argument("regularize_covariance: square matrix required");
  const Matrix sym = 0.5 * (cov + cov.transpose());
  const double scale = std::max(sym.trace() / static_cast<double>(k), 1.0e-300);
  return sym + 1e-6 * scale * Matrix::Identity(k, k);
}

namespace {

struct NnlsOutcome {
  Vector x;
  int iterations = 0;
  bool converged = true;
  std::vector<double> objective_trace;
};

// Lawson-Hanson active set NNLS: min ||b - D x||^2, x >= 0.
NnlsOutcome nnls(const Matrix& d, const Vector& b, double tolerance, int max_iterations,
                 const std::optional<Vector>& start) {
  const long n = d.cols();
  NnlsOutcome out;
  out.x = Vector::Zero(n);
  std::vector<bool> passive(n, false);

  double max_col = 0.0;
  for (long j = 0; j < n; ++j) max_col = std::max(max_col, d.col(j).norm());
  const double dual_tol = tolerance * (1.0 + b.norm()) * std::max(1.0, max_col);

  auto solve_passive = [&](long& iters) -> bool {
    // Restricted least squares followed by boundary steps until the
    // passive iterate is strictly feasible.
    while (true) {
      if (++iters > max_iterations) return false;
      std::vector<long> idx;
      for (long j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      if (idx.empty()) {
        out.x.setZero();
        return true;
      }
      Matrix dp(d.rows(), static_cast<long>(idx.size()));
      for (size_t j = 0; j < idx.size(); ++j) dp.col(j) = d.col(idx[j]);
      const Vector z = dp.colPivHouseholderQr().solve(b);

      bool all_positive = true;
      double alpha = 1.0;
      long blocking = -1;
      for (size_t j = 0; j < idx.size(); ++j)
        if (z(j) <= 0.0) {
          all_positive = false;
          const double xj = out.x(idx[j]);
          const double denom = xj - z(j);
          if (denom > 0.0 && xj / denom < alpha) {
            alpha = xj / denom;
            blocking = idx[j];
          }
          if (denom <= 0.0 && blocking < 0) blocking = idx[j];
        }
      if (all_positive) {
        out.x.setZero();
        for (size_t j = 0; j < idx.size(); ++j) out.x(idx[j]) = z(j);
        return true;
      }
      for (size_t j = 0; j < idx.size(); ++j)
        out.x(idx[j]) += alpha * (z(j) - out.x(idx[j]));
      const double zero_cut = 1e-14 * std::max(1.0, out.x.maxCoeff());
      for (size_t j = 0; j < idx.size(); ++j)
        if (out.x(idx[j]) <= zero_cut) {
          out.x(idx[j]) = 0.0;
          passive[idx[j]] = false;
        }
      if (blocking >= 0) {
        out.x(blocking) = 0.0;
        passive[blocking] = false;
      }
    }
  };

  long iters = 0;
  if (start) {
    for (long j = 0; j < n && j < start->size(); ++j)
      if ((*start)(j) > 0.0) passive[j] = true;
    if (!solve_passive(iters)) {
      out.converged = false;
      out.iterations = static_cast<int>(iters);
      return out;
    }
  }

  while (true) {
    if (++iters > max_iterations) {
      out.converged = false;
      break;
    }
    const Vector w = d.transpose() * (b - d * out.x);
    double best = dual_tol;
    long best_j = -1;
    for (long j = 0; j < n; ++j)
      if (!passive[j] && w(j) > best) {
        best = w(j);
        best_j = j;
      }
    if (best_j < 0) break;  // KKT satisfied
    passive[best_j] = true;
    if (!solve_passive(iters)) {
      out.converged = false;
      break;
    }
    out.objective_trace.push_back((b - d * out.x).squaredNorm());
  }
  out.iterations = static_cast<int>(iters);
  return out;
}

Matrix cholesky_factor(const Matrix& w) {
  Eigen::LLT<Matrix> llt(0.5 * (w + w.transpose()));
  if (llt.info() != Eigen::Success) {
    llt.compute(regularize_covariance(w));  // jitter fallback
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("solve_cwls: weight matrix is not positive definite");
  }
  return llt.matrixL();
}

double kkt_residual_nonneg(const Matrix& d, const Vector& y, const Matrix& w, const Vector& x) {
  const Vector g = 2.0 * d.transpose() * (w * (d * x - y));
  double r = 0.0;
  for (long j = 0; j < x.size(); ++j)
    r = std::max(r, x(j) > 0.0 ? std::abs(g(j)) : std::max(0.0, -g(j)));
  return r;
}

}  // namespace

CwlsResult solve_cwls(const CwlsProblem& p) {
  const long k = p.design.rows();
  const long n = p.design.cols();
  if (k < 1 || n < 1) throw std::invalid_argument("solve_cwls: empty problem");
  if (p.target.size() != k) throw std::invalid_argument("solve_cwls: target size mismatch");
  if (p.weight.rows() != k || p.weight.cols() != k)
    throw std::invalid_argument("solve_cwls: weight shape mismatch");
  require_finite(p.design, "solve_cwls");
  if (!p.target.allFinite() || !p.weight.allFinite())
    throw std::invalid_argument("solve_cwls: non-finite input");

  CwlsResult res;

  if (!p.nonnegative) {
    if (p.constraint_mode != ConstraintMode::none)
      throw std::invalid_argument("solve_cwls: constrained modes require nonnegative=true");
    const Matrix l = cholesky_factor(p.weight);
    const Matrix dt = l.transpose() * p.design;
    const Vector bt = l.transpose() * p.target;
    res.solution = dt.colPivHouseholderQr().solve(bt);
    res.iterations = 1;
    const Vector g = 2.0 * p.design.transpose() * (p.weight * (p.design * res.solution - p.target));
    res.kkt_residual = g.cwiseAbs().maxCoeff();
    return res;
  }

  const double wscale = std::max(p.weight.trace() / static_cast<double>(k), 1.0e-300);

  if (p.constraint_mode == ConstraintMode::none) {
    const Matrix l = cholesky_factor(p.weight);
    const NnlsOutcome o =
        nnls(l.transpose() * p.design, l.transpose() * p.target, p.tolerance, p.max_iterations,
             p.start);
    res.solution = o.x;
    res.iterations = o.iterations;
    res.converged = o.converged;
    res.objective_trace = o.objective_trace;
    res.kkt_residual = kkt_residual_nonneg(p.design, p.target, p.weight, o.x);
    return res;
  }

  if (p.constraint_mode == ConstraintMode::equality) {
    // Exterior penalty: fold an escalating multiple of the identity into
    // the weight until the residual meets the componentwise band.
    int total_iters = 0;
    for (double mult : {1e4, 1e8, 1e12}) {
      const Matrix w_eff = p.weight + mult * wscale * Matrix::Identity(k, k);
      const Matrix l = cholesky_factor(w_eff);
      const NnlsOutcome o =
          nnls(l.transpose() * p.design, l.transpose() * p.target, p.tolerance, p.max_iterations,
               res.solution.size() == n ? std::optional<Vector>(res.solution) : p.start);
      total_iters += o.iterations;
      res.solution = o.x;
      res.converged = o.converged;
      res.objective_trace = o.objective_trace;
      const Vector r = p.design * o.x - p.target;
      res.max_violation = 0.0;
      res.feasible = true;
      for (long i = 0; i < k; ++i) {
        const double band = p.tolerance * (1.0 + std::abs(p.target(i)));
        if (std::abs(r(i)) > band) res.feasible = false;
        res.max_violation = std::max(res.max_violation, std::abs(r(i)));
      }
      if (res.feasible) break;
    }
    res.iterations = total_iters;
    res.kkt_residual = kkt_residual_nonneg(p.design, p.target, p.weight, res.solution);
    return res;
  }

  // lower_bound: D x >= y. Slack form u = D x - y >= 0, objective u^T W u,
  // the coupling D x - u = y enforced by an escalating quadratic penalty.
  // The stacked problem stays a plain NNLS in (x, u).
  const Matrix l = cholesky_factor(p.weight);
  int total_iters = 0;
  for (double mult : {1e4, 1e8, 1e12}) {
    const double rho = mult * wscale;
    const double sr = std::sqrt(rho);
    Matrix d_aug = Matrix::Zero(2 * k, n + k);
    d_aug.topLeftCorner(k, n) = sr * p.design;
    d_aug.topRightCorner(k, k) = -sr * Matrix::Identity(k, k);
    d_aug.bottomRightCorner(k, k) = l.transpose();
    Vector b_aug = Vector::Zero(2 * k);
    b_aug.head(k) = sr * p.target;

    std::optional<Vector> z0;
    if (res.solution.size() == n) {
      Vector z(n + k);
      z.head(n) = res.solution;
      z.tail(k) = (p.design * res.solution - p.target).cwiseMax(0.0);
      z0 = z;
    } else if (p.start) {
      Vector z(n + k);
      z.head(n) = p.start->cwiseMax(0.0);
      z.tail(k) = (p.design * z.head(n) - p.target).cwiseMax(0.0);
      z0 = z;
    }

    const NnlsOutcome o = nnls(d_aug, b_aug, p.tolerance, p.max_iterations, z0);
    total_iters += o.iterations;
    res.solution = o.x.head(n);
    res.converged = o.converged;
    res.objective_trace = o.objective_trace;

    const Vector slack = p.design * res.solution - p.target;
    res.max_violation = 0.0;
    res.feasible = true;
    for (long i = 0; i < k; ++i) {
      const double band = p.tolerance * (1.0 + std::abs(p.target(i)));
      const double viol = -slack(i);
      if (viol > band) res.feasible = false;
      res.max_violation = std::max(res.max_violation, std::max(0.0, viol));
    }
    if (res.feasible) break;
  }
  res.iterations = total_iters;
  res.kkt_residual = kkt_residual_nonneg(p.design, p.target, p.weight, res.solution);
  return res;
}

}  // namespace tomograph
