#include "tomograph/baselines.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

#include "tomograph/numerics.hpp"
#include "tomograph/subset.hpp"

namespace tomograph {

namespace {

Matrix snapshots_matrix(const TrafficSeries& x_train) {
  return x_train.values.transpose();  // n^2 x T orientation
}

}  // namespace

StaticBasis train_pca_basis(const TrafficSeries& x_train, const RoutingMatrix& a, int k) {
  const Matrix m = snapshots_matrix(x_train);
  if (k < 1 || k > std::min(m.rows(), m.cols()))
    throw std::invalid_argument("train_pca_basis: k out of range");
  if (a.entries.cols() != m.rows())
    throw std::invalid_argument("train_pca_basis: routing dimension mismatch");

  StaticBasis basis;
  basis.kind = BasisKind::pca;
  basis.k = k;
  basis.mean = m.rowwise().mean();
  const Matrix centered = m.colwise() - basis.mean;
  const SvdResult dec = svd(centered);
  basis.psi_static = dec.U.leftCols(k);
  basis.phi_static = a.entries * basis.psi_static;
  return basis;
}

StaticBasis train_cur_basis(const TrafficSeries& x_train, const RoutingMatrix& a, int k) {
  const Matrix m = snapshots_matrix(x_train);
  if (k < 1 || k > m.cols()) throw std::invalid_argument("train_cur_basis: k out of range");
  if (a.entries.cols() != m.rows())
    throw std::invalid_argument("train_cur_basis: routing dimension mismatch");

  // Leverage-style snapshot selection: pivoted QR on the top-k right
  // singular subspace picks the k most independent training columns.
  const SvdResult dec = svd(m);
  const Matrix v_k = dec.V.leftCols(std::min<long>(k, dec.V.cols()));
  const PivotedQr qr = qr_pivot(v_k.transpose());

  StaticBasis basis;
  basis.kind = BasisKind::cur;
  basis.k = k;
  basis.mean = Vector::Zero(m.rows());
  basis.psi_static.resize(m.rows(), k);
  for (int j = 0; j < k; ++j) {
    Vector col = m.col(qr.pivot_order[j] - 1);
    const double norm = col.norm();
    if (norm > 0.0) col /= norm;
    basis.psi_static.col(j) = col;
  }
  basis.phi_static = a.entries * basis.psi_static;
  return basis;
}

StaticBasis train_pme_basis(const TrafficSeries& x_train, const RoutingMatrix& a,
                            double sigma_factor, std::uint64_t seed) {
  if (sigma_factor < 0.0) throw std::invalid_argument("train_pme_basis: negative sigma_factor");
  const int n = a.node_count();
  if (a.entries.cols() != x_train.values.cols())
    throw std::invalid_argument("train_pme_basis: routing dimension mismatch");

  const Vector mu = x_train.values.colwise().mean().transpose();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  Vector noisy(mu.size());
  for (long i = 0; i < mu.size(); ++i)
    noisy(i) = std::max(0.0, mu(i) + sigma_factor * mu(i) * stdnorm(rng));

  const DemandTransform psi = build_psi(noisy, n);
  StaticBasis basis;
  basis.kind = BasisKind::pme;
  basis.k = n;
  basis.mean = Vector::Zero(mu.size());
  basis.psi_static = psi.entries;
  basis.phi_static = a.entries * basis.psi_static;
  return basis;
}

std::vector<StepResult> run_baseline(const StaticBasis& basis, const RoutingMatrix& a,
                                     const LinkSeries& y_test, const Matrix& link_cov,
                                     const BaselineOptions& options) {
  const int m = a.link_count();
  if (y_test.values.cols() != m) throw std::invalid_argument("run_baseline: link dimension mismatch");
  if (basis.phi_static.rows() != m)
    throw std::invalid_argument("run_baseline: basis link dimension mismatch");
  if (link_cov.rows() != m || link_cov.cols() != m)
    throw std::invalid_argument("run_baseline: covariance shape mismatch");

  const Matrix cov_reg = regularize_covariance(link_cov);
  const Matrix weight = cov_reg.llt().solve(Matrix::Identity(m, m));
  const Vector y_mean = basis.kind == BasisKind::pca ? Vector(a.entries * basis.mean)
                                                     : Vector(Vector::Zero(m));

  LinkSelection full;
  full.pivot_order.resize(m);
  std::iota(full.pivot_order.begin(), full.pivot_order.end(), 1);
  full.monitored_count = m;

  std::vector<StepResult> trace;
  trace.reserve(y_test.values.rows());
  for (long t = 0; t < y_test.values.rows(); ++t) {
    const Vector y = y_test.values.row(t).transpose();

    CwlsProblem problem;
    problem.design = basis.phi_static;
    problem.target = y - y_mean;
    problem.weight = weight;
    problem.nonnegative = basis.kind == BasisKind::pme;
    problem.constraint_mode =
        basis.kind == BasisKind::pme ? options.pme_constraint_mode : ConstraintMode::none;
    problem.tolerance = options.solver_tolerance;
    problem.max_iterations = options.solver_max_iterations;

    CwlsResult solved = solve_cwls(problem);
    const bool feasible = solved.feasible;
    if (!solved.feasible && problem.constraint_mode != ConstraintMode::none) {
      problem.constraint_mode = ConstraintMode::none;
      const CwlsResult retry = solve_cwls(problem);
      solved.solution = retry.solution;
      solved.kkt_residual = retry.kkt_residual;
      solved.iterations += retry.iterations;
      solved.converged = retry.converged;
    }

    StepResult r;
    r.xc_hat = solved.solution;
    r.x_hat = (basis.psi_static * solved.solution + basis.mean).cwiseMax(0.0);
    r.y_hat = basis.phi_static * solved.solution + y_mean;
    r.selection = full;
    r.iterations = solved.iterations;
    r.kkt_residual = solved.kkt_residual;
    r.feasible = feasible;
    r.converged = solved.converged;
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace tomograph
