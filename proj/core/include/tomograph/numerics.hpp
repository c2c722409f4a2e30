#ifndef TOMOGRAPH_NUMERICS_HPP
#define TOMOGRAPH_NUMERICS_HPP

#include <optional>
#include <vector>

#include "tomograph/netmodel.hpp"

namespace tomograph {

/// Full decomposition M = U * diag(S) * V^T with square U and V, singular
/// values sorted descending. Sign convention: the largest-magnitude entry
/// of every column of U is nonnegative, so the factorization is a pure
/// function of its input.
struct SvdResult {
  Matrix U;
  Vector S;
  Matrix V;
};

SvdResult svd(const Matrix& m);

/// Numerical rank: number of singular values above 1e-10 * sigma_max.
int numerical_rank(const Matrix& m);

/// Householder QR with greedy column pivoting. pivot_order is 1-based:
/// pivot_order[j] is the original column placed at position j+1. At every
/// step the remaining column with the largest residual norm is chosen,
/// ties broken by lowest original column index; step_norms records the
/// winning norm of each step.
struct PivotedQr {
  Matrix Q;
  Matrix R;
  std::vector<int> pivot_order;
  std::vector<double> step_norms;
};

PivotedQr qr_pivot(const Matrix& m);

enum class ConstraintMode { none, lower_bound, equality };

/// Covariance-weighted least squares, min (y - D x)^T W (y - D x) over
/// x >= 0 (unless nonnegative is cleared, which the static baselines use),
/// optionally subject to D x >= y (lower_bound) or |D x - y| small
/// componentwise (equality).
struct CwlsProblem {
  Matrix design;  // k x n
  Vector target;  // k
  Matrix weight;  // k x k symmetric positive definite
  ConstraintMode constraint_mode = ConstraintMode::none;
  std::optional<Vector> start;
  double tolerance = 1e-8;
  int max_iterations = 10000;
  bool nonnegative = true;
};

struct CwlsResult {
  Vector solution;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool feasible = true;        // constraint satisfied at exit
  double max_violation = 0.0;  // worst constraint violation when infeasible
  bool converged = true;       // false when the iteration budget ran out
  std::vector<double> objective_trace;  // weighted objective per outer pass
};

CwlsResult solve_cwls(const CwlsProblem& p);

/// L + eps * (trace(L)/k) * I with eps = 1e-6; keeps degenerate training
/// covariances invertible.
Matrix regularize_covariance(const Matrix& cov);

}  // namespace tomograph

#endif
