#ifndef TOMOGRAPH_BASELINES_HPP
#define TOMOGRAPH_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "tomograph/demand.hpp"
#include "tomograph/estimator.hpp"
#include "tomograph/netmodel.hpp"

namespace tomograph {

enum class BasisKind { pca, cur, pme };

/// Static compressed basis shared by the three comparison schemes. All of
/// them monitor every link and never update psi_static during a run.
struct StaticBasis {
  BasisKind kind = BasisKind::pca;
  Matrix psi_static;  // n^2 x k
  Matrix phi_static;  // m x k = A * psi_static
  Vector mean;        // n^2 training mean, nonzero only for pca
  int k = 0;
};

/// Top-k left singular vectors of the column-centered n^2 x T training
/// matrix; reconstruction adds the mean back.
StaticBasis train_pca_basis(const TrafficSeries& x_train, const RoutingMatrix& a, int k);

/// k training snapshots picked by pivoted QR on the top-k right singular
/// subspace, each scaled to unit norm.
StaticBasis train_cur_basis(const TrafficSeries& x_train, const RoutingMatrix& a, int k);

/// One noisy draw per OD flow from N(mu, (sigma_factor*mu)^2), truncated
/// at zero, turned into per-source fractions. k = n.
StaticBasis train_pme_basis(const TrafficSeries& x_train, const RoutingMatrix& a,
                            double sigma_factor, std::uint64_t seed);

struct BaselineOptions {
  ConstraintMode pme_constraint_mode = ConstraintMode::lower_bound;
  double solver_tolerance = 1e-8;
  int solver_max_iterations = 10000;
};

/// Per-timestamp weighted least-squares fit against the static basis.
/// Coefficients are nonnegative only for pme (they are physical demands);
/// pca/cur reconstructions are clamped at zero instead.
std::vector<StepResult> run_baseline(const StaticBasis& basis, const RoutingMatrix& a,
                                     const LinkSeries& y_test, const Matrix& link_cov,
                                     const BaselineOptions& options = {});

}  // namespace tomograph

#endif
