#ifndef TOMOGRAPH_ESTIMATOR_HPP
#define TOMOGRAPH_ESTIMATOR_HPP

#include <filesystem>
#include <functional>
#include <vector>

#include "tomograph/demand.hpp"
#include "tomograph/ingest.hpp"
#include "tomograph/numerics.hpp"
#include "tomograph/subset.hpp"

namespace tomograph {

struct EstimatorConfig {
  int monitored_links = 0;  // s; 0 means monitor everything
  ConstraintMode constraint_mode = ConstraintMode::lower_bound;
  double solver_tolerance = 1e-8;
  int solver_max_iterations = 10000;
  bool renormalize_psi = false;
  int reselect_every = 1;
  bool include_self = false;
  /// Deployment-faithful variant: reselected links only get a fresh
  /// measurement one step later. Off by default (the simulator grants the
  /// current selection's measurements at every t).
  bool one_step_lag = false;
  /// When set, bypasses the trained regressor and uses this transform
  /// directly (known-demand runs and baselines comparisons).
  std::function<DemandTransform(long)> psi_source;
};

struct EstimatorState {
  Vector y_carry;  // last assembled/estimated link counts
  DemandRegressor regressor;
  RoutingMatrix A;
  Matrix link_cov;  // m x m, over the full training Y
  EstimatorConfig config;
  LinkSelection selection;
  long step_index = 0;
  bool bootstrapped = false;
};

struct StepResult {
  Vector x_hat;   // n^2 OD estimate
  Vector xc_hat;  // n source demands
  Vector y_hat;   // m model link counts
  LinkSelection selection;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool feasible = true;
  bool converged = true;
};

/// Trains the regressor on the training bundle and precomputes the full
/// link covariance. The carry vector is seeded by the first step's full
/// measurement.
EstimatorState init_state(const DatasetBundle& train, const EstimatorConfig& config);

/// Ridge-regularized normal-equations warm start, negatives clamped.
Vector prior_xc(const Matrix& phi_s, const Vector& y_s);

/// One estimation step. y_full holds the measurements of every link at
/// time t; the step only reads the entries its selection monitors (plus
/// all of them on the bootstrap step).
StepResult step(EstimatorState& state, const Vector& y_full);

/// Sequential fold of `step` over the first `horizon` test timestamps.
std::vector<StepResult> run(EstimatorState& state, const DatasetBundle& test, long horizon);

/// estimates.csv, demands.csv, diagnostics.csv, selection.csv.
void write_trace(const std::filesystem::path& dir, const std::vector<StepResult>& trace,
                 long start_index);

}  // namespace tomograph

#endif
