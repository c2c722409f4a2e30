#include "tomograph/estimator.hpp"

#include <numeric>
#include <stdexcept>

#include "tomograph/csv.hpp"

namespace tomograph {

EstimatorState init_state(const DatasetBundle& train, const EstimatorConfig& config) {
  train.validate();
  const long samples = train.X.values.rows();
  if (samples < 1) throw std::invalid_argument("init_state: empty training data");
  const int n = train.topology.node_count;
  const int m = train.A.link_count();

  EstimatorState state;
  state.A = train.A;
  state.config = config;
  if (state.config.monitored_links <= 0) state.config.monitored_links = m;
  if (state.config.monitored_links > m)
    throw std::invalid_argument("init_state: monitored_links exceeds link count");
  if (state.config.reselect_every < 1) state.config.reselect_every = 1;

  const LinkSeries y_train = link_counts(train.A, train.X);

  if (!config.psi_source) {
    std::vector<DemandTransform> psis;
    psis.reserve(samples);
    const PsiPolicy policy{config.include_self};
    for (long t = 0; t < samples; ++t)
      psis.push_back(build_psi(train.X.values.row(t).transpose(), n, policy));
    state.regressor = train_regressor(y_train, psis);
  } else {
    state.regressor.n = n;
    state.regressor.include_self = config.include_self;
  }

  // Full m x m covariance over training Y; sliced per selection later.
  state.link_cov = Matrix::Zero(m, m);
  if (samples >= 2) {
    const Eigen::RowVectorXd mean = y_train.values.colwise().mean();
    const Matrix centered = y_train.values.rowwise() - mean;
    state.link_cov = centered.transpose() * centered / static_cast<double>(samples - 1);
  }

  state.y_carry = Vector::Zero(m);
  state.selection.pivot_order.resize(m);
  std::iota(state.selection.pivot_order.begin(), state.selection.pivot_order.end(), 1);
  state.selection.monitored_count = state.config.monitored_links;
  return state;
}

Vector prior_xc(const Matrix& phi_s, const Vector& y_s) {
  if (phi_s.rows() != y_s.size()) throw std::invalid_argument("prior_xc: dimension mismatch");
  const long n = phi_s.cols();
  const Matrix gram = phi_s.transpose() * phi_s;
  const double lambda = 1e-8 * gram.trace() / static_cast<double>(n);
  const Vector x = (gram + lambda * Matrix::Identity(n, n))
                       .ldlt()
                       .solve(phi_s.transpose() * y_s);
  return x.cwiseMax(0.0);
}

StepResult step(EstimatorState& state, const Vector& y_full) {
  const int m = state.A.link_count();
  if (y_full.size() != m) throw std::invalid_argument("step: measurement size mismatch");
  const EstimatorConfig& cfg = state.config;

  // (1) assemble from what the previous selection monitored
  Vector y_assembled;
  if (!state.bootstrapped) {
    y_assembled = y_full;  // one full measurement to bootstrap the carry
    state.bootstrapped = true;
  } else {
    Vector monitored(state.selection.monitored_count);
    for (int i = 0; i < state.selection.monitored_count; ++i)
      monitored(i) = y_full(state.selection.pivot_order[i] - 1);
    y_assembled = scatter(state.selection, monitored, state.y_carry);
  }

  // (2)-(3) predict the demand transform and compressed matrix
  const DemandTransform psi_hat =
      cfg.psi_source ? cfg.psi_source(state.step_index)
                     : predict_psi(state.regressor, y_assembled,
                                   PredictOptions{cfg.renormalize_psi});
  const CompressedMeasurement phi_hat = build_phi(state.A, psi_hat);

  // (4) reselect on cadence
  if (state.step_index % cfg.reselect_every == 0)
    state.selection = select_links(phi_hat, cfg.monitored_links);

  // (5) slice; fresh measurements for the current selection unless the
  // one-step-lag variant is on
  const Vector& measurement_view = cfg.one_step_lag ? y_assembled : y_full;
  auto [y_s, phi_s] = slice_system(state.selection, measurement_view, phi_hat);

  Matrix cov_s(state.selection.monitored_count, state.selection.monitored_count);
  for (int i = 0; i < state.selection.monitored_count; ++i)
    for (int j = 0; j < state.selection.monitored_count; ++j)
      cov_s(i, j) = state.link_cov(state.selection.pivot_order[i] - 1,
                                   state.selection.pivot_order[j] - 1);
  const Matrix cov_reg = regularize_covariance(cov_s);
  const Matrix weight = cov_reg.llt().solve(
      Matrix::Identity(cov_reg.rows(), cov_reg.cols()));

  // (6) warm-started constrained solve, unconstrained nonnegative fallback
  CwlsProblem problem;
  problem.design = phi_s;
  problem.target = y_s;
  problem.weight = weight;
  problem.constraint_mode = cfg.constraint_mode;
  problem.start = prior_xc(phi_s, y_s);
  problem.tolerance = cfg.solver_tolerance;
  problem.max_iterations = cfg.solver_max_iterations;

  CwlsResult solved = solve_cwls(problem);
  bool feasible = solved.feasible;
  if (!solved.feasible && cfg.constraint_mode != ConstraintMode::none) {
    CwlsProblem fallback = problem;
    fallback.constraint_mode = ConstraintMode::none;
    const CwlsResult retry = solve_cwls(fallback);
    solved.solution = retry.solution;
    solved.kkt_residual = retry.kkt_residual;
    solved.iterations += retry.iterations;
    solved.converged = retry.converged;
  }

  // (7) recover and carry forward
  StepResult result;
  result.xc_hat = solved.solution;
  result.x_hat = psi_hat.entries * result.xc_hat;
  result.y_hat = phi_hat.entries * result.xc_hat;
  result.selection = state.selection;
  result.iterations = solved.iterations;
  result.kkt_residual = solved.kkt_residual;
  result.feasible = feasible;
  result.converged = solved.converged;

  state.y_carry = result.y_hat;
  for (int i = 0; i < state.selection.monitored_count; ++i) {
    const int link = state.selection.pivot_order[i] - 1;
    state.y_carry(link) = measurement_view(link);
  }
  ++state.step_index;
  return result;
}

std::vector<StepResult> run(EstimatorState& state, const DatasetBundle& test, long horizon) {
  if (horizon < 0 || horizon > test.X.values.rows())
    throw std::invalid_argument("run: horizon exceeds test length");
  const LinkSeries y_test = link_counts(test.A, test.X);
  std::vector<StepResult> trace;
  trace.reserve(horizon);
  for (long t = 0; t < horizon; ++t)
    trace.push_back(step(state, y_test.values.row(t).transpose()));
  return trace;
}

void write_trace(const std::filesystem::path& dir, const std::vector<StepResult>& trace,
                 long start_index) {
  std::filesystem::create_directories(dir);
  if (trace.empty()) return;
  const long odn = trace.front().x_hat.size();
  const long n = trace.front().xc_hat.size();
  const long s = trace.front().selection.monitored_count;
  const long T = static_cast<long>(trace.size());

  std::vector<double> t_col(T);
  for (long t = 0; t < T; ++t) t_col[t] = static_cast<double>(start_index + t);

  Matrix estimates(T, odn), demands(T, n), diagnostics(T, 4), selection(T, s);
  for (long t = 0; t < T; ++t) {
    estimates.row(t) = trace[t].x_hat.transpose();
    demands.row(t) = trace[t].xc_hat.transpose();
    diagnostics(t, 0) = trace[t].iterations;
    diagnostics(t, 1) = trace[t].kkt_residual;
    diagnostics(t, 2) = trace[t].feasible ? 1.0 : 0.0;
    diagnostics(t, 3) = static_cast<double>(trace[t].selection.monitored_count);
    for (long i = 0; i < s; ++i) selection(t, i) = trace[t].selection.pivot_order[i];
  }

  std::vector<std::string> est_header{"t"}, dem_header{"t"}, sel_header{"t"};
  for (long i = 1; i <= odn; ++i) est_header.push_back("od_" + std::to_string(i));
  for (long i = 1; i <= n; ++i) dem_header.push_back("src_" + std::to_string(i));
  for (long i = 1; i <= s; ++i) sel_header.push_back("link_" + std::to_string(i));
  write_csv(dir / "estimates.csv", est_header, estimates, &t_col);
  write_csv(dir / "demands.csv", dem_header, demands, &t_col);
  write_csv(dir / "diagnostics.csv", {"t", "iterations", "kkt", "feasible", "s"}, diagnostics,
            &t_col);
  write_csv(dir / "selection.csv", sel_header, selection, &t_col);
}

}  // namespace tomograph
