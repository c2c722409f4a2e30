#ifndef TOMOGRAPH_DEMAND_HPP
#define TOMOGRAPH_DEMAND_HPP

#include <filesystem>
#include <vector>

#include "tomograph/netmodel.hpp"

namespace tomograph {

struct PsiPolicy {
  /// Count self flows (hot-potato datasets) in the per-source fractions.
  /// Off by default: self rows stay structurally zero.
  bool include_self = false;
};

/// n^2 x n per-source destination fractions. Row (j,d) can only be
/// nonzero in column j; for every source with positive demand the column
/// sums to 1.
struct DemandTransform {
  Matrix entries;
  int n = 0;
  bool include_self = false;

  void validate() const;
};

/// m x n probability-weighted measurement matrix, A * Psi.
struct CompressedMeasurement {
  Matrix entries;

  int link_count() const { return static_cast<int>(entries.rows()); }
  int source_count() const { return static_cast<int>(entries.cols()); }
};

/// Affine coefficients mapping [1; Y(t)] to each potential Psi nonzero.
struct DemandRegressor {
  Matrix beta;               // (m+1) x n^2
  std::vector<bool> fitted;  // n^2, false for structurally-zero rows
  int n = 0;
  bool include_self = false;
};

struct RegressorOptions {
  bool robust = true;  // Huber IRLS on top of the least-squares fit
  int max_irls_iterations = 50;
};

struct PredictOptions {
  /// Renormalize each source column to sum 1 after clamping. Off by
  /// default: the raw affine prediction is only clamped to [0,1].
  bool renormalize = false;
};

DemandTransform build_psi(const Vector& x_t, int n, const PsiPolicy& policy = {});

CompressedMeasurement build_phi(const RoutingMatrix& a, const DemandTransform& psi);

DemandRegressor train_regressor(const LinkSeries& y_train,
                                const std::vector<DemandTransform>& psi_train,
                                const RegressorOptions& options = {});

DemandTransform predict_psi(const DemandRegressor& reg, const Vector& y_hat,
                            const PredictOptions& options = {});

/// beta.csv ((m+1) rows x n^2 columns) plus fitted.csv (one 0/1 row).
void save_regressor(const std::filesystem::path& dir, const DemandRegressor& reg);
DemandRegressor load_regressor(const std::filesystem::path& dir);

}  // namespace tomograph

#endif
