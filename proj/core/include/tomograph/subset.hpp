#ifndef TOMOGRAPH_SUBSET_HPP
#define TOMOGRAPH_SUBSET_HPP

#include <utility>
#include <vector>

#include "tomograph/demand.hpp"
#include "tomograph/netmodel.hpp"

namespace tomograph {

/// Link ranking produced by SVD + column-pivoted QR of Phi. pivot_order
/// is a 1-based permutation of 1..m; the monitored set is its first
/// monitored_count entries.
struct LinkSelection {
  std::vector<int> pivot_order;
  int monitored_count = 0;

  std::vector<int> monitored() const {
    return {pivot_order.begin(), pivot_order.begin() + monitored_count};
  }
};

/// Rank links by information content: full SVD of phi_hat, pivoted QR of
/// the transposed leading left singular vectors. Deterministic.
LinkSelection select_links(const CompressedMeasurement& phi_hat, int s);

/// Gather the monitored rows: (y_s, phi_s) in pivot order.
std::pair<Vector, Matrix> slice_system(const LinkSelection& sel, const Vector& y,
                                       const CompressedMeasurement& phi_hat);

/// Inverse of the gather: monitored values land on their original link
/// positions, everything else comes from `fill`.
Vector scatter(const LinkSelection& sel, const Vector& y_s, const Vector& fill);

}  // namespace tomograph

#endif
