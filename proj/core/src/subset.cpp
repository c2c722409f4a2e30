#include "tomograph/subset.hpp"

#include <stdexcept>

#include "tomograph/numerics.hpp"

namespace tomograph {

LinkSelection select_links(const CompressedMeasurement& phi_hat, int s) {
  const int m = phi_hat.link_count();
  if (s < 1 || s > m) throw std::invalid_argument("select_links: s out of range 1..m");

  const SvdResult dec = svd(phi_hat.entries);
  const Matrix u_k = dec.U.leftCols(std::min<long>(s, m));
  const PivotedQr qr = qr_pivot(u_k.transpose());

  LinkSelection sel;
  sel.pivot_order = qr.pivot_order;
  sel.monitored_count = s;
  return sel;
}

std::pair<Vector, Matrix> slice_system(const LinkSelection& sel, const Vector& y,
                                       const CompressedMeasurement& phi_hat) {
  const long m = y.size();
  if (phi_hat.entries.rows() != m || static_cast<long>(sel.pivot_order.size()) != m)
    throw std::invalid_argument("slice_system: dimension mismatch");
  const int s = sel.monitored_count;
  Vector y_s(s);
  Matrix phi_s(s, phi_hat.entries.cols());
  for (int i = 0; i < s; ++i) {
    const int link = sel.pivot_order[i] - 1;
    y_s(i) = y(link);
    phi_s.row(i) = phi_hat.entries.row(link);
  }
  return {std::move(y_s), std::move(phi_s)};
}

Vector scatter(const LinkSelection& sel, const Vector& y_s, const Vector& fill) {
  if (y_s.size() != sel.monitored_count)
    throw std::invalid_argument("scatter: monitored vector size mismatch");
  if (fill.size() != static_cast<long>(sel.pivot_order.size()))
    throw std::invalid_argument("scatter: fill vector size mismatch");
  Vector out = fill;
  for (int i = 0; i < sel.monitored_count; ++i) out(sel.pivot_order[i] - 1) = y_s(i);
  return out;
}

}  // namespace tomograph
