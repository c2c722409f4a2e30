#ifndef TOMOGRAPH_NETMODEL_HPP
#define TOMOGRAPH_NETMODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tomograph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Directed link between two nodes. Node indices are 1-based, like every
/// other index on the public surface of this library.
struct Link {
  int from = 0;
  int to = 0;
};

struct Topology {
  int node_count = 0;                    // n
  std::vector<Link> links;               // length m, ordered
  std::vector<std::string> node_labels;  // optional, size 0 or n

  int link_count() const { return static_cast<int>(links.size()); }

  /// Throws std::invalid_argument on n < 2, m < 1, bad endpoints or
  /// duplicate directed links.
  void validate() const;
};

/// Binary m x n^2 link-over-path incidence. Column order follows the
/// canonical OD ordering (all pairs sourced at node 1 first, then node 2...).
struct RoutingMatrix {
  Matrix entries;  // m x n^2, every entry 0 or 1

  int link_count() const { return static_cast<int>(entries.rows()); }
  int od_count() const { return static_cast<int>(entries.cols()); }
  int node_count() const;

  void validate() const;
};

/// T x n^2 series of OD flow volumes in kbps.
struct TrafficSeries {
  Matrix values;
  double timestep_seconds = 0.0;
  long start_index = 1;

  int sample_count() const { return static_cast<int>(values.rows()); }
  int od_count() const { return static_cast<int>(values.cols()); }
};

/// T x m series of link byte-rates in kbps.
struct LinkSeries {
  Matrix values;
  double timestep_seconds = 0.0;

  int sample_count() const { return static_cast<int>(values.rows()); }
  int link_count() const { return static_cast<int>(values.cols()); }
};

/// Canonical OD index of the (src, dst) pair: (src-1)*n + dst, 1-based.
int od_index(int src, int dst, int n);

/// Inverse of od_index: OD index k -> (src, dst).
std::pair<int, int> od_pair(int k, int n);

/// Y = A X, exact product, no noise.
LinkSeries link_counts(const RoutingMatrix& a, const TrafficSeries& x);

/// Seeded random strongly connected digraph with exactly
/// lround(n * avg_out_degree) directed links, plus the routing matrix of
/// hop-count shortest paths (lowest-node-index tie-break). Self-flow
/// columns are all-zero.
std::pair<Topology, RoutingMatrix> gen_topology(std::uint64_t seed, int n,
                                                double avg_out_degree);

/// Gravity-model synthetic traffic: flow (j,d) is o_j * a_d / sum(a),
/// scaled by mean_scale, a sinusoidal diurnal factor of the given period
/// (period <= 0 disables it) and lognormal multiplicative noise with the
/// given coefficient of variation. Seeded-deterministic.
TrafficSeries gen_gravity_traffic(std::uint64_t seed, const Topology& topo,
                                  int samples, double mean_scale,
                                  double temporal_period, double noise_cv);

}  // namespace tomograph

#endif
