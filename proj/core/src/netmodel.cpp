#include "tomograph/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace tomograph {

void Topology::validate() const {
  if (node_count < 2) throw std::invalid_argument("topology: node_count must be >= 2");
  if (links.empty()) throw std::invalid_argument("topology: at least one link required");
  std::set<std::pair<int, int>> seen;
  for (const Link& l : links) {
    if (l.from < 1 || l.from > node_count || l.to < 1 || l.to > node_count)
      throw std::invalid_argument("topology: link endpoint out of range");
    if (l.from == l.to)
      throw std::invalid_argument("topology: self-loop link");
    if (!seen.insert({l.from, l.to}).second)
      throw std::invalid_argument("topology: duplicate directed link");
  }
  if (!node_labels.empty() && static_cast<int>(node_labels.size()) != node_count)
    throw std::invalid_argument("topology: label count does not match node_count");
}

int RoutingMatrix::node_count() const {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries.cols()))));
  return n;
}

void RoutingMatrix::validate() const {
  const int n = node_count();
  if (static_cast<long>(n) * n != entries.cols())
    throw std::invalid_argument("routing matrix: column count is not a perfect square");
  for (long i = 0; i < entries.rows(); ++i)
    for (long j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("routing matrix: entries must be 0 or 1");
    }
}

int od_index(int src, int dst, int n) {
  if (n < 1) throw std::invalid_argument("od_index: n must be positive");
  if (src < 1 || src > n || dst < 1 || dst > n)
    throw std::invalid_argument("od_index: node index out of range");
  return (src - 1) * n + dst;
}

std::pair<int, int> od_pair(int k, int n) {
  if (k < 1 || k > n * n) throw std::invalid_argument("od_pair: index out of range");
  return {(k - 1) / n + 1, (k - 1) % n + 1};
}

LinkSeries link_counts(const RoutingMatrix& a, const TrafficSeries& x) {
  if (a.entries.cols() != x.values.cols())
    throw std::invalid_argument("link_counts: OD dimension mismatch");
  LinkSeries y;
  y.values = x.values * a.entries.transpose();
  y.timestep_seconds = x.timestep_seconds;
  return y;
}

namespace {

// Shortest hop-count paths from src to every node; among equal-length
// predecessors the lowest node index wins, so paths are reproducible.
std::vector<int> bfs_parents(const std::vector<std::vector<int>>& out_adj, int n, int src) {
  std::vector<int> dist(n + 1, -1);
  std::queue<int> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : out_adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  std::vector<int> parent(n + 1, 0);
  // in_adj scan in ascending node order realizes the tie-break
  for (int v = 1; v <= n; ++v) {
    if (v == src || dist[v] < 0) continue;
    for (int u = 1; u <= n; ++u) {
      if (dist[u] != dist[v] - 1) continue;
      if (std::find(out_adj[u].begin(), out_adj[u].end(), v) != out_adj[u].end()) {
        parent[v] = u;
        break;
      }
    }
  }
  return parent;
}

}  // namespace

std::pair<Topology, RoutingMatrix> gen_topology(std::uint64_t seed, int n,
                                                double avg_out_degree) {
  if (n < 2) throw std::invalid_argument("gen_topology: n must be >= 2");
  if (avg_out_degree < 1.0)
    throw std::invalid_argument("gen_topology: avg_out_degree must be >= 1");
  const long m_target = std::lround(n * avg_out_degree);
  const long m_max = static_cast<long>(n) * (n - 1);
  if (m_target < n || m_target > m_max)
    throw std::runtime_error("gen_topology: requested link count unachievable");

  std::mt19937_64 rng(seed);

  // A random Hamiltonian cycle guarantees strong connectivity; extra
  // directed edges are drawn from the shuffled remainder.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);

  std::set<std::pair<int, int>> edge_set;
  Topology topo;
  topo.node_count = n;
  for (int i = 0; i < n; ++i) {
    const int u = order[i];
    const int v = order[(i + 1) % n];
    topo.links.push_back({u, v});
    edge_set.insert({u, v});
  }
  std::vector<std::pair<int, int>> pool;
  for (int u = 1; u <= n; ++u)
    for (int v = 1; v <= n; ++v)
      if (u != v && !edge_set.count({u, v})) pool.push_back({u, v});
  std::shuffle(pool.begin(), pool.end(), rng);
  for (long i = 0; i < m_target - n; ++i) {
    topo.links.push_back({pool[i].first, pool[i].second});
    edge_set.insert(pool[i]);
  }
  topo.validate();

  const int m = topo.link_count();
  std::vector<std::vector<int>> out_adj(n + 1);
  std::map<std::pair<int, int>, int> link_id;  // 0-based link index
  for (int l = 0; l < m; ++l) {
    out_adj[topo.links[l].from].push_back(topo.links[l].to);
    link_id[{topo.links[l].from, topo.links[l].to}] = l;
  }
  for (int u = 1; u <= n; ++u) std::sort(out_adj[u].begin(), out_adj[u].end());

  RoutingMatrix a;
  a.entries = Matrix::Zero(m, static_cast<long>(n) * n);
  for (int src = 1; src <= n; ++src) {
    const std::vector<int> parent = bfs_parents(out_adj, n, src);
    for (int dst = 1; dst <= n; ++dst) {
      if (dst == src) continue;  // self columns stay zero
      const long col = od_index(src, dst, n) - 1;
      int v = dst;
      while (v != src) {
        const int u = parent[v];
        if (u == 0) throw std::runtime_error("gen_topology: graph not strongly connected");
        a.entries(link_id.at({u, v}), col) = 1.0;
        v = u;
      }
    }
  }
  return {std::move(topo), std::move(a)};
}

TrafficSeries gen_gravity_traffic(std::uint64_t seed, const Topology& topo,
                                  int samples, double mean_scale,
                                  double temporal_period, double noise_cv) {
  if (samples < 1) throw std::invalid_argument("gen_gravity_traffic: samples must be >= 1");
  if (mean_scale < 0.0) throw std::invalid_argument("gen_gravity_traffic: negative mean_scale");
  if (noise_cv < 0.0) throw std::invalid_argument("gen_gravity_traffic: negative noise_cv");
  topo.validate();
  const int n = topo.node_count;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);

  // Lognormal node weights give the usual elephant/mice spread.
  std::vector<double> origin_w(n), dest_w(n);
  for (int i = 0; i < n; ++i) origin_w[i] = std::exp(0.75 * stdnorm(rng));
  for (int i = 0; i < n; ++i) dest_w[i] = std::exp(0.75 * stdnorm(rng));
  const double dest_total = std::accumulate(dest_w.begin(), dest_w.end(), 0.0);

  const double log_sigma = noise_cv > 0.0 ? std::sqrt(std::log1p(noise_cv * noise_cv)) : 0.0;

  TrafficSeries x;
  x.values = Matrix::Zero(samples, static_cast<long>(n) * n);
  x.timestep_seconds = 300.0;
  for (int t = 0; t < samples; ++t) {
    const double diurnal =
        temporal_period > 0.0
            ? 1.0 + 0.5 * std::sin(2.0 * M_PI * static_cast<double>(t) / temporal_period)
            : 1.0;
    for (int j = 1; j <= n; ++j)
      for (int d = 1; d <= n; ++d) {
        double eps = 1.0;
        if (noise_cv > 0.0)
          eps = std::exp(log_sigma * stdnorm(rng) - 0.5 * log_sigma * log_sigma);
        x.values(t, od_index(j, d, n) - 1) =
            origin_w[j - 1] * dest_w[d - 1] / dest_total * mean_scale * diurnal * eps;
      }
  }
  return x;
}

}  // namespace tomograph
