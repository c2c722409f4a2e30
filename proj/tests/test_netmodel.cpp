#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "support.hpp"
#include "tomograph/netmodel.hpp"
#include "tomograph/numerics.hpp"

using namespace tomograph;

TEST_CASE("od_index follows the canonical ordering") {
  CHECK(od_index(1, 1, 3) == 1);
  CHECK(od_index(1, 3, 3) == 3);
  CHECK(od_index(2, 1, 3) == 4);
  CHECK(od_index(3, 3, 3) == 9);
  for (int n : {2, 3, 5, 11}) {
    int k = 1;
    for (int s = 1; s <= n; ++s)
      for (int d = 1; d <= n; ++d) {
        CHECK(od_index(s, d, n) == k);
        CHECK(od_pair(k, n) == std::pair<int, int>{s, d});
        ++k;
      }
  }
}

TEST_CASE("od_index rejects out-of-range input") {
  CHECK_THROWS_AS(od_index(0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(od_index(1, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(od_pair(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(od_pair(10, 3), std::invalid_argument);
}

TEST_CASE("link_counts reproduces the worked example") {
  RoutingMatrix a;
  a.entries = tsupport::toy_routing();
  TrafficSeries x;
  x.values = tsupport::toy_x().transpose();
  x.timestep_seconds = 300.0;
  const LinkSeries y = link_counts(a, x);
  REQUIRE(y.values.rows() == 1);
  REQUIRE(y.values.cols() == 4);
  const Vector expected = tsupport::toy_y();
  for (int l = 0; l < 4; ++l) CHECK(y.values(0, l) == doctest::Approx(expected(l)).epsilon(1e-12));
  CHECK(y.timestep_seconds == 300.0);
}

TEST_CASE("topology validation rejects degenerate graphs") {
  Topology t;
  t.node_count = 1;
  t.links = {{1, 1}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);

  t.node_count = 3;
  t.links = {{1, 1}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // self link

  t.links = {{1, 2}, {1, 2}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // duplicate

  t.links = {{1, 2}, {2, 3}, {3, 1}};
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("gen_topology produces the requested link count and valid routing") {
  for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
    auto [topo, a] = gen_topology(seed, 6, 2.5);
    topo.validate();
    a.validate();
    CHECK(topo.link_count() == 15);  // lround(6 * 2.5)
    CHECK(a.link_count() == 15);
    CHECK(a.od_count() == 36);
    CHECK(a.node_count() == 6);

    // Self-flow columns are structurally zero.
    for (int j = 1; j <= 6; ++j)
      CHECK(a.entries.col(od_index(j, j, 6) - 1).cwiseAbs().maxCoeff() == 0.0);

    // Every off-diagonal OD pair is routed over at least one link, and the
    // path is link-flow consistent: out-degree minus in-degree is +1 at the
    // source, -1 at the destination, 0 elsewhere.
    for (int s = 1; s <= 6; ++s)
      for (int d = 1; d <= 6; ++d) {
        if (s == d) continue;
        const auto col = a.entries.col(od_index(s, d, 6) - 1);
        CHECK(col.sum() >= 1.0);
        std::vector<double> net(7, 0.0);
        for (int l = 0; l < topo.link_count(); ++l)
          if (col(l) > 0.5) {
            net[topo.links[l].from] += 1.0;
            net[topo.links[l].to] -= 1.0;
          }
        for (int v = 1; v <= 6; ++v) {
          const double want = v == s ? 1.0 : (v == d ? -1.0 : 0.0);
          CHECK(net[v] == doctest::Approx(want));
        }
      }
  }
}

TEST_CASE("gen_topology is deterministic and seed-sensitive") {
  auto [t1, a1] = gen_topology(9, 7, 2.0);
  auto [t2, a2] = gen_topology(9, 7, 2.0);
  auto [t3, a3] = gen_topology(10, 7, 2.0);
  CHECK(a1.entries == a2.entries);
  REQUIRE(t1.links.size() == t2.links.size());
  for (size_t i = 0; i < t1.links.size(); ++i) {
    CHECK(t1.links[i].from == t2.links[i].from);
    CHECK(t1.links[i].to == t2.links[i].to);
  }
  CHECK(a1.entries != a3.entries);
}

TEST_CASE("gen_topology rejects bad parameters") {
  CHECK_THROWS_AS(gen_topology(1, 1, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_topology(1, 5, 0.5), std::invalid_argument);  // below cycle degree
  CHECK_THROWS(gen_topology(1, 5, 10.0));                           // above complete graph
}

TEST_CASE("gravity traffic is deterministic and nonnegative") {
  auto [topo, a] = gen_topology(3, 5, 2.0);
  const TrafficSeries x1 = gen_gravity_traffic(11, topo, 40, 100.0, 20.0, 0.3);
  const TrafficSeries x2 = gen_gravity_traffic(11, topo, 40, 100.0, 20.0, 0.3);
  CHECK(x1.values == x2.values);
  CHECK(x1.values.rows() == 40);
  CHECK(x1.values.cols() == 25);
  CHECK(x1.values.minCoeff() >= 0.0);
}

TEST_CASE("noise-free gravity per-source totals are proportional to origin weights") {
  auto [topo, a] = gen_topology(5, 6, 2.0);
  const TrafficSeries x = gen_gravity_traffic(5, topo, 3, 80.0, 0.0, 0.0);
  // Row sums per source vs total: every source's share is constant in t.
  Vector share0(6);
  for (long t = 0; t < x.values.rows(); ++t) {
    const double total = x.values.row(t).sum();
    for (int j = 1; j <= 6; ++j) {
      double s = 0.0;
      for (int d = 1; d <= 6; ++d) s += x.values(t, od_index(j, d, 6) - 1);
      if (t == 0)
        share0(j - 1) = s / total;
      else
        CHECK(s / total == doctest::Approx(share0(j - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("link_counts is linear") {
  auto [topo, a] = gen_topology(8, 5, 2.0);
  const TrafficSeries x1 = gen_gravity_traffic(1, topo, 6, 40.0, 8.0, 0.5);
  const TrafficSeries x2 = gen_gravity_traffic(2, topo, 6, 70.0, 0.0, 0.1);
  TrafficSeries mix;
  mix.values = 2.5 * x1.values + x2.values;
  mix.timestep_seconds = 300.0;
  const Matrix lhs = link_counts(a, mix).values;
  const Matrix rhs = 2.5 * link_counts(a, x1).values + link_counts(a, x2).values;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gravity traffic without noise or diurnal factor is constant in time") {
  auto [topo, a] = gen_topology(5, 5, 2.0);
  const TrafficSeries x = gen_gravity_traffic(2, topo, 10, 50.0, 0.0, 0.0);
  for (long t = 1; t < x.values.rows(); ++t)
    CHECK((x.values.row(t) - x.values.row(0)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("gravity traffic scale tracks mean_scale") {
  auto [topo, a] = gen_topology(8, 6, 2.0);
  const TrafficSeries lo = gen_gravity_traffic(3, topo, 200, 10.0, 0.0, 0.2);
  const TrafficSeries hi = gen_gravity_traffic(3, topo, 200, 1000.0, 0.0, 0.2);
  CHECK(hi.values.mean() / lo.values.mean() == doctest::Approx(100.0).epsilon(1e-9));
}
