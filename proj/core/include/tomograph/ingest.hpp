#ifndef TOMOGRAPH_INGEST_HPP
#define TOMOGRAPH_INGEST_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tomograph/netmodel.hpp"

namespace tomograph {

struct DatasetBundle {
  Topology topology;
  RoutingMatrix A;
  TrafficSeries X;
  std::string provenance;

  void validate() const;
};

struct SplitSpec {
  int train_len = 0;
  int test_len = 0;
};

/// Traffic values with an out-of-band gap mask, the pre-imputation
/// intermediate produced by the parsers.
struct GappedSeries {
  Matrix values;                         // gap cells hold 0 and are masked
  std::vector<std::vector<bool>> gaps;   // T x n^2
  double timestep_seconds = 0.0;
};

/// Canonical CSV bundle: tm.csv, routing.csv, meta.csv (links.csv is a
/// derived output, never read back).
DatasetBundle parse_canonical(const std::filesystem::path& tm_path,
                              const std::filesystem::path& routing_path,
                              const std::filesystem::path& meta_path);

/// Writes tm.csv, routing.csv, links.csv and meta.csv into `dir`.
void write_canonical(const std::filesystem::path& dir, const DatasetBundle& bundle);

/// Abilene flat files: `routing.txt` (41 x 121 whitespace 0/1 matrix) plus
/// any number of TM block files, whitespace-separated with exactly 121
/// columns, one row per 5-minute interval, concatenated in lexicographic
/// filename order.
DatasetBundle parse_abilene(const std::filesystem::path& dir);

/// GEANT-style directory: `nodes.txt` (one label per line, canonical
/// order), `routing.txt` (m x n^2 whitespace 0/1 matrix) and per-timestamp
/// XML files (*.xml, lexicographic order) shaped as
/// <IntraTM><src id="L"><dst id="L">value</dst>...</src>...</IntraTM>.
/// Absent off-diagonal demands become gaps; absent self demands are 0.
DatasetBundle parse_geant_xml(const std::filesystem::path& dir);

/// Per-column linear interpolation of interior gaps; leading gaps
/// back-fill, trailing gaps forward-fill, all-gap columns zero-fill with a
/// warning appended to `warnings`.
TrafficSeries impute_gaps(const GappedSeries& g, std::vector<std::string>* warnings = nullptr);

/// Contiguous prefix/suffix split.
std::pair<DatasetBundle, DatasetBundle> split(const DatasetBundle& bundle, const SplitSpec& spec);

}  // namespace tomograph

#endif
