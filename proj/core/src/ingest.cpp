#include "tomograph/ingest.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <map>

#include "tomograph/csv.hpp"

namespace tomograph {

namespace fs = std::filesystem;

void DatasetBundle::validate() const {
  const int n = topology.node_count;
  if (n < 2) throw std::invalid_argument("dataset: node_count must be >= 2");
  if (A.entries.cols() != static_cast<long>(n) * n)
    throw std::invalid_argument("dataset: routing matrix column count != n^2");
  if (X.values.cols() != A.entries.cols())
    throw std::invalid_argument("dataset: traffic series OD count != n^2");
  if (X.values.minCoeff() < 0.0)
    throw std::invalid_argument("dataset: negative traffic value");
}

namespace {

RoutingMatrix routing_from_values(const Matrix& m, const fs::path& path) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      if (m(r, c) != 0.0 && m(r, c) != 1.0)
        throw ParseError(path, r + 1,
                         "routing entry must be 0 or 1, got " + format_value(m(r, c)));
  RoutingMatrix a;
  a.entries = m;
  const long n = std::lround(std::sqrt(static_cast<double>(m.cols())));
  if (n * n != m.cols())
    throw ParseError(path, 1, "routing column count is not a perfect square");
  return a;
}

std::vector<fs::path> sorted_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename().string().front() != '.')
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

DatasetBundle parse_canonical(const fs::path& tm_path, const fs::path& routing_path,
                              const fs::path& meta_path) {
  const CsvTable meta = read_csv(meta_path, false);
  if (meta.values.rows() != 1 || meta.values.cols() != 3)
    throw ParseError(meta_path, 1, "meta.csv must be a single row: n,m,timestep_seconds");
  const int n = static_cast<int>(meta.values(0, 0));
  const int m = static_cast<int>(meta.values(0, 1));
  const double timestep = meta.values(0, 2);
  if (n < 2 || m < 1 || timestep <= 0.0)
    throw ParseError(meta_path, 1, "meta.csv values out of range");

  const CsvTable routing = read_csv(routing_path, false);
  if (routing.values.rows() != m)
    throw ParseError(routing_path, 1, "expected " + std::to_string(m) + " routing rows");
  if (routing.values.cols() != static_cast<long>(n) * n)
    throw ParseError(routing_path, 1, "expected n^2 routing columns");
  for (long r = 0; r < routing.values.rows(); ++r)
    for (long c = 0; c < routing.values.cols(); ++c)
      if (routing.values(r, c) != 0.0 && routing.values(r, c) != 1.0)
        throw ParseError(routing_path, r + 1, "routing entry must be 0 or 1, got " +
                                                  format_value(routing.values(r, c)));

  const CsvTable tm = read_csv(tm_path, true);
  if (tm.values.cols() != static_cast<long>(n) * n + 1)
    throw ParseError(tm_path, 1, "expected t plus n^2 OD columns");
  for (long r = 0; r < tm.values.rows(); ++r)
    for (long c = 1; c < tm.values.cols(); ++c)
      if (tm.values(r, c) < 0.0)
        throw ParseError(tm_path, r + 2, "negative traffic value");

  DatasetBundle b;
  b.topology.node_count = n;  // link endpoints are not part of the canonical format
  b.A.entries = routing.values;
  b.X.values = tm.values.rightCols(tm.values.cols() - 1);
  b.X.timestep_seconds = timestep;
  b.X.start_index = tm.values.rows() > 0 ? static_cast<long>(tm.values(0, 0)) : 1;
  b.provenance = "canonical:" + tm_path.string();
  return b;
}

void write_canonical(const fs::path& dir, const DatasetBundle& bundle) {
  fs::create_directories(dir);
  const int n = bundle.topology.node_count;
  const long odn = bundle.X.values.cols();

  std::vector<std::string> tm_header{"t"};
  for (long i = 1; i <= odn; ++i) tm_header.push_back("od_" + std::to_string(i));
  std::vector<double> t_col(bundle.X.values.rows());
  for (long t = 0; t < bundle.X.values.rows(); ++t)
    t_col[t] = static_cast<double>(bundle.X.start_index + t);
  write_csv(dir / "tm.csv", tm_header, bundle.X.values, &t_col);

  write_csv(dir / "routing.csv", {}, bundle.A.entries);

  const LinkSeries y = link_counts(bundle.A, bundle.X);
  std::vector<std::string> link_header{"t"};
  for (long i = 1; i <= y.values.cols(); ++i) link_header.push_back("link_" + std::to_string(i));
  write_csv(dir / "links.csv", link_header, y.values, &t_col);

  Matrix meta(1, 3);
  meta << static_cast<double>(n), static_cast<double>(bundle.A.entries.rows()),
      bundle.X.timestep_seconds;
  write_csv(dir / "meta.csv", {}, meta);
}

DatasetBundle parse_abilene(const fs::path& dir) {
  const fs::path routing_path = dir / "routing.txt";
  if (!fs::exists(routing_path))
    throw std::runtime_error("abilene: missing companion routing file " + routing_path.string());
  const Matrix routing = read_whitespace_matrix(routing_path);
  if (routing.cols() != 121)
    throw ParseError(routing_path, 1, "abilene routing file must have 121 columns");
  RoutingMatrix a = routing_from_values(routing, routing_path);

  std::vector<Matrix> blocks;
  long total_rows = 0;
  for (const fs::path& f : sorted_files(dir)) {
    if (f.filename() == "routing.txt") continue;
    Matrix block = read_whitespace_matrix(f);
    if (block.cols() != 121)
      throw ParseError(f, 1, "abilene TM row must have 121 columns, got " +
                                 std::to_string(block.cols()));
    if (block.minCoeff() < 0.0) throw ParseError(f, 1, "negative traffic value");
    total_rows += block.rows();
    blocks.push_back(std::move(block));
  }
  if (blocks.empty()) throw std::runtime_error("abilene: no TM files in " + dir.string());

  DatasetBundle b;
  b.topology.node_count = 11;
  b.A = std::move(a);
  b.X.values.resize(total_rows, 121);
  long row = 0;
  for (const Matrix& block : blocks) {
    b.X.values.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  b.X.timestep_seconds = 300.0;
  b.provenance = "abilene:" + dir.string();
  b.validate();
  return b;
}

namespace {

GappedSeries parse_geant_gapped(const fs::path& dir, std::vector<std::string>& labels) {
  const fs::path nodes_path = dir / "nodes.txt";
  std::ifstream nodes(nodes_path);
  if (!nodes) throw std::runtime_error("geant: missing " + nodes_path.string());
  std::string line;
  while (std::getline(nodes, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  const int n = static_cast<int>(labels.size());
  if (n < 2) throw ParseError(nodes_path, 1, "geant: need at least 2 node labels");
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i)
    if (!index.emplace(labels[i], i + 1).second)
      throw ParseError(nodes_path, i + 1, "duplicate node label: " + labels[i]);

  std::vector<fs::path> xml_files;
  for (const fs::path& f : sorted_files(dir))
    if (f.extension() == ".xml") xml_files.push_back(f);
  if (xml_files.empty()) throw std::runtime_error("geant: no XML files in " + dir.string());

  GappedSeries g;
  g.timestep_seconds = 900.0;
  const long odn = static_cast<long>(n) * n;
  g.values = Matrix::Zero(static_cast<long>(xml_files.size()), odn);
  g.gaps.assign(xml_files.size(), std::vector<bool>(odn, false));

  for (size_t t = 0; t < xml_files.size(); ++t) {
    // everything off-diagonal starts as a gap; self demands default to 0
    for (int s = 1; s <= n; ++s)
      for (int d = 1; d <= n; ++d)
        if (s != d) g.gaps[t][od_index(s, d, n) - 1] = true;

    boost::property_tree::ptree doc;
    try {
      boost::property_tree::read_xml(xml_files[t].string(), doc);
    } catch (const std::exception& e) {
      throw ParseError(xml_files[t], 0, std::string("XML parse failure: ") + e.what());
    }
    const auto root = doc.get_child_optional("IntraTM");
    if (!root) throw ParseError(xml_files[t], 0, "missing <IntraTM> root element");
    for (const auto& [src_tag, src_node] : *root) {
      if (src_tag != "src") continue;
      const std::string src_label = src_node.get<std::string>("<xmlattr>.id", "");
      const auto src_it = index.find(src_label);
      if (src_it == index.end())
        throw ParseError(xml_files[t], 0, "unknown src node label: '" + src_label + "'");
      for (const auto& [dst_tag, dst_node] : src_node) {
        if (dst_tag != "dst") continue;
        const std::string dst_label = dst_node.get<std::string>("<xmlattr>.id", "");
        const auto dst_it = index.find(dst_label);
        if (dst_it == index.end())
          throw ParseError(xml_files[t], 0, "unknown dst node label: '" + dst_label + "'");
        const double value = dst_node.get_value<double>();
        if (value < 0.0) throw ParseError(xml_files[t], 0, "negative demand value");
        const long col = od_index(src_it->second, dst_it->second, n) - 1;
        g.values(t, col) = value;
        g.gaps[t][col] = false;
      }
    }
  }
  return g;
}

}  // namespace

DatasetBundle parse_geant_xml(const fs::path& dir) {
  std::vector<std::string> labels;
  GappedSeries g = parse_geant_gapped(dir, labels);
  const int n = static_cast<int>(labels.size());

  const fs::path routing_path = dir / "routing.txt";
  if (!fs::exists(routing_path))
    throw std::runtime_error("geant: missing companion routing file " + routing_path.string());
  const Matrix routing = read_whitespace_matrix(routing_path);
  if (routing.cols() != static_cast<long>(n) * n)
    throw ParseError(routing_path, 1, "geant routing file must have n^2 columns");

  DatasetBundle b;
  b.topology.node_count = n;
  b.topology.node_labels = labels;
  b.A = routing_from_values(routing, routing_path);
  b.X = impute_gaps(g);
  b.provenance = "geant:" + dir.string();
  b.validate();
  return b;
}

TrafficSeries impute_gaps(const GappedSeries& g, std::vector<std::string>* warnings) {
  const long rows = g.values.rows();
  const long cols = g.values.cols();
  if (static_cast<long>(g.gaps.size()) != rows)
    throw std::invalid_argument("impute_gaps: mask shape mismatch");

  TrafficSeries x;
  x.values = g.values;
  x.timestep_seconds = g.timestep_seconds;

  for (long c = 0; c < cols; ++c) {
    std::vector<long> observed;
    for (long t = 0; t < rows; ++t)
      if (!g.gaps[t][c]) observed.push_back(t);
    if (observed.empty()) {
      x.values.col(c).setZero();
      if (warnings)
        warnings->push_back("column " + std::to_string(c + 1) + " has no observations; zero-filled");
      continue;
    }
    // leading back-fill
    for (long t = 0; t < observed.front(); ++t) x.values(t, c) = g.values(observed.front(), c);
    // trailing forward-fill
    for (long t = observed.back() + 1; t < rows; ++t) x.values(t, c) = g.values(observed.back(), c);
    // interior linear interpolation between consecutive observations
    for (size_t k = 0; k + 1 < observed.size(); ++k) {
      const long a = observed[k], b = observed[k + 1];
      for (long t = a + 1; t < b; ++t) {
        const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
        x.values(t, c) = (1.0 - w) * g.values(a, c) + w * g.values(b, c);
      }
    }
  }
  if (x.values.size() > 0 && x.values.minCoeff() < 0.0)
    throw std::logic_error("impute_gaps: produced a negative value");
  return x;
}

std::pair<DatasetBundle, DatasetBundle> split(const DatasetBundle& bundle, const SplitSpec& spec) {
  const long T = bundle.X.values.rows();
  if (spec.train_len < 1 || spec.test_len < 1)
    throw std::invalid_argument("split: train_len and test_len must be >= 1");
  if (static_cast<long>(spec.train_len) + spec.test_len > T)
    throw std::invalid_argument("split: train_len + test_len exceeds series length");

  DatasetBundle train = bundle;
  DatasetBundle test = bundle;
  train.X.values = bundle.X.values.topRows(spec.train_len);
  test.X.values = bundle.X.values.middleRows(spec.train_len, spec.test_len);
  test.X.start_index = bundle.X.start_index + spec.train_len;
  return {std::move(train), std::move(test)};
}

}  // namespace tomograph
