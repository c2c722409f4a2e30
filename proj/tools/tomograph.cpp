// Batch front-end for traffic matrix estimation experiments: synthetic
// dataset generation, archive conversion, method runs, spectrum reports
// and offline metric evaluation. All outputs are plain CSV.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "tomograph/baselines.hpp"
#include "tomograph/csv.hpp"
#include "tomograph/estimator.hpp"
#include "tomograph/evaluate.hpp"
#include "tomograph/ingest.hpp"
#include "tomograph/numerics.hpp"

namespace fs = std::filesystem;
using namespace tomograph;

namespace {

struct DatasetOptions {
  std::string canonical_dir;
  std::string abilene_dir;
  std::string geant_dir;
  bool synth = false;
  int synth_nodes = 8;
  double synth_degree = 2.5;
  int synth_samples = 400;
  double synth_mean_scale = 100.0;
  double synth_period = 96.0;
  double synth_noise_cv = 0.2;
};

struct RunOptions {
  DatasetOptions dataset;
  std::string method = "csdme";
  int train_len = 0;
  int test_len = 0;
  int monitored_links = 0;  // s, csdme only
  int components = 0;       // k, pca/cur
  double sigma_factor = 0.4;
  std::string constraint_mode = "lower_bound";
  double tolerance = 1e-8;
  int max_iterations = 10000;
  bool renormalize = false;
  int reselect_every = 1;
  std::uint64_t seed = 1;
  int repeat = 1;
  int jobs = 1;
  std::string out = "out";
};

ConstraintMode parse_mode(const std::string& s) {
  if (s == "none") return ConstraintMode::none;
  if (s == "lower_bound") return ConstraintMode::lower_bound;
  if (s == "equality") return ConstraintMode::equality;
  throw CLI::ValidationError("constraint-mode", "expected none|lower_bound|equality");
}

void add_dataset_options(CLI::App* cmd, DatasetOptions& d, bool allow_synth) {
  auto* canonical = cmd->add_option("--dataset", d.canonical_dir,
                                    "Canonical CSV dataset directory (tm.csv, routing.csv, meta.csv)");
  auto* abilene = cmd->add_option("--abilene", d.abilene_dir, "Abilene flat-file directory");
  auto* geant = cmd->add_option("--geant", d.geant_dir, "GEANT-style XML directory");
  canonical->excludes(abilene)->excludes(geant);
  abilene->excludes(geant);
  if (allow_synth) {
    auto* synth = cmd->add_flag("--synth", d.synth, "Generate a synthetic dataset in-process");
    synth->excludes(canonical)->excludes(abilene)->excludes(geant);
    cmd->add_option("--nodes", d.synth_nodes, "Synthetic node count")->capture_default_str();
    cmd->add_option("--avg-out-degree", d.synth_degree, "Synthetic average out-degree")
        ->capture_default_str();
    cmd->add_option("--samples", d.synth_samples, "Synthetic sample count")->capture_default_str();
    cmd->add_option("--mean-scale", d.synth_mean_scale, "Synthetic mean traffic scale (kbps)")
        ->capture_default_str();
    cmd->add_option("--period", d.synth_period, "Synthetic diurnal period in samples (<=0 disables)")
        ->capture_default_str();
    cmd->add_option("--noise-cv", d.synth_noise_cv, "Synthetic lognormal noise CV")
        ->capture_default_str();
  }
}

DatasetBundle load_dataset(const DatasetOptions& d, std::uint64_t seed) {
  if (!d.canonical_dir.empty())
    return parse_canonical(fs::path(d.canonical_dir) / "tm.csv",
                           fs::path(d.canonical_dir) / "routing.csv",
                           fs::path(d.canonical_dir) / "meta.csv");
  if (!d.abilene_dir.empty()) return parse_abilene(d.abilene_dir);
  if (!d.geant_dir.empty()) return parse_geant_xml(d.geant_dir);
  if (d.synth) {
    auto [topo, a] = gen_topology(seed, d.synth_nodes, d.synth_degree);
    DatasetBundle b;
    b.topology = std::move(topo);
    b.A = std::move(a);
    b.X = gen_gravity_traffic(seed + 1, b.topology, d.synth_samples, d.synth_mean_scale,
                              d.synth_period, d.synth_noise_cv);
    b.provenance = "synth:seed=" + std::to_string(seed);
    return b;
  }
  throw CLI::ValidationError("dataset", "one of --dataset/--abilene/--geant/--synth is required");
}

// Flat `key = value` configuration support. CLI11's own config reader does
// not map plain top-level keys onto subcommand options, so the file is
// expanded into injected arguments right after the subcommand name.
// Explicit command-line flags win: keys already present are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + config_path);

  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  const auto given = [&](const std::string& flag) {
    for (const std::string& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };

  std::vector<std::string> injected;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(config_path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(config_path + ":" + std::to_string(line_no) + ": empty key");
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value == "true" || value == "false") {
      if (value == "true") injected.push_back(flag);
    } else {
      injected.push_back(flag + "=" + value);
    }
  }

  // Subcommand name is the first non-flag token; config values follow it.
  size_t insert_at = args.size();
  for (size_t i = 0; i < args.size(); ++i)
    if (!args[i].empty() && args[i][0] != '-') {
      insert_at = i + 1;
      break;
    }
  args.insert(args.begin() + insert_at, injected.begin(), injected.end());
  return args;
}

fs::path resolve_out(const std::string& flag_value) {
  if (const char* env = std::getenv("TOMOGRAPH_OUT"); env && *env) return env;
  return flag_value;
}

void write_resolved_config(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(dir / "resolved_config.txt", std::ios::binary);
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
}

void apply_dataset_defaults(RunOptions& r, const DatasetBundle& bundle) {
  const long T = bundle.X.values.rows();
  const int n = bundle.topology.node_count;
  const int m = bundle.A.link_count();
  const bool abilene = !r.dataset.abilene_dir.empty();
  const bool geant = !r.dataset.geant_dir.empty();
  if (r.train_len <= 0) r.train_len = geant ? 1500 : 500;
  if (r.train_len >= T) r.train_len = static_cast<int>(T) / 2;
  if (r.test_len <= 0) r.test_len = static_cast<int>(T) - r.train_len;
  if (r.monitored_links <= 0) r.monitored_links = abilene ? 35 : (geant ? 65 : m);
  r.monitored_links = std::min(r.monitored_links, m);
  if (r.components <= 0) r.components = n;
}

struct SingleRunResult {
  int flagged_steps = 0;
  int total_steps = 0;
  double mean_sre = 0.0;
  double mean_tre = 0.0;
};

SingleRunResult run_once(const RunOptions& r, std::uint64_t seed, const fs::path& out_dir) {
  DatasetBundle bundle = load_dataset(r.dataset, seed);
  RunOptions resolved = r;
  apply_dataset_defaults(resolved, bundle);

  auto [train, test] = split(bundle, SplitSpec{resolved.train_len, resolved.test_len});
  const LinkSeries y_test = link_counts(test.A, test.X);

  std::vector<StepResult> trace;
  if (resolved.method == "csdme") {
    EstimatorConfig cfg;
    cfg.monitored_links = resolved.monitored_links;
    cfg.constraint_mode = parse_mode(resolved.constraint_mode);
    cfg.solver_tolerance = resolved.tolerance;
    cfg.solver_max_iterations = resolved.max_iterations;
    cfg.renormalize_psi = resolved.renormalize;
    cfg.reselect_every = resolved.reselect_every;
    EstimatorState state = init_state(train, cfg);
    trace = run(state, test, resolved.test_len);
  } else {
    const LinkSeries y_train = link_counts(train.A, train.X);
    Matrix link_cov = Matrix::Zero(train.A.link_count(), train.A.link_count());
    if (y_train.values.rows() >= 2) {
      const Eigen::RowVectorXd mean = y_train.values.colwise().mean();
      const Matrix centered = y_train.values.rowwise() - mean;
      link_cov = centered.transpose() * centered / double(y_train.values.rows() - 1);
    }
    StaticBasis basis;
    if (resolved.method == "pca")
      basis = train_pca_basis(train.X, train.A, resolved.components);
    else if (resolved.method == "cur")
      basis = train_cur_basis(train.X, train.A, resolved.components);
    else if (resolved.method == "pme")
      basis = train_pme_basis(train.X, train.A, resolved.sigma_factor, seed + 2);
    else
      throw CLI::ValidationError("method", "expected csdme|pca|cur|pme");
    BaselineOptions opts;
    opts.pme_constraint_mode = parse_mode(resolved.constraint_mode);
    opts.solver_tolerance = resolved.tolerance;
    opts.solver_max_iterations = resolved.max_iterations;
    trace = run_baseline(basis, train.A, y_test, link_cov, opts);
  }

  fs::create_directories(out_dir);
  write_trace(out_dir, trace, test.X.start_index);

  Matrix x_hat(static_cast<long>(trace.size()), test.X.values.cols());
  for (size_t t = 0; t < trace.size(); ++t) x_hat.row(static_cast<long>(t)) = trace[t].x_hat.transpose();
  const Matrix x_true = test.X.values.topRows(x_hat.rows());
  const MetricReport report = evaluate(x_hat, x_true);
  write_metrics(out_dir, report);
  write_mean_variance(out_dir, mean_variance_table(test.X));

  SingleRunResult res;
  res.total_steps = static_cast<int>(trace.size());
  for (const StepResult& s : trace)
    if (!s.converged || !s.feasible) ++res.flagged_steps;
  double sre_sum = 0.0;
  long sre_cnt = 0;
  for (long i = 0; i < report.sre.size(); ++i)
    if (std::isfinite(report.sre(i))) {
      sre_sum += report.sre(i);
      ++sre_cnt;
    }
  res.mean_sre = sre_cnt ? sre_sum / sre_cnt : 0.0;
  double tre_sum = 0.0;
  long tre_cnt = 0;
  for (long t = 0; t < report.tre.size(); ++t)
    if (std::isfinite(report.tre(t))) {
      tre_sum += report.tre(t);
      ++tre_cnt;
    }
  res.mean_tre = tre_cnt ? tre_sum / tre_cnt : 0.0;

  std::vector<std::pair<std::string, std::string>> kv{
      {"method", resolved.method},
      {"provenance", bundle.provenance},
      {"seed", std::to_string(seed)},
      {"train_len", std::to_string(resolved.train_len)},
      {"test_len", std::to_string(resolved.test_len)},
      {"s", std::to_string(resolved.monitored_links)},
      {"k", std::to_string(resolved.components)},
      {"sigma_factor", format_value(resolved.sigma_factor)},
      {"constraint_mode", resolved.constraint_mode},
      {"tolerance", format_value(resolved.tolerance)},
      {"max_iterations", std::to_string(resolved.max_iterations)},
      {"renormalize", resolved.renormalize ? "true" : "false"},
      {"reselect_every", std::to_string(resolved.reselect_every)},
  };
  write_resolved_config(out_dir, kv);

  std::ofstream rep(out_dir / "run_report.csv", std::ios::binary);
  rep << "method,seed,steps,flagged_steps,mean_sre,mean_tre\n";
  rep << resolved.method << ',' << seed << ',' << res.total_steps << ',' << res.flagged_steps
      << ',' << format_value(res.mean_sre) << ',' << format_value(res.mean_tre) << "\n";
  return res;
}

int cmd_synth(const DatasetOptions& d, std::uint64_t seed, const std::string& out_flag) {
  const fs::path out = resolve_out(out_flag);
  auto [topo, a] = gen_topology(seed, d.synth_nodes, d.synth_degree);
  DatasetBundle b;
  b.topology = std::move(topo);
  b.A = std::move(a);
  b.X = gen_gravity_traffic(seed + 1, b.topology, d.synth_samples, d.synth_mean_scale,
                            d.synth_period, d.synth_noise_cv);
  b.provenance = "synth:seed=" + std::to_string(seed);
  write_canonical(out, b);
  std::cout << "n=" << b.topology.node_count << " m=" << b.A.link_count()
            << " T=" << b.X.values.rows() << " rank(A)=" << numerical_rank(b.A.entries) << "\n";
  return 0;
}

int cmd_run(RunOptions& r) {
  const fs::path out = resolve_out(r.out);
  if (r.repeat < 1) throw CLI::ValidationError("repeat", "must be >= 1");
  if (r.repeat > 1 && !r.dataset.synth)
    throw CLI::ValidationError("repeat", "repetitions require --synth (independent seeds)");

  std::vector<SingleRunResult> results(r.repeat);
  if (r.repeat == 1) {
    results[0] = run_once(r, r.seed, out);
  } else {
    std::mutex err_mutex;
    std::vector<std::string> errors;
    std::atomic<int> next{0};
    const int jobs = std::max(1, r.jobs);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < r.repeat; i = next++) {
          try {
            const std::uint64_t seed = r.seed + static_cast<std::uint64_t>(i);
            results[i] = run_once(r, seed, out / ("rep_" + std::to_string(seed)));
          } catch (const std::exception& e) {
            std::scoped_lock lock(err_mutex);
            errors.push_back(e.what());
          }
        }
      });
    for (auto& t : pool) t.join();
    if (!errors.empty()) {
      for (const auto& e : errors) std::cerr << "error: " << e << "\n";
      return 1;
    }
  }

  long flagged = 0, total = 0;
  for (const auto& res : results) {
    flagged += res.flagged_steps;
    total += res.total_steps;
  }
  std::cout << "steps=" << total << " flagged=" << flagged << " mean_sre="
            << format_value(results[0].mean_sre) << "\n";
  if (total > 0 && flagged * 10 > total) return 2;
  return 0;
}

int cmd_spectrum(const DatasetOptions& d, std::uint64_t seed, int train_len,
                 const std::string& out_flag) {
  const fs::path out = resolve_out(out_flag);
  const DatasetBundle bundle = load_dataset(d, seed);
  const long T = bundle.X.values.rows();
  const long window = train_len > 0 && train_len <= T ? train_len : T;
  const Vector mean_x = bundle.X.values.topRows(window).colwise().mean().transpose();
  const DemandTransform psi = build_psi(mean_x, bundle.topology.node_count);
  const CompressedMeasurement phi = build_phi(bundle.A, psi);
  const SpectrumReport rep = spectrum_report(bundle.A, phi);
  fs::create_directories(out);
  write_spectrum(out, rep);
  std::cout << "A: " << bundle.A.entries.rows() << "x" << bundle.A.entries.cols()
            << " rank=" << rep.rank_a << "; Phi: " << phi.entries.rows() << "x"
            << phi.entries.cols() << " rank=" << rep.rank_phi << "\n";
  return 0;
}

int cmd_convert(const std::string& format, const std::string& in, const std::string& out_flag) {
  const fs::path out = resolve_out(out_flag);
  DatasetBundle b;
  if (format == "abilene")
    b = parse_abilene(in);
  else if (format == "geant")
    b = parse_geant_xml(in);
  else
    throw CLI::ValidationError("format", "expected abilene|geant");
  write_canonical(out, b);
  std::cout << "n=" << b.topology.node_count << " m=" << b.A.link_count()
            << " T=" << b.X.values.rows() << "\n";
  return 0;
}

int cmd_eval(const std::string& estimates_path, const std::string& actual_path, int offset,
             const std::string& out_flag) {
  const fs::path out = resolve_out(out_flag);
  const CsvTable est = read_csv(estimates_path, true);
  const CsvTable act = read_csv(actual_path, true);
  if (est.values.cols() != act.values.cols())
    throw std::runtime_error("eval: estimate and actual column counts differ");
  const long T = est.values.rows();
  if (offset < 0 || offset + T > act.values.rows())
    throw std::runtime_error("eval: offset window exceeds the actual series");
  const Matrix x_hat = est.values.rightCols(est.values.cols() - 1);
  const Matrix x_true = act.values.block(offset, 1, T, act.values.cols() - 1);
  const MetricReport report = evaluate(x_hat, x_true);
  fs::create_directories(out);
  write_metrics(out, report);
  std::cout << "flows=" << report.sre.size() << " steps=" << report.tre.size()
            << " sre_excluded=" << report.sre_excluded << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic matrix estimation from partial link loads"};
  app.require_subcommand(1);

  DatasetOptions synth_opts;
  synth_opts.synth = true;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "out";
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset as canonical CSV");
  synth->set_config("--config", "", "Flat key = value configuration file");
  synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();
  synth->add_option("--nodes", synth_opts.synth_nodes, "Node count")->capture_default_str();
  synth->add_option("--avg-out-degree", synth_opts.synth_degree, "Average out-degree")
      ->capture_default_str();
  synth->add_option("--samples", synth_opts.synth_samples, "Sample count")->capture_default_str();
  synth->add_option("--mean-scale", synth_opts.synth_mean_scale, "Mean traffic scale (kbps)")
      ->capture_default_str();
  synth->add_option("--period", synth_opts.synth_period, "Diurnal period in samples")
      ->capture_default_str();
  synth->add_option("--noise-cv", synth_opts.synth_noise_cv, "Lognormal noise CV")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

  std::string convert_format, convert_in, convert_out = "out";
  auto* convert = app.add_subcommand("convert", "Convert an external archive to canonical CSV");
  convert->add_option("--format", convert_format, "abilene|geant")->required();
  convert->add_option("--in", convert_in, "Input directory")->required();
  convert->add_option("--out", convert_out, "Output directory")->capture_default_str();

  RunOptions run_opts;
  auto* runcmd = app.add_subcommand("run", "Train and run one estimation method end to end");
  runcmd->set_config("--config", "", "Flat key = value configuration file");
  add_dataset_options(runcmd, run_opts.dataset, true);
  runcmd->add_option("--method", run_opts.method, "csdme|pca|cur|pme")->capture_default_str();
  runcmd->add_option("--train-len", run_opts.train_len, "Training prefix length");
  runcmd->add_option("--test-len", run_opts.test_len, "Test window length");
  runcmd->add_option("--s", run_opts.monitored_links, "Monitored link budget (csdme)");
  runcmd->add_option("--k", run_opts.components, "Component count (pca/cur)");
  runcmd->add_option("--sigma-factor", run_opts.sigma_factor, "PME noise factor")
      ->capture_default_str();
  runcmd->add_option("--constraint-mode", run_opts.constraint_mode, "none|lower_bound|equality")
      ->capture_default_str();
  runcmd->add_option("--tolerance", run_opts.tolerance, "Solver tolerance")->capture_default_str();
  runcmd->add_option("--max-iterations", run_opts.max_iterations, "Solver iteration cap")
      ->capture_default_str();
  runcmd->add_flag("--renormalize", run_opts.renormalize, "Renormalize predicted Psi columns");
  runcmd->add_option("--reselect-every", run_opts.reselect_every, "Link reselection cadence")
      ->capture_default_str();
  runcmd->add_option("--seed", run_opts.seed, "RNG seed")->capture_default_str();
  runcmd->add_option("--repeat", run_opts.repeat, "Independent seeded repetitions (--synth only)")
      ->capture_default_str();
  runcmd->add_option("--jobs", run_opts.jobs, "Worker threads for repetitions")
      ->capture_default_str();
  runcmd->add_option("--out", run_opts.out, "Output directory")->capture_default_str();

  DatasetOptions spectrum_opts;
  std::uint64_t spectrum_seed = 1;
  int spectrum_train_len = 0;
  std::string spectrum_out = "out";
  auto* spectrum = app.add_subcommand("spectrum", "Eigen-spectrum and Phi-surface report");
  spectrum->set_config("--config", "", "Flat key = value configuration file");
  add_dataset_options(spectrum, spectrum_opts, true);
  spectrum->add_option("--seed", spectrum_seed, "RNG seed (synthetic datasets)")
      ->capture_default_str();
  spectrum->add_option("--train-len", spectrum_train_len, "Mean window (0 = whole series)");
  spectrum->add_option("--out", spectrum_out, "Output directory")->capture_default_str();

  std::string eval_estimates, eval_actual, eval_out = "out";
  int eval_offset = 0;
  auto* evalcmd = app.add_subcommand("eval", "Metrics for an existing estimates.csv");
  evalcmd->add_option("--estimates", eval_estimates, "estimates.csv path")->required();
  evalcmd->add_option("--actual", eval_actual, "ground-truth tm.csv path")->required();
  evalcmd->add_option("--offset", eval_offset, "Row offset into the actual series")
      ->capture_default_str();
  evalcmd->add_option("--out", eval_out, "Output directory")->capture_default_str();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes back to front
    app.parse(std::move(args));
    if (synth->parsed()) return cmd_synth(synth_opts, synth_seed, synth_out);
    if (convert->parsed()) return cmd_convert(convert_format, convert_in, convert_out);
    if (runcmd->parsed()) return cmd_run(run_opts);
    if (spectrum->parsed()) return cmd_spectrum(spectrum_opts, spectrum_seed, spectrum_train_len, spectrum_out);
    if (evalcmd->parsed()) return cmd_eval(eval_estimates, eval_actual, eval_offset, eval_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
