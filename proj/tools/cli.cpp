// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "mrcosts/archive.hpp"
#include "mrcosts/config.hpp"
#include "mrcosts/error.hpp"
#include "mrcosts/keyvalue.hpp"
#include "mrcosts/matrix_io.hpp"
#include "mrcosts/model.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace mrcosts::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string extension(MatrixFormat f)
{
  return f == MatrixFormat::csv ? ".csv" : ".f64bin";
}

// Options shared by several subcommands; empty/nullopt means "not given".
struct Flags {
  std::string config;
  std::string input;
  std::string format;
  std::string out;
  std::string model;
  std::string bands = "all";
  std::string truth;
  std::string rows;
  std::string means;
  std::optional<int> edge_trim;
  std::optional<std::int64_t> seed;
  std::optional<int> k_min;
  std::optional<int> k_max;
  int threads = 0;
};

RunConfig load_config(const Flags& f, bool require_levels)
{
  if (f.config.empty())
    throw ConfigError("--config is required");
  RunConfig cfg = load_run_config(f.config, require_levels);
  if (!f.input.empty())
    cfg.input = f.input;
  if (!f.format.empty())
    cfg.format = parse_matrix_format(f.format);
  if (!f.out.empty())
    cfg.output = f.out;
  if (f.seed) {
    if (*f.seed < 0)
      throw ConfigError("--seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*f.seed);
    if (cfg.synth)
      cfg.synth->seed = cfg.seed;
  }
  if (f.edge_trim)
    cfg.edge_trim = f.edge_trim;
  if (f.k_min)
    cfg.global.k_min = *f.k_min;
  if (f.k_max)
    cfg.global.k_max = *f.k_max;
  if (cfg.global.k_min < 2 || cfg.global.k_max < cfg.global.k_min)
    throw ConfigError("k range needs 2 <= k_min <= k_max (got [" +
                      std::to_string(cfg.global.k_min) + ", " +
                      std::to_string(cfg.global.k_max) + "])");
  cfg.global.seed = cfg.seed;
  return cfg;
}

MrCostsModel load_archive(const std::string& dir)
{
  if (dir.empty())
    throw ConfigError("--model is required");
  try {
    return load_model(dir);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const VersionMismatch& e) {
    throw ConfigError(e.what());
  } catch (const CorruptArchive& e) {
    throw ConfigError(e.what());
  }
}

SnapshotMatrix load_input(const RunConfig& cfg)
{
  if (cfg.input.empty())
    throw ConfigError("no input file (--input or input = ... in the config)");
  return load_matrix(cfg.input, cfg.format.value_or(guess_matrix_format(cfg.input)));
}

MrCostsModel fit_model(const RunConfig& cfg, int threads)
{
  const SnapshotMatrix data = load_input(cfg);
  LevelFitOptions opts;
  opts.threads = threads;
  return fit(data, cfg.levels, cfg.seed, opts);
}

void print_band_table(const MrCostsModel& model, std::ostream& out)
{
  const auto& g = *model.global;
  out << "band\tcentroid_freq\tcentroid_period\tn_modes\tsilhouette\n";
  for (int p = 0; p < g.n_bands(); ++p) {
    const double omega = g.centroids[static_cast<std::size_t>(p)];
    const double freq = omega / (2.0 * std::numbers::pi);
    const double period = freq > 0.0 ? 1.0 / freq : std::numeric_limits<double>::infinity();
    out << p << '\t' << num(freq) << '\t' << num(period) << '\t' << model.mode_count(p) << '\t'
        << num(g.band_silhouette[static_cast<std::size_t>(p)]) << '\n';
  }
}

int cmd_synth(const Flags& f, std::ostream& /*out*/, std::ostream& err)
{
  const RunConfig cfg = load_config(f, false);
  if (!cfg.synth)
    throw ConfigError("config has no [synth] section");
  if (cfg.output.empty())
    throw ConfigError("no output directory (--out or output = ... in the config)");
  const MatrixFormat fmt = cfg.format.value_or(MatrixFormat::f64bin);
  const SynthResult res = generate(*cfg.synth);

  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec)
    throw IoError("cannot create " + cfg.output.string() + ": " + ec.message());
  save_matrix(res.data, cfg.output / ("data" + extension(fmt)), fmt);
  save_matrix(res.clean, cfg.output / ("clean" + extension(fmt)), fmt);
  for (std::size_t i = 0; i < res.truth.size(); ++i)
    save_matrix(SnapshotMatrix(res.truth[i], res.data.times()),
                cfg.output / ("truth" + std::to_string(i) + extension(fmt)), fmt);
  err << "wrote " << res.truth.size() + 2 << " matrices to " << cfg.output.string() << '\n';
  return kExitOk;
}

int cmd_fit(const Flags& f, std::ostream& out, std::ostream& err)
{
  const RunConfig cfg = load_config(f, true);
  if (cfg.output.empty())
    throw ConfigError("no output directory (--out or output = ... in the config)");
  MrCostsModel model = fit_model(cfg, f.threads);
  global_separation(model, cfg.global);
  save_model(model, cfg.output, cfg.text);

  out << "level\twindow_length\tslide\trank\tn_windows\tfailed\tmedian_residual\tn_local_bands"
         "\tsilhouette\n";
  for (const auto& lvl : model.levels)
    out << lvl.level << '\t' << lvl.config.window_length << '\t' << lvl.config.slide << '\t'
        << lvl.config.rank << '\t' << lvl.fits.size() << '\t' << lvl.failed_count() << '\t'
        << num(lvl.median_residual()) << '\t' << lvl.n_bands() << '\t' << num(lvl.silhouette)
        << '\n';
  out << '\n';
  print_band_table(model, out);
  if (model.global->low_confidence)
    err << "warning: global band silhouette " << num(model.global->silhouette)
        << " is below " << kLowConfidenceSilhouette << " (low confidence)\n";
  err << "wrote model to " << cfg.output.string() << '\n';
  return kExitOk;
}

std::string target_name(const std::vector<int>& bands)
{
  std::string s = "band";
  for (std::size_t i = 0; i < bands.size(); ++i)
    s += (i ? "+" : "") + std::to_string(bands[i]);
  return s;
}

int cmd_reconstruct(const Flags& f, std::ostream& out, std::ostream& err)
{
  const MrCostsModel model = load_archive(f.model);
  if (f.out.empty())
    throw ConfigError("--out is required");
  const MatrixFormat fmt = f.format.empty() ? MatrixFormat::f64bin : parse_matrix_format(f.format);

  auto selection = parse_band_selection(f.bands);
  if (selection.empty())
    for (int p = 0; p < model.global->n_bands(); ++p)
      selection.push_back({p});
  for (const auto& item : selection)
    for (int p : item)
      if (p >= model.global->n_bands())
        throw BandOutOfRange("band " + std::to_string(p) + " (model has " +
                             std::to_string(model.global->n_bands()) + ")");

  const auto n_space = static_cast<int>(model.n_space);
  std::vector<int> rows;
  if (!f.rows.empty())
    rows = parse_row_mask(f.rows, n_space);
  auto restrict_rows = [&](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    if (rows.empty())
      return m;
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      sub.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return sub;
  };

  std::error_code ec;
  fs::create_directories(f.out, ec);
  if (ec)
    throw IoError("cannot create " + f.out + ": " + ec.message());
  const fs::path dir(f.out);

  std::vector<std::pair<std::string, Eigen::MatrixXd>> outputs;
  for (const auto& item : selection)
    outputs.emplace_back(target_name(item), restrict_rows(aggregate_bands(model, item)));
  const Eigen::MatrixXd full = reconstruct_full(model);
  outputs.emplace_back("full", restrict_rows(full));
  for (const auto& [name, m] : outputs)
    save_matrix(SnapshotMatrix(m, model.times), dir / (name + extension(fmt)), fmt);

  if (!f.means.empty()) {
    std::ostringstream csv;
    csv << "time,band,value\n";
    for (const auto& [name, m] : outputs) {
      const Eigen::VectorXd mean = m.colwise().mean();
      for (Eigen::Index j = 0; j < mean.size(); ++j)
        csv << num(model.times[j]) << ',' << name << ',' << format_double(mean[j]) << '\n';
    }
    write_file_atomic(f.means, csv.str());
  }

  if (!f.truth.empty()) {
    const SnapshotMatrix truth = load_matrix(f.truth, guess_matrix_format(f.truth));
    if (truth.n_space() != model.n_space || truth.n_time() != model.times.size())
      throw ShapeMismatch("truth is " + std::to_string(truth.n_space()) + "x" +
                          std::to_string(truth.n_time()) + ", model is " +
                          std::to_string(model.n_space) + "x" +
                          std::to_string(model.times.size()));
    const int trim = f.edge_trim.value_or(default_edge_trim(model));
    out << "target\tedge_trim\terror_full_pct\terror_interior_pct\n";
    out << "full\t" << trim << '\t' << num(relative_error(full, truth.values(), 0)) << '\t'
        << num(relative_error(full, truth.values(), trim)) << '\n';
  }
  err << "wrote " << outputs.size() << " matrices to " << f.out << '\n';
  return kExitOk;
}

int cmd_bands(const Flags& f, std::ostream& out, std::ostream& /*err*/)
{
  const MrCostsModel model = load_archive(f.model);
  if (!model.global)
    throw ConfigError("archive has no global bands");
  print_band_table(model, out);
  return kExitOk;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err)
{
  RunConfig cfg = load_config(f, true);
  cfg.global.n_bands.reset();
  MrCostsModel model = fit_model(cfg, f.threads);
  global_separation(model, cfg.global);
  const auto& g = *model.global;
  const int selected = g.n_bands() - 1;
  out << "k\tsilhouette\tselected\n";
  if (g.sweep.empty()) {
    // fewer distinguishable frequencies than k_min: nothing was swept
    out << selected << '\t' << num(g.silhouette) << "\t1\n";
    err << "note: only " << selected << " distinguishable frequencies; K below k_min\n";
    return kExitOk;
  }
  for (const auto& [k, s] : g.sweep)
    out << k << '\t' << num(s) << '\t' << (k == selected ? 1 : 0) << '\n';
  if (g.sweep.size() < static_cast<std::size_t>(cfg.global.k_max - cfg.global.k_min + 1))
    err << "note: K capped at " << g.sweep.back().first
        << " (number of distinguishable frequencies)\n";
  return kExitOk;
}

}  // namespace

std::vector<std::vector<int>> parse_band_selection(const std::string& text)
{
  if (text == "all" || text.empty())
    return {};
  if (text.back() == ',' || text.back() == '+')
    throw ConfigError("bad band selection '" + text + "' (dangling separator)");
  std::vector<std::vector<int>> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    std::vector<int> bands;
    std::stringstream parts(item);
    std::string part;
    while (std::getline(parts, part, '+')) {
      std::size_t used = 0;
      int p = -1;
      try {
        p = std::stoi(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != part.size() || p < 0)
        throw ConfigError("bad band selection '" + text + "' (expected e.g. all or 0,1,2+3)");
      bands.push_back(p);
    }
    if (bands.empty())
      throw ConfigError("bad band selection '" + text + "'");
    out.push_back(std::move(bands));
  }
  return out;
}

std::vector<int> parse_row_mask(const std::string& text, int n_rows)
{
  std::set<int> rows;
  std::stringstream items(text);
  std::string item;
  auto parse_index = [&](const std::string& s) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 0 || v >= n_rows)
      throw ConfigError("bad row mask '" + text + "' (rows are 0.." +
                        std::to_string(n_rows - 1) + ")");
    return v;
  };
  while (std::getline(items, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      rows.insert(parse_index(item));
      continue;
    }
    const int a = parse_index(item.substr(0, dash));
    const int b = parse_index(item.substr(dash + 1));
    if (b < a)
      throw ConfigError("bad row range '" + item + "'");
    for (int i = a; i <= b; ++i)
      rows.insert(i);
  }
  if (rows.empty())
    throw ConfigError("empty row mask");
  return {rows.begin(), rows.end()};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Multi-resolution coherent spatio-temporal scale separation", "mrcosts"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic data set from a config");
  auto* fitc = app.add_subcommand("fit", "Fit all levels, separate global bands, save a model");
  auto* recon = app.add_subcommand("reconstruct", "Write band reconstructions from a model");
  auto* bands = app.add_subcommand("bands", "Print the global band table of a model");
  auto* sweep = app.add_subcommand("sweep", "Silhouette score against global band count");

  for (auto* sc : {synth, fitc, sweep}) {
    sc->add_option("--config", f.config, "Run configuration file")->required();
    sc->add_option("--seed", f.seed, "Override the seed");
    sc->add_option("--format", f.format, "Matrix format: csv or f64bin");
  }
  for (auto* sc : {synth, fitc})
    sc->add_option("--out", f.out, "Output directory");
  for (auto* sc : {fitc, sweep}) {
    sc->add_option("--input", f.input, "Input matrix (overrides the config)");
    sc->add_option("--k-min", f.k_min, "Smallest global band count to try");
    sc->add_option("--k-max", f.k_max, "Largest global band count to try");
    sc->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  }
  for (auto* sc : {recon, bands})
    sc->add_option("--model", f.model, "Model archive directory")->required();
  recon->add_option("--out", f.out, "Output directory")->required();
  recon->add_option("--bands", f.bands, "all, or e.g. 0,1,2+3 ('+' sums bands)");
  recon->add_option("--truth", f.truth, "Reference matrix for error reporting");
  recon->add_option("--edge-trim", f.edge_trim, "Snapshots dropped at each end (default w/2)");
  recon->add_option("--format", f.format, "Output format: csv or f64bin");
  recon->add_option("--rows", f.rows, "Export only these rows, e.g. 0-7,12");
  recon->add_option("--means", f.means, "Write spatial means as long-format CSV here");

  std::vector<const char*> argv{"mrcosts"};
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (synth->parsed())
      return cmd_synth(f, out, err);
    if (fitc->parsed())
      return cmd_fit(f, out, err);
    if (recon->parsed())
      return cmd_reconstruct(f, out, err);
    if (bands->parsed())
      return cmd_bands(f, out, err);
    return cmd_sweep(f, out, err);
  } catch (const AllWindowsFailed& e) {
    err << "error: " << e.what() << '\n';
    return kExitAllWindowsFailed;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BandOutOfRange& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonIncreasingWindows& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const WindowTooLong& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace mrcosts::cli
