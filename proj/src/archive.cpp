// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/archive.hpp"

#include "mrcosts/error.hpp"
#include "mrcosts/keyvalue.hpp"
#include "mrcosts/matrix_io.hpp"

#include <cmath>
#include <system_error>

namespace mrcosts {

namespace fs = std::filesystem;

namespace {

std::string level_section(int l)
{
  return "level." + std::to_string(l);
}

fs::path level_dir(const fs::path& dir, int l)
{
  return dir / ("level" + std::to_string(l));
}

fs::path window_blob(const fs::path& dir, int l, std::size_t k)
{
  return level_dir(dir, l) / ("win" + std::to_string(k) + ".f64bin");
}

void push_complex(std::vector<double>& out, const std::complex<double>& z)
{
  out.push_back(z.real());
  out.push_back(z.imag());
}

// Reads doubles from a blob with bounds checking.
class Cursor {
public:
  Cursor(std::vector<double> data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  double next()
  {
    if (pos_ >= data_.size())
      throw CorruptArchive(name_ + " is shorter than the manifest implies");
    return data_[pos_++];
  }
  std::complex<double> next_complex()
  {
    const double re = next();
    return {re, next()};
  }
  int next_int()
  {
    const double v = next();
    if (v != std::floor(v) || std::abs(v) > 2e9)
      throw CorruptArchive(name_ + " holds a non-integer where an index was expected");
    return static_cast<int>(v);
  }
  void finish() const
  {
    if (pos_ != data_.size())
      throw CorruptArchive(name_ + " has " + std::to_string(data_.size() - pos_) +
                           " trailing values");
  }

private:
  std::vector<double> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

Cursor open_blob(const fs::path& path)
{
  if (!fs::exists(path))
    throw CorruptArchive("missing " + path.string());
  return Cursor(read_f64_blob(path), path.string());
}

void write_level(const LevelDecomposition& lvl, const fs::path& dir, KeyValueDoc& doc)
{
  const std::string sec = level_section(lvl.level);
  const auto& c = lvl.config;
  doc.set_int(sec, "window_length", c.window_length);
  doc.set_int(sec, "slide", c.slide);
  doc.set_int(sec, "rank", c.rank);
  doc.set_double(sec, "rho", c.rho);
  if (c.n_local_bands == kSweepLocalBands)
    doc.set_string(sec, "n_local_bands", "auto");
  else
    doc.set_int(sec, "n_local_bands", c.n_local_bands);
  doc.set_string(sec, "transform", std::string(to_string(c.transform)));
  doc.set_int(sec, "k_min", c.k_min);
  doc.set_int(sec, "k_max", c.k_max);
  doc.set_int(sec, "n_windows", static_cast<std::int64_t>(lvl.fits.size()));
  doc.set_int(sec, "n_bands", lvl.n_bands());
  doc.set_doubles(sec, "centroids", lvl.centroids);
  doc.set_doubles(sec, "band_silhouette", lvl.band_silhouette);
  doc.set_double(sec, "silhouette", lvl.silhouette);
  doc.set_bool(sec, "low_confidence", lvl.low_confidence);
  doc.set_double(sec, "reference_scale", lvl.reference_scale);
  std::vector<std::int64_t> failed;
  for (std::size_t k = 0; k < lvl.fits.size(); ++k)
    if (lvl.fits[k].failed)
      failed.push_back(static_cast<std::int64_t>(k));
  doc.set_ints(sec, "failed", failed);
  for (auto k : failed)
    doc.set_string(sec, "failure_" + std::to_string(k),
                   lvl.fits[static_cast<std::size_t>(k)].failure);

  const fs::path ldir = level_dir(dir, lvl.level);
  fs::create_directories(ldir);
  std::vector<double> table;
  std::vector<double> labels;
  for (std::size_t k = 0; k < lvl.fits.size(); ++k) {
    const auto& f = lvl.fits[k];
    std::vector<double> blob;
    for (Eigen::Index j = 0; j < f.omega.size(); ++j)
      push_complex(blob, f.omega[j]);
    for (Eigen::Index j = 0; j < f.amplitudes.size(); ++j)
      push_complex(blob, f.amplitudes[j]);
    blob.insert(blob.end(), f.background.data(), f.background.data() + f.background.size());
    for (Eigen::Index j = 0; j < f.phi.cols(); ++j)
      for (Eigen::Index i = 0; i < f.phi.rows(); ++i)
        push_complex(blob, f.phi(i, j));
    write_f64_blob(window_blob(dir, lvl.level, k), blob);

    table.insert(table.end(), {static_cast<double>(f.spec.start_index),
                               static_cast<double>(f.spec.length), f.residual_rel,
                               static_cast<double>(f.iterations), f.converged ? 1.0 : 0.0,
                               f.failed ? 1.0 : 0.0});
    for (int v : lvl.local_labels[k])
      labels.push_back(v);
  }
  write_f64_blob(ldir / "windows.f64bin", table);
  write_f64_blob(ldir / "local_bands.f64bin", labels);
}

LevelDecomposition read_level(const KeyValueDoc& doc, const fs::path& dir, int l,
                              Eigen::Index n_space)
{
  const std::string sec = level_section(l);
  if (!doc.has_section(sec))
    throw CorruptArchive("manifest lacks [" + sec + "]");
  LevelDecomposition lvl;
  lvl.level = l;
  auto& c = lvl.config;
  c.window_length = static_cast<int>(doc.get_int(sec, "window_length"));
  c.slide = static_cast<int>(doc.get_int(sec, "slide"));
  c.rank = static_cast<int>(doc.get_int(sec, "rank"));
  c.rho = doc.get_double(sec, "rho");
  c.n_local_bands = doc.section(sec).at("n_local_bands").front() == '"'
                        ? kSweepLocalBands
                        : static_cast<int>(doc.get_int(sec, "n_local_bands"));
  c.transform = parse_transform(doc.get_string(sec, "transform"));
  c.k_min = static_cast<int>(doc.get_int(sec, "k_min"));
  c.k_max = static_cast<int>(doc.get_int(sec, "k_max"));
  lvl.centroids = doc.get_doubles(sec, "centroids");
  lvl.band_silhouette = doc.get_doubles(sec, "band_silhouette");
  lvl.silhouette = doc.get_double(sec, "silhouette");
  lvl.low_confidence = doc.get_bool(sec, "low_confidence");
  lvl.reference_scale = doc.get_double(sec, "reference_scale");
  if (static_cast<int>(doc.get_int(sec, "n_bands")) != lvl.n_bands())
    throw CorruptArchive("[" + sec + "] n_bands disagrees with its centroid list");
  const auto n_windows = doc.get_int(sec, "n_windows");
  if (n_windows < 1 || c.rank < 2)
    throw CorruptArchive("[" + sec + "] has an impossible shape");

  const fs::path ldir = level_dir(dir, l);
  Cursor table = open_blob(ldir / "windows.f64bin");
  Cursor labels = open_blob(ldir / "local_bands.f64bin");
  lvl.fits.resize(static_cast<std::size_t>(n_windows));
  lvl.local_labels.resize(lvl.fits.size());
  for (std::size_t k = 0; k < lvl.fits.size(); ++k) {
    auto& f = lvl.fits[k];
    f.spec.start_index = table.next_int();
    f.spec.length = table.next_int();
    f.spec.level = l;
    f.spec.window_index = static_cast<int>(k);
    f.residual_rel = table.next();
    f.iterations = table.next_int();
    f.converged = table.next() != 0.0;
    f.failed = table.next() != 0.0;
    if (f.failed)
      f.failure = doc.get_string(sec, "failure_" + std::to_string(k));

    const Eigen::Index r = f.failed ? 0 : c.rank;
    Cursor blob = open_blob(window_blob(dir, l, k));
    f.omega.resize(r);
    f.amplitudes.resize(r);
    f.background.resize(n_space);
    f.phi.resize(f.failed ? 0 : n_space, r);
    for (Eigen::Index j = 0; j < r; ++j)
      f.omega[j] = blob.next_complex();
    for (Eigen::Index j = 0; j < r; ++j)
      f.amplitudes[j] = blob.next_complex();
    for (Eigen::Index i = 0; i < n_space; ++i)
      f.background[i] = blob.next();
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < n_space; ++i)
        f.phi(i, j) = blob.next_complex();
    blob.finish();

    auto& lab = lvl.local_labels[k];
    lab.resize(static_cast<std::size_t>(c.rank));
    for (auto& v : lab) {
      v = labels.next_int();
      if (v < -1 || v >= lvl.n_bands())
        throw CorruptArchive("local band label out of range in level " + std::to_string(l));
    }
  }
  table.finish();
  labels.finish();
  return lvl;
}

}  // namespace

void save_model(const MrCostsModel& model, const fs::path& dir, const std::string& run_config)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create " + dir.string() + ": " + ec.message());

  KeyValueDoc doc;
  doc.set_int("", "format_version", kArchiveFormatVersion);
  doc.set_int("", "n_levels", static_cast<std::int64_t>(model.levels.size()));
  doc.set_int("", "n_space", model.n_space);
  doc.set_int("", "n_time", model.times.size());
  doc.set("", "seed", std::to_string(model.seed));
  doc.set_bool("", "has_global", model.global.has_value());
  write_f64_blob(dir / "times.f64bin", std::span(model.times.data(), model.times.size()));

  for (const auto& lvl : model.levels)
    write_level(lvl, dir, doc);

  if (model.global) {
    const auto& g = *model.global;
    doc.set_int("global", "n_bands", g.n_bands());
    doc.set_double("global", "silhouette", g.silhouette);
    doc.set_bool("global", "low_confidence", g.low_confidence);
    std::vector<std::int64_t> ks;
    std::vector<double> scores;
    for (const auto& [k, s] : g.sweep) {
      ks.push_back(k);
      scores.push_back(s);
    }
    doc.set_ints("global", "sweep_k", ks);
    doc.set_doubles("global", "sweep_silhouette", scores);

    std::vector<double> blob;
    blob.push_back(g.n_bands());
    blob.insert(blob.end(), g.centroids.begin(), g.centroids.end());
    blob.insert(blob.end(), g.band_silhouette.begin(), g.band_silhouette.end());
    for (const auto& lvl : g.labels)
      for (const auto& win : lvl)
        blob.insert(blob.end(), win.begin(), win.end());
    write_f64_blob(dir / "global_bands.f64bin", blob);
  } else if (fs::exists(dir / "global_bands.f64bin")) {
    fs::remove(dir / "global_bands.f64bin");
  }

  if (!run_config.empty())
    write_file_atomic(dir / "run_config.toml", run_config);
  // Manifest last: a directory with a manifest is a complete archive.
  write_file_atomic(dir / "manifest.toml", doc.dump());
}

MrCostsModel load_model(const fs::path& dir)
{
  const fs::path manifest = dir / "manifest.toml";
  if (!fs::exists(manifest))
    throw IoError("no model archive at " + dir.string() + " (manifest.toml missing)");
  KeyValueDoc doc;
  try {
    doc = KeyValueDoc::load(manifest.string());
  } catch (const ParseError& e) {
    throw CorruptArchive(e.what());
  }

  try {
    const auto version = doc.get_int("", "format_version");
    if (version != kArchiveFormatVersion)
      throw VersionMismatch("archive format " + std::to_string(version) +
                            ", this reader understands " +
                            std::to_string(kArchiveFormatVersion));
    MrCostsModel model;
    const auto n_levels = doc.get_int("", "n_levels");
    model.n_space = static_cast<Eigen::Index>(doc.get_int("", "n_space"));
    const auto n_time = doc.get_int("", "n_time");
    model.seed = std::stoull(doc.section("").at("seed"));
    if (n_levels < 1 || model.n_space < 1 || n_time < 2)
      throw CorruptArchive("manifest declares an impossible shape");

    const auto times = read_f64_blob(dir / "times.f64bin");
    if (static_cast<std::int64_t>(times.size()) != n_time)
      throw CorruptArchive("times.f64bin holds " + std::to_string(times.size()) +
                           " values, manifest says " + std::to_string(n_time));
    model.times = Eigen::Map<const Eigen::VectorXd>(times.data(), n_time);

    for (int l = 0; l < n_levels; ++l)
      model.levels.push_back(read_level(doc, dir, l, model.n_space));

    if (doc.get_bool("", "has_global")) {
      GlobalBands g;
      g.silhouette = doc.get_double("global", "silhouette");
      g.low_confidence = doc.get_bool("global", "low_confidence");
      const auto ks = doc.get_ints("global", "sweep_k");
      const auto scores = doc.get_doubles("global", "sweep_silhouette");
      if (ks.size() != scores.size())
        throw CorruptArchive("global sweep lists differ in length");
      for (std::size_t i = 0; i < ks.size(); ++i)
        g.sweep.emplace_back(static_cast<int>(ks[i]), scores[i]);

      Cursor blob = open_blob(dir / "global_bands.f64bin");
      const int n_bands = blob.next_int();
      if (n_bands < 1 || n_bands != doc.get_int("global", "n_bands"))
        throw CorruptArchive("global band count disagrees with the manifest");
      for (int p = 0; p < n_bands; ++p)
        g.centroids.push_back(blob.next());
      for (int p = 0; p < n_bands; ++p)
        g.band_silhouette.push_back(blob.next());
      g.labels.resize(model.levels.size());
      for (std::size_t l = 0; l < model.levels.size(); ++l) {
        const auto& lvl = model.levels[l];
        g.labels[l].resize(lvl.fits.size());
        for (auto& win : g.labels[l]) {
          win.resize(static_cast<std::size_t>(lvl.config.rank));
          for (auto& v : win) {
            v = blob.next_int();
            if (v < -1 || v >= n_bands)
              throw CorruptArchive("global band label out of range");
          }
        }
      }
      blob.finish();
      model.global = std::move(g);
    }
    return model;
  } catch (const ParseError& e) {
    throw CorruptArchive(e.what());
  } catch (const std::out_of_range& e) {
    throw CorruptArchive(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptArchive(std::string("manifest: ") + e.what());
  }
}

}  // namespace mrcosts
