// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/model.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mrcosts {

namespace {

double window_center(const WindowSpec& w, const Eigen::VectorXd& times)
{
  return 0.5 * (times[w.start_index] + times[w.start_index + w.length - 1]);
}

void require_global(const MrCostsModel& model)
{
  if (!model.global)
    throw ConfigError("model has no global bands; run global_separation first");
}

}  // namespace

int MrCostsModel::mode_count(int p) const
{
  if (!global)
    return 0;
  int n = 0;
  for (const auto& lvl : global->labels)
    for (const auto& win : lvl)
      n += static_cast<int>(std::count(win.begin(), win.end(), p));
  return n;
}

MrCostsModel fit(const SnapshotMatrix& data, const std::vector<LevelConfig>& configs,
                 std::uint64_t seed, const LevelFitOptions& options)
{
  if (configs.empty())
    throw ConfigError("at least one level is required");
  for (std::size_t l = 1; l < configs.size(); ++l)
    if (configs[l].window_length <= configs[l - 1].window_length)
      throw NonIncreasingWindows("level " + std::to_string(l) + " window " +
                                 std::to_string(configs[l].window_length) +
                                 " does not exceed level " + std::to_string(l - 1) + " window " +
                                 std::to_string(configs[l - 1].window_length));
  for (const auto& c : configs)
    validate(c);

  MrCostsModel model;
  model.times = data.times();
  model.n_space = data.n_space();
  model.seed = seed;
  LevelFitOptions opts = options;
  if (!(opts.reference_scale > 0.0))
    opts.reference_scale = reference_scale(data);
  SnapshotMatrix input = data;
  for (std::size_t l = 0; l < configs.size(); ++l) {
    model.levels.push_back(
        fit_level(input, configs[l], seed + l, opts, static_cast<int>(l)));
    if (l + 1 < configs.size())
      input = lowpass_handoff(model.levels.back(), input);
  }
  return model;
}

OmegaFeatures interpolate_omega_global(const MrCostsModel& model)
{
  const auto& times = model.times;
  std::vector<double> base;
  for (const auto& f : model.levels.front().fits)
    base.push_back(window_center(f.spec, times));

  std::vector<std::complex<double>> pooled;
  std::vector<SourceIndex> sources;
  for (const auto& lvl : model.levels) {
    std::vector<int> alive;
    std::vector<double> centers;
    for (std::size_t k = 0; k < lvl.fits.size(); ++k)
      if (!lvl.fits[k].failed) {
        alive.push_back(static_cast<int>(k));
        centers.push_back(window_center(lvl.fits[k].spec, times));
      }
    if (alive.empty())
      continue;
    for (double tau : base) {
      // Nearest centre; on a tie the earlier window wins.
      const auto it = std::lower_bound(centers.begin(), centers.end(), tau);
      std::size_t pick = static_cast<std::size_t>(it - centers.begin());
      if (pick == centers.size() ||
          (pick > 0 && tau - centers[pick - 1] <= centers[pick] - tau))
        pick = pick == 0 ? 0 : pick - 1;
      const int k = alive[pick];
      const auto& fit = lvl.fits[static_cast<std::size_t>(k)];
      const auto& labels = lvl.local_labels[static_cast<std::size_t>(k)];
      for (Eigen::Index j = 0; j < fit.rank(); ++j)
        if (labels[static_cast<std::size_t>(j)] > 0) {
          pooled.push_back(fit.omega[j]);
          sources.push_back({lvl.level, k, static_cast<int>(j)});
        }
    }
  }
  const Eigen::VectorXcd omegas =
      Eigen::Map<Eigen::VectorXcd>(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
  return transform_omega(omegas, OmegaTransform::log10_abs_imag, sources);
}

void global_separation(MrCostsModel& model, const GlobalOptions& options)
{
  if (model.levels.empty())
    throw ConfigError("model has no levels");
  if (options.n_bands && *options.n_bands < 2)
    throw ConfigError("global n_bands must be >= 2 (silhouette needs two clusters)");

  const OmegaFeatures feats = interpolate_omega_global(model);
  const int groups = resolvable_count(feats.values);
  if (groups == 0)
    throw TooFewPoints("no oscillatory modes to separate into global bands");
  GlobalBands g;
  ClusterResult res;
  // Never more bands than distinguishable frequencies: k-means would split
  // one frequency at the rounding level.
  if (options.n_bands) {
    res = kmeans(feats.values, std::min(*options.n_bands, groups), options.seed, options.restarts);
  } else if (groups < options.k_min) {
    res = kmeans(feats.values, groups, options.seed, options.restarts);
    g.low_confidence = true;
  } else {
    SweepResult sw =
        sweep_clusters(feats.values, options.k_min, options.k_max, options.seed, options.restarts);
    g.sweep = sw.scores;
    g.low_confidence = sw.low_confidence;
    res = std::move(sw.best);
  }
  g.silhouette = res.silhouette;

  // Every replica of a source carries the same value, hence the same label.
  std::map<SourceIndex, int> assigned;
  for (std::size_t i = 0; i < feats.values.size(); ++i)
    assigned.emplace(feats.source[i], res.labels[i] + 1);
  for (const auto& s : feats.near_zero)
    assigned.emplace(s, 1);

  const auto deepest = static_cast<int>(model.levels.size()) - 1;
  g.labels.resize(model.levels.size());
  for (const auto& lvl : model.levels) {
    auto& out = g.labels[static_cast<std::size_t>(lvl.level)];
    out.resize(lvl.fits.size());
    for (std::size_t k = 0; k < lvl.fits.size(); ++k) {
      const auto& fit = lvl.fits[k];
      const auto& local = lvl.local_labels[k];
      out[k].assign(local.size(), -1);
      if (fit.failed)
        continue;
      for (std::size_t j = 0; j < local.size(); ++j) {
        if (local[j] == 0) {
          if (lvl.level == deepest)
            out[k][j] = 0;
          continue;
        }
        const SourceIndex src{lvl.level, static_cast<int>(k), static_cast<int>(j)};
        if (const auto it = assigned.find(src); it != assigned.end()) {
          out[k][j] = it->second;
          continue;
        }
        // Never the nearest window to a level-0 centre: nearest centroid.
        const double v = std::abs(fit.omega[static_cast<Eigen::Index>(j)].imag());
        if (!(v > 0.0)) {
          out[k][j] = 1;
          continue;
        }
        const double x = std::log10(v);
        int best = 0;
        for (std::size_t c = 1; c < res.centroids.size(); ++c)
          if (std::abs(x - res.centroids[c]) < std::abs(x - res.centroids[static_cast<std::size_t>(best)]))
            best = static_cast<int>(c);
        out[k][j] = best + 1;
      }
    }
  }

  const auto& deep = model.levels.back();
  g.centroids.push_back(deep.centroids.front());
  g.band_silhouette.push_back(deep.band_silhouette.empty() ? 0.0 : deep.band_silhouette.front());
  for (std::size_t c = 0; c < res.centroids.size(); ++c) {
    g.centroids.push_back(std::pow(10.0, res.centroids[c]));
    g.band_silhouette.push_back(res.cluster_silhouette[c]);
  }
  model.global = std::move(g);
}

Eigen::MatrixXd reconstruct_global_band(const MrCostsModel& model, int p)
{
  require_global(model);
  const auto& g = *model.global;
  if (p < 0 || p >= g.n_bands())
    throw BandOutOfRange("global band " + std::to_string(p) + " (model has " +
                         std::to_string(g.n_bands()) + ")");
  if (p == 0)
    return reconstruct_local_band(model.deepest(), 0, model.times);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(model.n_space, model.times.size());
  for (const auto& lvl : model.levels) {
    const auto& labels = g.labels[static_cast<std::size_t>(lvl.level)];
    out += overlap_reconstruct(
        lvl.fits,
        [&](int k, int j) {
          return labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] == p;
        },
        false, model.times);
  }
  return out;
}

Eigen::MatrixXd aggregate_bands(const MrCostsModel& model, const std::vector<int>& bands)
{
  require_global(model);
  if (bands.empty())
    throw BandOutOfRange("empty band selection");
  std::vector<int> sorted = bands;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int p : sorted)
    if (p < 0 || p >= model.global->n_bands())
      throw BandOutOfRange("global band " + std::to_string(p) + " (model has " +
                           std::to_string(model.global->n_bands()) + ")");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(model.n_space, model.times.size());
  for (int p : sorted)
    out += reconstruct_global_band(model, p);
  return out;
}

Eigen::MatrixXd reconstruct_full(const MrCostsModel& model)
{
  require_global(model);
  std::vector<int> all(static_cast<std::size_t>(model.global->n_bands()));
  for (std::size_t p = 0; p < all.size(); ++p)
    all[p] = static_cast<int>(p);
  return aggregate_bands(model, all);
}

double relative_error(const Eigen::MatrixXd& recon, const Eigen::MatrixXd& truth, int edge_trim)
{
  if (recon.rows() != truth.rows() || recon.cols() != truth.cols())
    throw ShapeMismatch("reconstruction and truth differ in shape");
  if (edge_trim < 0 || 2 * static_cast<Eigen::Index>(edge_trim) >= truth.cols())
    throw ShapeMismatch("edge trim " + std::to_string(edge_trim) + " leaves no interior");
  const Eigen::Index len = truth.cols() - 2 * edge_trim;
  const double num = (recon.middleCols(edge_trim, len) - truth.middleCols(edge_trim, len)).norm();
  const double den = truth.middleCols(edge_trim, len).norm();
  if (den == 0.0)
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return 100.0 * num / den;
}

int default_edge_trim(const MrCostsModel& model)
{
  int w = 0;
  for (const auto& l : model.levels)
    w = std::max(w, l.config.window_length);
  return w / 2;
}

}  // namespace mrcosts
