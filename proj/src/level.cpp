// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/level.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>

namespace mrcosts {

void validate(const LevelConfig& c)
{
  if (c.rank < 2 || c.rank % 2 != 0)
    throw ConfigError("rank must be even (got " + std::to_string(c.rank) + ")");
  if (c.window_length < 2 || c.rank >= c.window_length)
    throw ConfigError("rank must be smaller than the window length");
  if (c.slide < 1 || c.slide > c.window_length)
    throw ConfigError("slide must be in [1, window_length]");
  if (c.n_local_bands < kSweepLocalBands)
    throw ConfigError("n_local_bands must be >= 1, default (0) or auto (-1)");
  if (c.n_local_bands == kSweepLocalBands && (c.k_min < 2 || c.k_max < c.k_min))
    throw ConfigError("local band sweep needs 2 <= k_min <= k_max");
  if (!std::isfinite(c.rho))
    throw ConfigError("rho must be finite");
}

int resolved_local_bands(const LevelConfig& c)
{
  return c.n_local_bands == kDefaultLocalBands ? c.rank / 2 : c.n_local_bands;
}

double resolved_rho(const LevelConfig& c, double dt)
{
  return c.rho > 0.0 ? c.rho : 0.1 / ((c.window_length - 1) * dt);
}

int LevelDecomposition::failed_count() const
{
  return static_cast<int>(std::count_if(fits.begin(), fits.end(),
                                        [](const WindowFit& f) { return f.failed; }));
}

double LevelDecomposition::median_residual() const
{
  std::vector<double> r;
  for (const auto& f : fits)
    if (!f.failed)
      r.push_back(f.residual_rel);
  if (r.empty())
    return std::nan("");
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  return *mid;
}

Eigen::MatrixXd pod_basis(const SnapshotMatrix& data, int rank)
{
  const Eigen::MatrixXd& x = data.values();
  if (rank >= x.rows())
    return {};
  const Eigen::MatrixXd centred = x.colwise() - x.rowwise().mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < rank && keep < sv.size() && sv[keep] > 1e-12 * sv[0])
    ++keep;
  if (keep == 0)
    return {};
  return svd.matrixU().leftCols(keep);
}

double reference_scale(const SnapshotMatrix& data)
{
  const Eigen::MatrixXd& x = data.values();
  const Eigen::MatrixXd centred = x.colwise() - x.rowwise().mean();
  return centred.norm() / std::sqrt(static_cast<double>(x.size()));
}

std::vector<bool> negligible_modes(const WindowFit& fit, const Eigen::VectorXd& times,
                                   double reference_scale)
{
  const Eigen::Index r = fit.rank();
  std::vector<double> contrib(static_cast<std::size_t>(r), 0.0);
  double strongest = 0.0;
  for (Eigen::Index j = 0; j < r; ++j) {
    double energy = 0.0;
    for (int i = 0; i < fit.spec.length; ++i) {
      const double dtau = times[fit.spec.start_index + i] - times[fit.spec.start_index];
      energy += std::exp(2.0 * fit.omega[j].real() * dtau);
    }
    contrib[static_cast<std::size_t>(j)] = std::abs(fit.amplitudes[j]) * std::sqrt(energy);
    strongest = std::max(strongest, contrib[static_cast<std::size_t>(j)]);
  }
  const double floor_energy =
      reference_scale *
      std::sqrt(static_cast<double>(fit.spec.length) * static_cast<double>(fit.phi.rows()));
  strongest = std::max(strongest, floor_energy);
  std::vector<bool> out(static_cast<std::size_t>(r));
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = !(contrib[j] > kNegligibleModeRel * strongest);
  return out;
}

void cluster_level(LevelDecomposition& level, const Eigen::VectorXd& times, std::uint64_t seed,
                   int restarts)
{
  const auto& cfg = level.config;
  std::vector<std::complex<double>> pooled;
  std::vector<SourceIndex> sources;
  level.local_labels.assign(level.fits.size(), {});
  for (std::size_t k = 0; k < level.fits.size(); ++k) {
    const auto& f = level.fits[k];
    if (f.failed) {
      level.local_labels[k].assign(static_cast<std::size_t>(cfg.rank), -1);
      continue;
    }
    level.local_labels[k].assign(static_cast<std::size_t>(f.rank()), 0);
    const auto weak = negligible_modes(f, times, level.reference_scale);
    for (Eigen::Index j = 0; j < f.rank(); ++j)
      if (!weak[static_cast<std::size_t>(j)]) {
        pooled.push_back(f.omega[j]);
        sources.push_back({level.level, static_cast<int>(k), static_cast<int>(j)});
      }
  }

  const Eigen::VectorXcd omegas =
      Eigen::Map<Eigen::VectorXcd>(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
  const OmegaFeatures feats = transform_omega(omegas, cfg.transform, sources);

  const int groups = resolvable_count(feats.values);

  level.centroids.clear();
  level.band_silhouette.clear();
  level.silhouette = 0.0;
  level.low_confidence = false;
  if (groups == 0) {
    level.centroids = {0.0};
    level.band_silhouette = {0.0};
    return;  // everything routed to band 0
  }

  // Fewer distinguishable frequencies than bands asked for: each group is
  // its own oscillatory band and band 0 keeps only the backgrounds.
  const int bands = resolved_local_bands(cfg);
  const bool pad = groups < (bands == kSweepLocalBands ? cfg.k_min : bands);
  ClusterResult res;
  if (pad) {
    res = kmeans(feats.values, groups, seed, restarts);
  } else if (bands != kSweepLocalBands) {
    res = kmeans(feats.values, bands, seed, restarts);
  } else {
    SweepResult sw = sweep_clusters(feats.values, cfg.k_min, cfg.k_max, seed, restarts);
    level.low_confidence = sw.low_confidence;
    res = std::move(sw.best);
  }
  const int shift = pad ? 1 : 0;
  for (std::size_t i = 0; i < feats.values.size(); ++i) {
    const auto& src = feats.source[i];
    level.local_labels[static_cast<std::size_t>(src.window)][static_cast<std::size_t>(src.mode)] =
        res.labels[i] + shift;
  }
  if (pad) {
    level.centroids.push_back(0.0);
    level.band_silhouette.push_back(0.0);
  }
  for (double c : res.centroids)
    level.centroids.push_back(inverse_transform(c, cfg.transform));
  level.band_silhouette.insert(level.band_silhouette.end(), res.cluster_silhouette.begin(),
                               res.cluster_silhouette.end());
  level.silhouette = res.silhouette;
}

LevelDecomposition fit_level(const SnapshotMatrix& data, const LevelConfig& config,
                             std::uint64_t seed, const LevelFitOptions& options, int level_index)
{
  validate(config);
  LevelDecomposition level;
  level.level = level_index;
  level.config = config;
  level.config.rho = resolved_rho(config, data.dt());

  const auto windows = make_windows(static_cast<int>(data.n_time()), config.window_length,
                                    config.slide, level_index);
  WindowFitOptions wopt;
  wopt.varpro = options.varpro;
  wopt.varpro.rank = config.rank;
  wopt.constraint.rho = level.config.rho;
  wopt.threads = options.threads;
  level.reference_scale =
      options.reference_scale > 0.0 ? options.reference_scale : reference_scale(data);
  wopt.quiet_rms = kNegligibleModeRel * level.reference_scale;
  wopt.basis = pod_basis(data, config.rank);
  level.fits = fit_windows(data, windows, wopt);
  if (level.failed_count() == static_cast<int>(level.fits.size()))
    throw AllWindowsFailed("level " + std::to_string(level_index) + ": all " +
                           std::to_string(level.fits.size()) +
                           " windows failed; first reason: " + level.fits.front().failure);
  cluster_level(level, data.times(), seed, options.restarts);
  return level;
}

Eigen::MatrixXd reconstruct_local_band(const LevelDecomposition& level, int p,
                                       const Eigen::VectorXd& times)
{
  if (p < 0 || p >= level.n_bands())
    throw BandOutOfRange("local band " + std::to_string(p) + " of level " +
                         std::to_string(level.level) + " (has " +
                         std::to_string(level.n_bands()) + ")");
  const auto& labels = level.local_labels;
  return overlap_reconstruct(
      level.fits,
      [&](int k, int j) {
        return labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] == p;
      },
      p == 0, times);
}

SnapshotMatrix lowpass_handoff(const LevelDecomposition& level, const SnapshotMatrix& data)
{
  return SnapshotMatrix(reconstruct_local_band(level, 0, data.times()), data.times(),
                        data.space_labels());
}

}  // namespace mrcosts
