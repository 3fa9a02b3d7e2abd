// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/clustering.hpp"
#include "mrcosts/level.hpp"
#include "mrcosts/snapshot.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mrcosts {

/// Global frequency bands G_0..G_P. Band 0 is the deepest level's local
/// band 0; bands 1..P cluster the fast local bands of every level.
struct GlobalBands {
  /// labels[l][k][j]: global band of mode j in window k of level l, or -1
  /// for modes that belong to no global band (band 0 of a non-deepest
  /// level, failed windows).
  std::vector<std::vector<std::vector<int>>> labels;
  /// |Im omega| centroid per band (1/time). Entry 0 is the deepest level's
  /// local band-0 centroid.
  std::vector<double> centroids;
  std::vector<double> band_silhouette;  // entry 0 from the deepest level
  double silhouette = 0.0;
  bool low_confidence = false;
  std::vector<std::pair<int, double>> sweep;  // (K, silhouette) when swept

  int n_bands() const { return static_cast<int>(centroids.size()); }
};

struct MrCostsModel {
  std::vector<LevelDecomposition> levels;
  Eigen::VectorXd times;
  Eigen::Index n_space = 0;
  std::uint64_t seed = 0;
  std::optional<GlobalBands> global;

  const LevelDecomposition& deepest() const { return levels.back(); }
  /// Number of (window, mode) pairs carrying global band p.
  int mode_count(int p) const;
};

/// Fits level 0 on `data` and each later level on the previous level's
/// low-pass handoff. Throws NonIncreasingWindows, ConfigError and level
/// errors.
MrCostsModel fit(const SnapshotMatrix& data, const std::vector<LevelConfig>& configs,
                 std::uint64_t seed, const LevelFitOptions& options = {});

/// Eigenvalues of every fast (p > 0) local band resampled onto the level-0
/// window centres by nearest window centre (ties to the earlier window),
/// in log10 |Im| feature space. `source` names the original (l, k, j).
OmegaFeatures interpolate_omega_global(const MrCostsModel& model);

struct GlobalOptions {
  std::optional<int> n_bands;  // oscillatory bands; nullopt sweeps
  int k_min = 2;
  int k_max = 16;
  std::uint64_t seed = 0;
  int restarts = 10;
};

/// Clusters the interpolated eigenvalues in log10 |Im omega| and maps the
/// bands back to every (level, window, mode). K never exceeds the number
/// of distinguishable frequencies (resolvable_count); an auto sweep with
/// fewer than k_min of them uses that many and sets low_confidence. Throws
/// ConfigError for n_bands < 2, TooFewPoints without oscillatory modes.
void global_separation(MrCostsModel& model, const GlobalOptions& options);

/// Band p summed over all levels (no background); p == 0 is the deepest
/// level's local band 0 with its window backgrounds. Throws
/// BandOutOfRange.
Eigen::MatrixXd reconstruct_global_band(const MrCostsModel& model, int p);

/// Sum of all global bands; the background enters once, through band 0.
Eigen::MatrixXd reconstruct_full(const MrCostsModel& model);

/// Sum of the listed bands (background only if 0 is listed).
Eigen::MatrixXd aggregate_bands(const MrCostsModel& model, const std::vector<int>& bands);

/// 100 * ||recon - truth|| / ||truth|| over snapshots
/// [edge_trim, n_time - edge_trim). Throws ShapeMismatch.
double relative_error(const Eigen::MatrixXd& recon, const Eigen::MatrixXd& truth, int edge_trim);

/// Half the largest window length.
int default_edge_trim(const MrCostsModel& model);

}  // namespace mrcosts
