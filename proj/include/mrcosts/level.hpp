// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/clustering.hpp"
#include "mrcosts/snapshot.hpp"
#include "mrcosts/window.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mrcosts {

inline constexpr int kDefaultLocalBands = 0;
inline constexpr int kSweepLocalBands = -1;

struct LevelConfig {
  int window_length = 16;
  int slide = 2;
  int rank = 8;
  /// Bound on |Re(omega)|; <= 0 selects 0.1 / window duration.
  double rho = 0.0;
  /// Local band count: a fixed number, kDefaultLocalBands (rank / 2) or
  /// kSweepLocalBands (silhouette sweep over [k_min, k_max]). With fewer
  /// distinguishable frequencies than that, each gets an oscillatory band
  /// and band 0 holds only the window backgrounds (centroid 0).
  int n_local_bands = kDefaultLocalBands;
  OmegaTransform transform = OmegaTransform::abs_imag;
  int k_min = 2;
  int k_max = 12;
};

/// Throws ConfigError unless 1 <= slide <= window_length, rank is even and
/// 2 <= rank < window_length.
void validate(const LevelConfig& config);

/// The fixed band count to use, or kSweepLocalBands.
int resolved_local_bands(const LevelConfig& config);

/// rho, or the default 0.1 / ((window_length - 1) * dt) when rho <= 0.
double resolved_rho(const LevelConfig& config, double dt);

/// Modes whose contribution to their window is below this fraction of the
/// window's strongest mode (or of the reference-scale energy, whichever is
/// larger) are routed to band 0 without being clustered. Windows quieter
/// than this relative to the reference scale are not fit at all.
inline constexpr double kNegligibleModeRel = 1e-8;

/// One decomposition level: window fits plus local frequency bands.
struct LevelDecomposition {
  int level = 0;
  LevelConfig config;  // rho resolved
  std::vector<WindowFit> fits;
  /// local_labels[k][j]: band of mode j in window k; -1 for failed windows.
  std::vector<std::vector<int>> local_labels;
  std::vector<double> centroids;  // |Im omega| per band, ascending
  std::vector<double> band_silhouette;
  double silhouette = 0.0;
  bool low_confidence = false;
  /// RMS of the (row-demeaned) data the whole model was fitted to; sets the
  /// absolute floor for negligible modes so deep levels don't cluster dust.
  double reference_scale = 0.0;

  int n_bands() const { return static_cast<int>(centroids.size()); }
  int failed_count() const;
  double median_residual() const;
};

struct LevelFitOptions {
  VarproSettings varpro;  // rank is taken from the level config
  int threads = 0;
  int restarts = 10;
  double reference_scale = 0.0;  // <= 0: measured from the level input
};

/// True for modes too weak to take part in clustering (see kNegligibleModeRel).
std::vector<bool> negligible_modes(const WindowFit& fit, const Eigen::VectorXd& times,
                                   double reference_scale = 0.0);

/// Leading `rank` left singular vectors of the row-demeaned data (only those
/// with non-negligible singular values). Empty when rank >= n_space.
Eigen::MatrixXd pod_basis(const SnapshotMatrix& data, int rank);

/// RMS of the data after removing each row's mean.
double reference_scale(const SnapshotMatrix& data);

/// Windows the data, fits each window and clusters the pooled eigenvalues
/// into local bands. Throws AllWindowsFailed, WindowTooLong, ConfigError.
LevelDecomposition fit_level(const SnapshotMatrix& data, const LevelConfig& config,
                             std::uint64_t seed, const LevelFitOptions& options = {},
                             int level_index = 0);

/// Clusters the fitted eigenvalues of `level` (fits must be populated).
void cluster_level(LevelDecomposition& level, const Eigen::VectorXd& times, std::uint64_t seed,
                   int restarts = 10);

/// Band p of the level; the window backgrounds are included for p == 0
/// only. Throws BandOutOfRange.
Eigen::MatrixXd reconstruct_local_band(const LevelDecomposition& level, int p,
                                       const Eigen::VectorXd& times);

/// Band 0 of the level on the original time grid: the next level's input.
SnapshotMatrix lowpass_handoff(const LevelDecomposition& level, const SnapshotMatrix& data);

}  // namespace mrcosts
