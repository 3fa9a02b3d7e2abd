// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/snapshot.hpp"
#include "mrcosts/varpro.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace mrcosts {

struct WindowSpec {
  int start_index = 0;
  int length = 0;
  int level = 0;
  int window_index = 0;

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// One window's fit: x(t) ~ sum_j phi_j exp(omega_j (t - t_start)) b_j + c.
struct WindowFit {
  WindowSpec spec;
  Eigen::VectorXcd omega;
  Eigen::MatrixXcd phi;
  Eigen::VectorXcd amplitudes;
  Eigen::VectorXd background;
  double residual_rel = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string failure;  // reason, when failed

  Eigen::Index rank() const { return omega.size(); }
};

/// Starts 0, slide, 2 slide, ... plus a tail window anchored at
/// n_time - window_length when the last regular start leaves snapshots
/// uncovered. Throws WindowTooLong / ConfigError.
std::vector<WindowSpec> make_windows(int n_time, int window_length, int slide, int level = 0);

/// Removes the per-row time mean; returns the mean.
Eigen::VectorXd demean_window(Eigen::MatrixXd& window);

/// Hann taper sin^2(pi i / (L - 1)) with a 1e-6 floor.
Eigen::VectorXd window_weights(int length);

inline constexpr double kWeightFloor = 1e-6;

/// Per-window blend weights normalised so that at every covered time the
/// weights of the windows flagged in `alive` sum to one. Entry k has the
/// window's length; dead windows get zeros. Throws UncoveredTime.
std::vector<Eigen::VectorXd> overlap_weights(const std::vector<WindowSpec>& windows,
                                             const std::vector<bool>& alive, int n_time);

using ModeSelection = std::function<bool(int window, int mode)>;

/// Weight-blended reconstruction of the selected modes over all non-failed
/// fits on the full time grid `times`. Throws UncoveredTime when a time
/// index is not covered by any surviving window.
Eigen::MatrixXd overlap_reconstruct(const std::vector<WindowFit>& fits,
                                    const ModeSelection& selection, bool include_background,
                                    const Eigen::VectorXd& times);

/// Evaluates one window's model (selected modes, optional background) on
/// its own snapshots.
Eigen::MatrixXd evaluate_window(const WindowFit& fit, const ModeSelection& selection,
                                bool include_background, const Eigen::VectorXd& times);

struct WindowFitOptions {
  VarproSettings varpro;
  EigConstraint constraint;
  int threads = 0;  // 0: hardware concurrency
  /// Windows whose demeaned RMS is at or below this are treated as quiet:
  /// background-only fits with zero amplitudes.
  double quiet_rms = 0.0;
  /// Optional orthonormal spatial basis (n_space x q). When set, windows are
  /// fit in its coordinates and the modes lifted back.
  Eigen::MatrixXd basis;
};

/// Demeans and fits one window. RankDeficientWindow and NumericalBreakdown
/// are recorded on the returned fit instead of thrown.
WindowFit fit_window(const SnapshotMatrix& data, const WindowSpec& spec,
                     const WindowFitOptions& options);

/// Fits every window, possibly concurrently. Results are ordered by window
/// and identical to a sequential run.
std::vector<WindowFit> fit_windows(const SnapshotMatrix& data,
                                   const std::vector<WindowSpec>& windows,
                                   const WindowFitOptions& options);

}  // namespace mrcosts
