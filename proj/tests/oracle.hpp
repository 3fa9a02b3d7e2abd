// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference computations used only by the test suites. Nothing
// here shares code with the library's fitting or clustering paths.

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mrcosts::oracle {

/// Continuous-time eigenvalues of a matrix-valued linear recurrence of
/// order r fitted by least squares across all space points (companion
/// matrix route). Throws RankDeficientWindow when the regression is
/// singular.
Eigen::VectorXcd exact_dmd(const Eigen::MatrixXd& x, const Eigen::VectorXd& times, int r);

/// Frequencies (cycles per time) of the strongest `n_peaks` local maxima of
/// the periodogram, by decreasing power. Direct DFT.
std::vector<double> fft_peaks(const Eigen::VectorXd& series, double dt, int n_peaks);

/// O(N^2) silhouette straight from the definition.
double silhouette_brute(const std::vector<double>& x, const std::vector<int>& labels);

}  // namespace mrcosts::oracle
