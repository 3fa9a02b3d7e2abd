// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mrcosts {

enum class OmegaTransform { abs_imag, abs_imag_sq, log10_abs_imag };

std::string_view to_string(OmegaTransform t);
OmegaTransform parse_transform(std::string_view name);  // throws ConfigError

/// Where a feature came from.
struct SourceIndex {
  int level = 0;
  int window = 0;
  int mode = 0;

  friend auto operator<=>(const SourceIndex&, const SourceIndex&) = default;
};

/// Clusterable frequency features. Entries whose |Im omega| is too small
/// for the log transform are listed in `near_zero` instead.
struct OmegaFeatures {
  OmegaTransform transform = OmegaTransform::abs_imag;
  std::vector<double> values;
  std::vector<SourceIndex> source;
  std::vector<SourceIndex> near_zero;
};

/// Feature value of one eigenvalue, and back from feature space to |Im|.
double transform_value(std::complex<double> omega, OmegaTransform t);
double inverse_transform(double feature, OmegaTransform t);

/// Transforms a vector of eigenvalues (sources default to mode index j).
OmegaFeatures transform_omega(const Eigen::VectorXcd& omegas, OmegaTransform kind,
                              std::span<const SourceIndex> sources = {});

/// Log transform floor: |Im| below this fraction of the median is near zero.
inline constexpr double kNearZeroRel = 1e-12;

/// Features closer than this fraction of the largest |feature| count as one
/// value when capping K: noiseless fits repeat a frequency up to rounding,
/// and k-means would happily split it at the ulp level.
inline constexpr double kFeatureResolution = 1e-9;

/// Number of groups left after merging sorted neighbours closer than
/// kFeatureResolution * max |x|.
int resolvable_count(std::span<const double> x);

struct ClusterResult {
  std::vector<int> labels;       // label 0 has the smallest centroid
  std::vector<double> centroids;  // ascending, feature space
  double silhouette = 0.0;
  std::vector<double> cluster_silhouette;  // mean silhouette of each cluster's members
  double inertia = 0.0;
  std::uint64_t seed = 0;
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` runs by
/// inertia. Throws TooFewPoints when K exceeds the distinct value count and
/// DegeneratePartition when every run leaves a cluster empty (possible on
/// near-duplicate values, where means round onto each other).
ClusterResult kmeans(std::span<const double> x, int k, std::uint64_t seed, int restarts = 10);

/// Mean of (b - a) / max(a, b); singletons contribute 0. Throws
/// DegeneratePartition for fewer than two clusters or an empty label.
double silhouette(std::span<const double> x, std::span<const int> labels);

/// Per-point silhouette values, same conventions as silhouette().
std::vector<double> silhouette_samples(std::span<const double> x, std::span<const int> labels);

struct SweepResult {
  int best_k = 0;
  ClusterResult best;
  std::vector<std::pair<int, double>> scores;  // (K, silhouette)
  bool low_confidence = false;
};

inline constexpr double kLowConfidenceSilhouette = 0.25;

/// kmeans for every K in [k_min, k_max] (capped at resolvable_count); the largest silhouette wins, ties go to the smaller K. A K whose
/// every run leaves a cluster empty is skipped and gets no score row.
SweepResult sweep_clusters(std::span<const double> x, int k_min, int k_max, std::uint64_t seed,
                           int restarts = 10);

}  // namespace mrcosts
