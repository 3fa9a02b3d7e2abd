// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/model.hpp"

#include <filesystem>
#include <string>

namespace mrcosts {

inline constexpr int kArchiveFormatVersion = 1;

/// Directory layout:
///   manifest.toml                 levels, configs, window table, global summary
///   times.f64bin                  n_time float64
///   level{l}/win{k}.f64bin        omega (2r), b (2r), c (n_space), phi (2 n_space r)
///   level{l}/windows.f64bin       per window: start, length, residual, iterations,
///                                 converged, failed
///   level{l}/local_bands.f64bin   local labels, window-major
///   global_bands.f64bin           n_bands, centroids, band silhouettes, labels
/// Complex values are stored as (re, im) pairs, matrices column-major. The
/// directory is created if needed; existing files are overwritten.
/// `run_config` (optional) is copied verbatim to run_config.toml.
void save_model(const MrCostsModel& model, const std::filesystem::path& dir,
                const std::string& run_config = {});

/// Throws VersionMismatch, CorruptArchive, IoError.
MrCostsModel load_model(const std::filesystem::path& dir);

}  // namespace mrcosts
