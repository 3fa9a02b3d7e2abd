// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/level.hpp"
#include "mrcosts/matrix_io.hpp"
#include "mrcosts/model.hpp"
#include "mrcosts/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mrcosts {

inline constexpr double kDefaultSlideFraction = 0.1;

/// Synthetic fixture description ([synth] plus one [component.N] per term).
struct SynthConfig {
  std::vector<ComponentSpec> components;
  int n_space = 32;
  int n_time = 2048;
  double dt = 1.0;
  /// Either an explicit sigma or a power SNR; neither means noiseless.
  std::optional<double> noise_sigma;
  std::optional<double> snr;
  std::uint64_t seed = 0;
};

/// Everything a CLI run needs. Paths in the file are relative to the
/// file's directory.
struct RunConfig {
  std::filesystem::path input;
  std::optional<MatrixFormat> format;
  std::filesystem::path output;
  std::vector<LevelConfig> levels;
  std::vector<double> slide_fractions;  // per level, as given
  GlobalOptions global;
  std::uint64_t seed = 0;
  std::optional<int> edge_trim;
  std::optional<SynthConfig> synth;
  std::string text;  // the source, echoed into the archive
};

/// slide = max(1, round(fraction * window_length)).
int slide_for(int window_length, double fraction);

/// Parses and validates. Unknown keys and sections are errors, as are
/// missing or non-contiguous [level.N] sections when `require_levels`.
/// Throws ConfigError (ParseError is rethrown as ConfigError).
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>",
                           const std::filesystem::path& base_dir = {},
                           bool require_levels = true);
RunConfig load_run_config(const std::filesystem::path& path, bool require_levels = true);

/// Evaluates a synth config: the noise sigma comes from `snr` when given.
SynthResult generate(const SynthConfig& config);

}  // namespace mrcosts
