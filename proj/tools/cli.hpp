// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrcosts::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAllWindowsFailed = 3;

/// Runs the mrcosts command line. Tables go to `out`, messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a band selection: "all", or comma-separated items where an item
/// is a band index or indices joined by '+' (an aggregate), e.g. "0,1,2+3".
/// An empty result means "all". Throws ConfigError.
std::vector<std::vector<int>> parse_band_selection(const std::string& text);

/// Parses a row mask such as "0-7,12" into sorted unique row indices.
std::vector<int> parse_row_mask(const std::string& text, int n_rows);

}  // namespace mrcosts::cli
