// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace mrcosts {

enum class MatrixFormat { csv, f64bin };

/// Parses "csv" or "f64bin"; throws ConfigError otherwise.
MatrixFormat parse_matrix_format(std::string_view name);

/// Picks the format from the file extension (".csv" or anything else).
MatrixFormat guess_matrix_format(const std::filesystem::path& path);

/// CSV: optional header row, then one snapshot per row with the time in
/// column 0. f64bin: "MRCO", u32 version, u64 n_space, u64 n_time, times,
/// then one block of n_space values per snapshot, all little-endian.
SnapshotMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);

/// Writes through a temporary file and renames it into place.
void save_matrix(const SnapshotMatrix& m, const std::filesystem::path& path,
                 MatrixFormat format);

inline constexpr char kMatrixMagic[4] = {'M', 'R', 'C', 'O'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

// Raw little-endian float64 payloads, used by the model archive.
std::vector<double> read_f64_blob(const std::filesystem::path& path);
void write_f64_blob(const std::filesystem::path& path, std::span<const double> data);

/// Writes `bytes` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mrcosts
