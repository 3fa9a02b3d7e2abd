// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mrcosts {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MRCOSTS_DEFINE_ERROR(Name)              \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) \
    {                                           \
    }                                           \
  }

// data-model-io
MRCOSTS_DEFINE_ERROR(ParseError);
MRCOSTS_DEFINE_ERROR(NonUniformTimeGrid);
MRCOSTS_DEFINE_ERROR(NonFiniteValue);
MRCOSTS_DEFINE_ERROR(IoError);
MRCOSTS_DEFINE_ERROR(VersionMismatch);
MRCOSTS_DEFINE_ERROR(CorruptArchive);
MRCOSTS_DEFINE_ERROR(ShapeMismatch);

// fitting
MRCOSTS_DEFINE_ERROR(RankDeficientWindow);
MRCOSTS_DEFINE_ERROR(NumericalBreakdown);
MRCOSTS_DEFINE_ERROR(WindowTooLong);
MRCOSTS_DEFINE_ERROR(UncoveredTime);
MRCOSTS_DEFINE_ERROR(AllWindowsFailed);
MRCOSTS_DEFINE_ERROR(NonIncreasingWindows);

// clustering and bands
MRCOSTS_DEFINE_ERROR(TooFewPoints);
MRCOSTS_DEFINE_ERROR(DegeneratePartition);
MRCOSTS_DEFINE_ERROR(BandOutOfRange);

MRCOSTS_DEFINE_ERROR(ConfigError);

#undef MRCOSTS_DEFINE_ERROR

}  // namespace mrcosts
