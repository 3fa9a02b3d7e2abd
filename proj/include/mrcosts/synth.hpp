// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mrcosts/snapshot.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace mrcosts {

/// cos(2 pi kappa s / n + phase) * cos(2 pi f t)
struct StandingPattern {
  double wavenumber = 0.0;
  double phase = 0.0;
};

/// cos(2 pi kappa s / n - sign(speed) 2 pi f t). The sign of `speed`
/// selects the direction of travel; the phase speed follows from the
/// frequency and wavenumber.
struct TravelingPattern {
  double wavenumber = 1.0;
  double speed = 1.0;
};

struct ComponentSpec {
  double frequency = 1.0;  // cycles per time unit
  double growth = 0.0;     // 1/time
  double amplitude = 1.0;
  std::variant<StandingPattern, TravelingPattern> pattern = StandingPattern{};
  std::optional<double> onset;   // component is zero before onset
  std::optional<double> offset;  // ... and from offset on
};

struct SynthResult {
  SnapshotMatrix data;                 // noisy sum
  SnapshotMatrix clean;                // noiseless sum
  std::vector<Eigen::MatrixXd> truth;  // one field per component
};

/// Evaluates the components on t_i = i * dt, s = 0..n_space-1 and adds
/// independent Gaussian noise of standard deviation `noise_sigma`.
/// Throws ConfigError on invalid specs.
SynthResult generate(const std::vector<ComponentSpec>& components, int n_space, int n_time,
                     double dt, double noise_sigma, std::uint64_t seed);

/// Noise sigma giving the power ratio mean(clean^2) / sigma^2 == snr.
double sigma_for_snr(const Eigen::MatrixXd& clean, double snr);

}  // namespace mrcosts
