// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/synth.hpp"

#include "mrcosts/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mrcosts {

namespace {

void validate(const ComponentSpec& c)
{
  if (!(c.frequency > 0.0) || !std::isfinite(c.frequency))
    throw ConfigError("component frequency must be > 0");
  if (!std::isfinite(c.growth) || !std::isfinite(c.amplitude))
    throw ConfigError("component growth and amplitude must be finite");
  if (c.onset && c.offset && !(*c.onset < *c.offset))
    throw ConfigError("component onset must precede offset");
  if (const auto* tp = std::get_if<TravelingPattern>(&c.pattern); tp && tp->speed == 0.0)
    throw ConfigError("traveling pattern needs a nonzero speed");
}

}  // namespace

SynthResult generate(const std::vector<ComponentSpec>& components, int n_space, int n_time,
                     double dt, double noise_sigma, std::uint64_t seed)
{
  if (n_space < 1 || n_time < 2)
    throw ConfigError("need n_space >= 1 and n_time >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("dt must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ConfigError("noise sigma must be >= 0");
  if (components.empty())
    throw ConfigError("at least one component is required");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  SynthResult out;
  Eigen::MatrixXd clean = Eigen::MatrixXd::Zero(n_space, n_time);
  for (const auto& c : components) {
    validate(c);
    Eigen::MatrixXd field(n_space, n_time);
    for (int j = 0; j < n_time; ++j) {
      const double t = j * dt;
      const bool active = (!c.onset || t >= *c.onset) && (!c.offset || t < *c.offset);
      const double env = active ? c.amplitude * std::exp(c.growth * t) : 0.0;
      for (int s = 0; s < n_space; ++s) {
        const double x = static_cast<double>(s) / n_space;
        double v = 0.0;
        if (const auto* sp = std::get_if<StandingPattern>(&c.pattern)) {
          v = std::cos(two_pi * sp->wavenumber * x + sp->phase) *
              std::cos(two_pi * c.frequency * t);
        } else {
          const auto& tp = std::get<TravelingPattern>(c.pattern);
          const double dir = tp.speed > 0.0 ? 1.0 : -1.0;
          v = std::cos(two_pi * tp.wavenumber * x - dir * two_pi * c.frequency * t);
        }
        field(s, j) = env * v;
      }
    }
    clean += field;
    out.truth.push_back(std::move(field));
  }

  Eigen::MatrixXd noisy = clean;
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_sigma);
    for (int j = 0; j < n_time; ++j)
      for (int s = 0; s < n_space; ++s)
        noisy(s, j) += normal(rng);
  }
  out.data = SnapshotMatrix::uniform(std::move(noisy), 0.0, dt);
  out.clean = SnapshotMatrix::uniform(std::move(clean), 0.0, dt);
  return out;
}

double sigma_for_snr(const Eigen::MatrixXd& clean, double snr)
{
  if (!(snr > 0.0))
    throw ConfigError("snr must be > 0");
  const double power = clean.squaredNorm() / static_cast<double>(clean.size());
  return std::sqrt(power / snr);
}

}  // namespace mrcosts
