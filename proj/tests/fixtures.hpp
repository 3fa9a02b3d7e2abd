// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace mrcosts::testing {

/// A window generated exactly by conjugate pairs a_q +- i v_q.
struct ExpWindow {
  Eigen::MatrixXd x;
  Eigen::VectorXd t;
  Eigen::VectorXcd omega;  // pairs adjacent, increasing |Im|
};

/// `pairs` oscillators with well separated frequencies in (0.1, 0.8) *
/// Nyquist, |Re| <= max_re, and random spatial cos/sin patterns.
inline ExpWindow random_exp_window(std::mt19937_64& rng, int n_space, int n_time,
                                   int pairs, double dt, double max_re)
{
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  const double nyquist = 3.141592653589793 / dt;
  ExpWindow w;
  w.t.resize(n_time);
  for (int i = 0; i < n_time; ++i)
    w.t[i] = i * dt;
  w.x = Eigen::MatrixXd::Zero(n_space, n_time);
  w.omega.resize(2 * pairs);
  for (int q = 0; q < pairs; ++q) {
    const double v = nyquist * (0.1 + 0.7 * (q + 0.5 + jitter(rng)) / pairs);
    const double a = max_re * unit(rng);
    Eigen::VectorXd pc(n_space);
    Eigen::VectorXd ps(n_space);
    for (int s = 0; s < n_space; ++s) {
      pc[s] = unit(rng);
      ps[s] = unit(rng);
    }
    for (int i = 0; i < n_time; ++i) {
      const double env = std::exp(a * w.t[i]);
      w.x.col(i) += env * (std::cos(v * w.t[i]) * pc + std::sin(v * w.t[i]) * ps);
    }
    w.omega[2 * q] = {a, v};
    w.omega[2 * q + 1] = {a, -v};
  }
  return w;
}

/// Sort by (Im, Re) so two conjugate-symmetric spectra line up.
inline Eigen::VectorXcd sorted_spectrum(const Eigen::VectorXcd& omega)
{
  std::vector<std::complex<double>> v(omega.data(), omega.data() + omega.size());
  std::sort(v.begin(), v.end(), [](auto a, auto b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// max_j |a_j - b_j| / max(|b_j|, tiny) after sorting both.
inline double spectrum_rel_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
  const auto sa = sorted_spectrum(a);
  const auto sb = sorted_spectrum(b);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sa.size(); ++i)
    worst = std::max(worst, std::abs(sa[i] - sb[i]) / std::max(std::abs(sb[i]), 1e-300));
  return worst;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir()
  {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mrcosts-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace mrcosts::testing
