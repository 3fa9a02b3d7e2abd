// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace mrcosts::oracle {

Eigen::VectorXcd exact_dmd(const Eigen::MatrixXd& x, const Eigen::VectorXd& times, int r)
{
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (r < 1 || m < 2 * r + 1)
    throw RankDeficientWindow("too few snapshots for the recurrence");
  const double dt = (times[m - 1] - times[0]) / static_cast<double>(m - 1);

  // x_{i+r} = sum_q c_q x_{i+q}, stacked over space points and i.
  const Eigen::Index rows = n * (m - r);
  Eigen::MatrixXd lhs(rows, r);
  Eigen::VectorXd rhs(rows);
  Eigen::Index row = 0;
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index i = 0; i + r < m; ++i, ++row) {
      for (int q = 0; q < r; ++q)
        lhs(row, q) = x(s, i + q);
      rhs[row] = x(s, i + r);
    }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lhs);
  qr.setThreshold(1e-10);
  if (qr.rank() < r)
    throw RankDeficientWindow("recurrence regression is singular");
  const Eigen::VectorXd c = qr.solve(rhs);

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(r, r);
  for (int q = 0; q + 1 < r; ++q)
    companion(q + 1, q) = 1.0;
  companion.col(r - 1) = c;
  const Eigen::VectorXcd mu = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
  Eigen::VectorXcd omega(r);
  for (int q = 0; q < r; ++q)
    omega[q] = std::log(mu[q]) / dt;
  return omega;
}

std::vector<double> fft_peaks(const Eigen::VectorXd& series, double dt, int n_peaks)
{
  const Eigen::Index n = series.size();
  const double mean = series.mean();
  const Eigen::Index half = n / 2;
  std::vector<double> power(static_cast<std::size_t>(half + 1), 0.0);
  for (Eigen::Index k = 0; k <= half; ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += (series[i] - mean) *
             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / n);
    power[static_cast<std::size_t>(k)] = std::norm(acc);
  }
  std::vector<std::pair<double, double>> peaks;
  for (Eigen::Index k = 1; k <= half; ++k) {
    const double p = power[static_cast<std::size_t>(k)];
    const double left = power[static_cast<std::size_t>(k - 1)];
    const double right = k < half ? power[static_cast<std::size_t>(k + 1)] : -1.0;
    if (p > left && p >= right)
      peaks.emplace_back(p, static_cast<double>(k) / (n * dt));
  }
  std::sort(peaks.begin(), peaks.end(), std::greater<>());
  std::vector<double> out;
  for (int i = 0; i < n_peaks && i < static_cast<int>(peaks.size()); ++i)
    out.push_back(peaks[static_cast<std::size_t>(i)].second);
  return out;
}

double silhouette_brute(const std::vector<double>& x, const std::vector<int>& labels)
{
  std::map<int, int> counts;
  for (int l : labels)
    ++counts[l];
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::map<int, double> sum;
    for (std::size_t j = 0; j < x.size(); ++j)
      sum[labels[j]] += std::abs(x[i] - x[j]);
    const int own = labels[i];
    if (counts[own] == 1)
      continue;  // singleton contributes 0
    const double a = sum[own] / (counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, cnt] : counts)
      if (label != own)
        b = std::min(b, sum[label] / cnt);
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(x.size());
}

}  // namespace mrcosts::oracle
