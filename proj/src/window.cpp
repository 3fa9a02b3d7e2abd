// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/window.hpp"

#include "mrcosts/error.hpp"
#include "mrcosts/parallel.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace mrcosts {

std::vector<WindowSpec> make_windows(int n_time, int window_length, int slide, int level)
{
  if (window_length < 2)
    throw ConfigError("window length must be >= 2");
  if (slide < 1 || slide > window_length)
    throw ConfigError("slide must be in [1, window_length], got " + std::to_string(slide));
  if (window_length > n_time)
    throw WindowTooLong("window of " + std::to_string(window_length) + " snapshots exceeds " +
                        std::to_string(n_time) + " snapshots of data");
  std::vector<WindowSpec> out;
  int start = 0;
  for (; start + window_length <= n_time; start += slide)
    out.push_back({start, window_length, level, static_cast<int>(out.size())});
  if (out.back().start_index + window_length < n_time)
    out.push_back({n_time - window_length, window_length, level, static_cast<int>(out.size())});
  return out;
}

Eigen::VectorXd demean_window(Eigen::MatrixXd& window)
{
  Eigen::VectorXd mean = window.rowwise().mean();
  window.colwise() -= mean;
  return mean;
}

Eigen::VectorXd window_weights(int length)
{
  if (length < 2)
    throw ConfigError("window weights need length >= 2");
  Eigen::VectorXd w(length);
  for (int i = 0; i < length; ++i) {
    const double s = std::sin(std::numbers::pi * i / (length - 1));
    w[i] = std::max(s * s, kWeightFloor);
  }
  // Exact mirror symmetry regardless of sin() rounding.
  for (int i = 0; i < length / 2; ++i)
    w[length - 1 - i] = w[i];
  return w;
}

std::vector<Eigen::VectorXd> overlap_weights(const std::vector<WindowSpec>& windows,
                                             const std::vector<bool>& alive, int n_time)
{
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n_time);
  std::vector<Eigen::VectorXd> out(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    if (w.start_index < 0 || w.start_index + w.length > n_time)
      throw ShapeMismatch("window " + std::to_string(k) + " extends past the data");
    if (!alive[k]) {
      out[k] = Eigen::VectorXd::Zero(w.length);
      continue;
    }
    out[k] = window_weights(w.length);
    total.segment(w.start_index, w.length) += out[k];
  }
  for (int i = 0; i < n_time; ++i)
    if (!(total[i] > 0.0)) {
      std::string culprit;
      for (std::size_t k = 0; k < windows.size(); ++k)
        if (!alive[k] && windows[k].start_index <= i &&
            i < windows[k].start_index + windows[k].length) {
          culprit = " (failed window " + std::to_string(k) + ")";
          break;
        }
      throw UncoveredTime("time index " + std::to_string(i) +
                          " is covered by no surviving window" + culprit);
    }
  for (std::size_t k = 0; k < windows.size(); ++k)
    if (alive[k])
      out[k].array() /= total.segment(windows[k].start_index, windows[k].length).array();
  return out;
}

Eigen::MatrixXd evaluate_window(const WindowFit& fit, const ModeSelection& selection,
                                bool include_background, const Eigen::VectorXd& times)
{
  const int start = fit.spec.start_index;
  const int len = fit.spec.length;
  const Eigen::Index n = fit.background.size();
  std::vector<Eigen::Index> modes;
  for (Eigen::Index j = 0; j < fit.rank(); ++j)
    if (selection(fit.spec.window_index, static_cast<int>(j)))
      modes.push_back(j);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, len);
  if (!modes.empty()) {
    const auto r = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd lhs(n, r);
    Eigen::MatrixXcd dyn(r, len);
    double bound = 0.0;
    for (Eigen::Index q = 0; q < r; ++q) {
      const Eigen::Index j = modes[static_cast<std::size_t>(q)];
      lhs.col(q) = fit.phi.col(j) * fit.amplitudes[j];
      double peak = 0.0;
      for (int i = 0; i < len; ++i) {
        dyn(q, i) = std::exp(fit.omega[j] * (times[start + i] - times[start]));
        peak = std::max(peak, std::abs(dyn(q, i)));
      }
      bound += std::abs(fit.amplitudes[j]) * fit.phi.col(j).norm() * peak;
    }
    const Eigen::MatrixXcd field = lhs * dyn;
    const double imag = field.imag().norm();
    if (imag > 1e-10 * bound * std::sqrt(static_cast<double>(len)) + 1e-300)
      throw Error("reconstruction is not real; the selection splits a conjugate pair in window " +
                  std::to_string(fit.spec.window_index));
    out = field.real();
  }
  if (include_background)
    out.colwise() += fit.background;
  return out;
}

Eigen::MatrixXd overlap_reconstruct(const std::vector<WindowFit>& fits,
                                    const ModeSelection& selection, bool include_background,
                                    const Eigen::VectorXd& times)
{
  const auto n_time = static_cast<int>(times.size());
  std::vector<WindowSpec> specs;
  std::vector<bool> alive;
  Eigen::Index n_space = -1;
  for (const auto& f : fits) {
    specs.push_back(f.spec);
    alive.push_back(!f.failed);
    if (!f.failed)
      n_space = f.background.size();
  }
  if (n_space < 0)
    throw UncoveredTime("no surviving window");
  const auto weights = overlap_weights(specs, alive, n_time);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_space, n_time);
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (!alive[k])
      continue;
    const Eigen::MatrixXd part = evaluate_window(fits[k], selection, include_background, times);
    out.middleCols(fits[k].spec.start_index, fits[k].spec.length) +=
        part * weights[k].asDiagonal();
  }
  return out;
}

WindowFit fit_window(const SnapshotMatrix& data, const WindowSpec& spec,
                     const WindowFitOptions& options)
{
  WindowFit fit;
  fit.spec = spec;
  Eigen::MatrixXd block = data.values().middleCols(spec.start_index, spec.length);
  const Eigen::VectorXd t = data.times().segment(spec.start_index, spec.length);
  const double raw_norm = block.norm();
  fit.background = demean_window(block);
  const double quiet = options.quiet_rms * std::sqrt(static_cast<double>(block.size()));
  if (block.norm() <= std::max(1e-13 * raw_norm, quiet) || block.norm() == 0.0) {
    // Nothing (worth fitting) left after demeaning: keep the background only.
    const int r = options.varpro.rank;
    const double dt = data.dt();
    fit.omega.resize(r);
    for (int q = 0; q < r / 2; ++q) {
      const double v = std::numbers::pi / dt * (q + 1) / (r / 2 + 1);
      fit.omega[2 * q] = {0.0, v};
      fit.omega[2 * q + 1] = {0.0, -v};
    }
    fit.phi = Eigen::MatrixXcd::Zero(block.rows(), r);
    fit.phi.row(0).setOnes();
    fit.amplitudes = Eigen::VectorXcd::Zero(r);
    fit.converged = true;
    return fit;
  }
  try {
    const bool projected = options.basis.size() > 0;
    const Eigen::MatrixXd coords =
        projected ? Eigen::MatrixXd(options.basis.transpose() * block) : block;
    const Eigen::VectorXcd init = init_eigenvalues(coords, t, options.varpro.rank);
    VarproResult res = varpro_solve(coords, t, init, options.varpro, options.constraint);
    fit.omega = std::move(res.omega);
    fit.amplitudes = std::move(res.amplitudes);
    if (projected) {
      // Residual against the full window: what the basis leaves out counts.
      fit.phi = options.basis * res.phi;
      const double total = block.squaredNorm();
      const double inside = coords.squaredNorm();
      const double fit_err = res.residual_rel * res.residual_rel * inside;
      fit.residual_rel = std::sqrt(std::max(0.0, fit_err + total - inside) / total);
    } else {
      fit.phi = std::move(res.phi);
      fit.residual_rel = res.residual_rel;
    }
    fit.iterations = res.iterations;
    fit.converged = res.converged;
  } catch (const RankDeficientWindow& e) {
    fit.failed = true;
    fit.failure = e.what();
  } catch (const NumericalBreakdown& e) {
    fit.failed = true;
    fit.failure = e.what();
  }
  return fit;
}

std::vector<WindowFit> fit_windows(const SnapshotMatrix& data,
                                   const std::vector<WindowSpec>& windows,
                                   const WindowFitOptions& options)
{
  std::vector<WindowFit> out(windows.size());
  parallel_for(static_cast<int>(windows.size()), options.threads, [&](int k) {
    out[static_cast<std::size_t>(k)] = fit_window(data, windows[static_cast<std::size_t>(k)], options);
  });
  return out;
}

}  // namespace mrcosts
