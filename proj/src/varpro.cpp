// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/varpro.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

namespace mrcosts {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;

// Singular values below this fraction of the largest are treated as zero
// when forming the pseudo-inverse of the exponential basis.
constexpr double kBasisRankTol = 1e-9;
// A pair whose own field exceeds the window by this factor is cancelling
// against another one rather than describing the data.
constexpr double kMaxPairGain = 10.0;
// Numerical rank tolerance for the delay-embedded initialisation.
constexpr double kInitRankTol = 1e-10;

double window_step(const VectorXd& times)
{
  const Index m = times.size();
  if (m < 2)
    return 1.0;
  return (times[m - 1] - times[0]) / static_cast<double>(m - 1);
}

void check_rank(int rank)
{
  if (rank < 2 || rank % 2 != 0)
    throw ConfigError("rank must be even and >= 2, got " + std::to_string(rank));
}

/// Columns 2q, 2q+1 hold exp(a t) cos(v t) and exp(a t) sin(v t).
MatrixXd pair_basis(const VectorXd& t, const VectorXd& p)
{
  const Index pairs = p.size() / 2;
  MatrixXd a(t.size(), 2 * pairs);
  for (Index q = 0; q < pairs; ++q) {
    const double re = p[2 * q];
    const double im = p[2 * q + 1];
    for (Index i = 0; i < t.size(); ++i) {
      const double env = std::exp(re * t[i]);
      a(i, 2 * q) = env * std::cos(im * t[i]);
      a(i, 2 * q + 1) = env * std::sin(im * t[i]);
    }
  }
  return a;
}

struct Projection {
  MatrixXd basis;    // m x r
  MatrixXd u;        // m x k
  MatrixXd v;        // r x k
  VectorXd s;        // k
  MatrixXd coeffs;   // r x n
  MatrixXd resid;    // m x n
  double objective;  // ||resid||_F^2
};

Projection project(const MatrixXd& y, const VectorXd& t, const VectorXd& p)
{
  Projection out;
  out.basis = pair_basis(t, p);
  Eigen::JacobiSVD<MatrixXd> svd(out.basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  Index k = 0;
  if (sv.size() > 0 && sv[0] > 0.0 && std::isfinite(sv[0]))
    while (k < sv.size() && sv[k] > kBasisRankTol * sv[0])
      ++k;
  out.u = svd.matrixU().leftCols(k);
  out.v = svd.matrixV().leftCols(k);
  out.s = sv.head(k);
  const MatrixXd uty = out.u.transpose() * y;
  out.coeffs = out.v * (out.s.cwiseInverse().asDiagonal() * uty);
  out.resid = y - out.u * uty;
  out.objective = out.resid.squaredNorm();
  if (!std::isfinite(sv.size() > 0 ? sv[0] : 0.0))
    out.objective = std::numeric_limits<double>::quiet_NaN();
  return out;
}

MatrixXd jacobian_from(const Projection& pr, const VectorXd& t, const VectorXd& p)
{
  const Index m = pr.resid.rows();
  const Index n = pr.resid.cols();
  const Index pairs = p.size() / 2;
  MatrixXd jac(m * n, p.size());
  // Transposed pseudo-inverse (A^+)^T = U S^-1 V^T, m x r.
  const MatrixXd pinv_t = pr.u * pr.s.cwiseInverse().asDiagonal() * pr.v.transpose();

  for (Index q = 0; q < pairs; ++q) {
    const VectorXd c0 = pr.basis.col(2 * q);
    const VectorXd c1 = pr.basis.col(2 * q + 1);
    for (int which = 0; which < 2; ++which) {
      VectorXd d0(m);
      VectorXd d1(m);
      if (which == 0) {  // d/da
        d0 = t.cwiseProduct(c0);
        d1 = t.cwiseProduct(c1);
      } else {  // d/dv
        d0 = -t.cwiseProduct(c1);
        d1 = t.cwiseProduct(c0);
      }
      MatrixXd dc = d0 * pr.coeffs.row(2 * q) + d1 * pr.coeffs.row(2 * q + 1);
      dc -= pr.u * (pr.u.transpose() * dc);
      dc += pinv_t.col(2 * q) * (d0.transpose() * pr.resid) +
            pinv_t.col(2 * q + 1) * (d1.transpose() * pr.resid);
      jac.col(2 * q + which) = -Eigen::Map<const VectorXd>(dc.data(), m * n);
    }
  }
  return jac;
}

/// Clamps Re into [-rho, rho] and folds Im into [0, pi/dt].
void clamp_params(VectorXd& p, double rho, double dt)
{
  const double nyquist = kPi / dt;
  for (Index q = 0; q < p.size() / 2; ++q) {
    p[2 * q] = std::clamp(p[2 * q], -rho, rho);
    double v = std::fmod(std::abs(p[2 * q + 1]), 2.0 * nyquist);
    if (v > nyquist)
      v = 2.0 * nyquist - v;
    p[2 * q + 1] = v;
  }
}

// Pads `pairs` with frequencies on a grid over (0, nyquist), each chosen to
// be as far as possible from the frequencies already present.
void pad_pairs(std::vector<std::pair<double, double>>& pairs, std::size_t wanted,
               double nyquist)
{
  const int grid = static_cast<int>(4 * wanted + 1);
  while (pairs.size() < wanted) {
    double best_v = 0.0;
    double best_gap = -1.0;
    for (int c = 1; c < grid; ++c) {
      const double v = nyquist * c / grid;
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& pr : pairs)
        gap = std::min(gap, std::abs(pr.second - v));
      if (gap > best_gap) {
        best_gap = gap;
        best_v = v;
      }
    }
    pairs.emplace_back(0.0, best_v);
  }
}

}  // namespace

namespace detail {

VectorXd pair_parameters(const Eigen::VectorXcd& omega)
{
  std::vector<cplx> w(omega.data(), omega.data() + omega.size());
  std::stable_sort(w.begin(), w.end(),
                   [](cplx x, cplx y) { return x.imag() > y.imag(); });
  const Index pairs = omega.size() / 2;
  VectorXd p(2 * pairs);
  for (Index q = 0; q < pairs; ++q) {
    p[2 * q] = w[static_cast<std::size_t>(q)].real();
    p[2 * q + 1] = std::abs(w[static_cast<std::size_t>(q)].imag());
  }
  return p;
}

VectorXd projected_residual(const MatrixXd& y, const VectorXd& t, const VectorXd& p)
{
  const Projection pr = project(y, t, p);
  return Eigen::Map<const VectorXd>(pr.resid.data(), pr.resid.size());
}

MatrixXd projected_jacobian(const MatrixXd& y, const VectorXd& t, const VectorXd& p)
{
  return jacobian_from(project(y, t, p), t, p);
}

}  // namespace detail

Eigen::VectorXcd init_eigenvalues(const MatrixXd& window, const VectorXd& times, int rank)
{
  check_rank(rank);
  const Index n = window.rows();
  const Index m = window.cols();
  if (times.size() != m)
    throw ShapeMismatch("window times do not match window length");
  if (m < rank + 1)
    throw RankDeficientWindow("window of " + std::to_string(m) +
                              " snapshots is too short for rank " + std::to_string(rank));
  if (!(window.norm() > 0.0))
    throw RankDeficientWindow("window has zero variance after demeaning");
  const double dt = window_step(times);

  MatrixXd u;
  MatrixXd v;
  VectorXd s;
  MatrixXd ahead;
  Index numerical_rank = 0;
  Index previous_rank = -1;
  for (Index d = 1;; ++d) {
    const Index cols = m - d + 1;
    MatrixXd h(n * d, cols);
    for (Index q = 0; q < d; ++q)
      h.middleRows(q * n, n) = window.middleCols(q, cols);
    Eigen::BDCSVD<MatrixXd> svd(h.leftCols(cols - 1), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    Index rk = 0;
    while (rk < sv.size() && sv[rk] > kInitRankTol * sv[0])
      ++rk;
    if (rk <= previous_rank)
      break;  // embedding saturated; keep the previous depth
    u = svd.matrixU();
    v = svd.matrixV();
    s = sv;
    ahead = h.rightCols(cols - 1);
    numerical_rank = rk;
    previous_rank = rk;
    if (rk >= rank || cols - 2 < rank + 1)
      break;
  }

  const Index k = std::min<Index>(numerical_rank, rank);
  if (k < 2)
    throw RankDeficientWindow("numerical rank " + std::to_string(numerical_rank) +
                              " leaves no resolvable oscillation");

  const MatrixXd uk = u.leftCols(k);
  const MatrixXd propagator =
      uk.transpose() * ahead * v.leftCols(k) * s.head(k).cwiseInverse().asDiagonal();
  const Eigen::VectorXcd mu = Eigen::EigenSolver<MatrixXd>(propagator, false).eigenvalues();

  const double nyquist = kPi / dt;
  std::vector<std::pair<double, double>> pairs;
  std::vector<std::pair<double, bool>> reals;  // (Re omega, mu < 0)
  for (Index i = 0; i < mu.size(); ++i) {
    const double mag = std::max(std::abs(mu[i]), std::numeric_limits<double>::min());
    if (std::abs(mu[i].imag()) > 1e-12 * mag) {
      if (mu[i].imag() > 0.0)
        pairs.emplace_back(std::log(mag) / dt, std::arg(mu[i]) / dt);
    } else {
      reals.emplace_back(std::log(mag) / dt, mu[i].real() < 0.0);
    }
  }
  // Two real eigenvalues become one slow (or Nyquist) pair centred on them.
  // A zero frequency is fine: the sine column vanishes and the pair acts as
  // a single real exponential (typically the offset left by demeaning).
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    const double re = 0.5 * (reals[i].first + reals[i + 1].first);
    const bool alternating = reals[i].second || reals[i + 1].second;
    const double im =
        alternating ? 0.95 * nyquist : 0.5 * std::abs(reals[i + 1].first - reals[i].first);
    pairs.emplace_back(re, im);
  }
  if (reals.size() % 2 == 1)
    pairs.emplace_back(reals.back().first, 0.0);

  const auto wanted = static_cast<std::size_t>(rank / 2);
  if (pairs.size() > wanted)
    pairs.resize(wanted);
  pad_pairs(pairs, wanted, nyquist);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& x, const auto& y) { return x.second < y.second; });

  Eigen::VectorXcd omega(rank);
  for (std::size_t q = 0; q < wanted; ++q) {
    omega[static_cast<Index>(2 * q)] = cplx(pairs[q].first, pairs[q].second);
    omega[static_cast<Index>(2 * q + 1)] = cplx(pairs[q].first, -pairs[q].second);
  }
  return omega;
}

VarproResult varpro_solve(const MatrixXd& window, const VectorXd& times,
                          const Eigen::VectorXcd& init_omega,
                          const VarproSettings& settings,
                          const EigConstraint& constraint)
{
  check_rank(static_cast<int>(init_omega.size()));
  if (times.size() != window.cols())
    throw ShapeMismatch("window times do not match window length");
  if (!(constraint.rho >= 0.0) || !std::isfinite(constraint.rho))
    throw ConfigError("rho must be finite and >= 0");

  const Index m = window.cols();
  const Index n = window.rows();
  const double dt = window_step(times);
  const VectorXd t = times.array() - times[0];
  const double duration = std::max(t[m - 1], dt);
  const MatrixXd y = window.transpose();
  const double y_norm2 = y.squaredNorm();

  VectorXd params = detail::pair_parameters(init_omega);
  clamp_params(params, constraint.rho, dt);
  Projection pr = project(y, t, params);
  if (!std::isfinite(pr.objective))
    throw NumericalBreakdown("non-finite residual at the initial eigenvalues");

  VarproResult out;
  out.accepted_objective.push_back(pr.objective);
  double lambda = settings.lm_lambda0;
  int it = 0;
  for (; it < settings.max_iters; ++it) {
    if (y_norm2 == 0.0 || pr.objective == 0.0) {
      out.converged = true;
      break;
    }
    const MatrixXd jac = jacobian_from(pr, t, params);
    const VectorXd rvec = Eigen::Map<const VectorXd>(pr.resid.data(), pr.resid.size());
    const VectorXd grad = jac.transpose() * rvec;
    if (grad.cwiseAbs().maxCoeff() * duration / y_norm2 < settings.tol_grad) {
      out.converged = true;
      break;
    }
    const MatrixXd jtj = jac.transpose() * jac;
    VectorXd scale = jtj.diagonal();
    const double floor = 1e-12 * std::max(scale.maxCoeff(), std::numeric_limits<double>::min());
    scale = scale.cwiseMax(floor);

    bool accepted = false;
    bool any_finite = false;
    VectorXd trial;
    Projection trial_pr;
    while (lambda < 1e20) {
      MatrixXd damped = jtj;
      damped.diagonal() += lambda * scale;
      const VectorXd step = damped.ldlt().solve(-grad);
      trial = params + step;
      clamp_params(trial, constraint.rho, dt);
      trial_pr = project(y, t, trial);
      if (std::isfinite(trial_pr.objective)) {
        any_finite = true;
        if (trial_pr.objective < pr.objective) {
          accepted = true;
          lambda = std::max(lambda / 10.0, 1e-15);
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      if (!any_finite)
        throw NumericalBreakdown("residual stayed non-finite under maximal damping");
      out.converged = true;  // no descent direction left
      break;
    }
    const double moved = (trial - params).cwiseAbs().maxCoeff() * duration;
    const bool stalled = pr.objective - trial_pr.objective < settings.tol_stall * pr.objective;
    params = std::move(trial);
    pr = std::move(trial_pr);
    out.accepted_objective.push_back(pr.objective);
    if (moved < settings.tol_step || stalled) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  const Index pairs = params.size() / 2;
  std::vector<Index> order(static_cast<std::size_t>(pairs));
  for (Index q = 0; q < pairs; ++q)
    order[static_cast<std::size_t>(q)] = q;
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index z) {
    return params[2 * x + 1] < params[2 * z + 1];
  });

  // Pairs that coalesce only mimic t^k e^{wt} terms through huge cancelling
  // coefficients, and a pair meeting its own mirror at 0 or Nyquist does the
  // same with its sine column. Such fits are unidentifiable: merge pairs that
  // are within a hundredth of the frequency resolution, then keep merging the
  // closest ones while any pair's field dwarfs the window itself.
  const double merge_tol = 1e-2 * 2.0 * kPi / duration;
  const double nyquist = kPi / dt;
  std::vector<Index> rep(static_cast<std::size_t>(pairs), -1);
  std::vector<Index> keep;
  for (Index q : order) {
    for (Index k : keep)
      if (std::abs(params[2 * q] - params[2 * k]) <= merge_tol &&
          std::abs(params[2 * q + 1] - params[2 * k + 1]) <= merge_tol) {
        rep[static_cast<std::size_t>(q)] = k;
        break;
      }
    if (rep[static_cast<std::size_t>(q)] < 0)
      keep.push_back(q);
  }
  const auto mirror_gap = [&](Index k) {
    const double v = params[2 * k + 1];
    if (v == 0.0 || v == nyquist)
      return std::numeric_limits<double>::infinity();
    return 2.0 * std::min(v, nyquist - v);
  };
  bool changed = static_cast<Index>(keep.size()) < pairs;
  for (Index k : keep)
    if (mirror_gap(k) <= 2.0 * merge_tol) {
      params[2 * k + 1] = params[2 * k + 1] < 0.5 * nyquist ? 0.0 : nyquist;
      changed = true;
    }

  const auto reproject = [&]() {
    VectorXd reduced(2 * static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
      reduced.segment<2>(2 * static_cast<Index>(i)) = params.segment<2>(2 * keep[i]);
    return project(y, t, reduced);
  };
  Projection cur = reproject();
  const double y_norm = std::sqrt(y_norm2);
  while (y_norm > 0.0 && keep.size() > 1) {
    double loudest = 0.0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto c = static_cast<Index>(2 * i);
      loudest = std::max(loudest, (cur.basis.middleCols<2>(c) * cur.coeffs.middleRows<2>(c)).norm());
    }
    if (loudest <= kMaxPairGain * y_norm)
      break;
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;  // bj == bi: snap onto the mirror
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (mirror_gap(keep[i]) < best) {
        best = mirror_gap(keep[i]);
        bi = bj = i;
      }
      for (std::size_t j = i + 1; j < keep.size(); ++j) {
        const double d = std::hypot(params[2 * keep[i]] - params[2 * keep[j]],
                                    params[2 * keep[i] + 1] - params[2 * keep[j] + 1]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!std::isfinite(best))
      break;
    if (bi == bj) {
      double& v = params[2 * keep[bi] + 1];
      v = v < 0.5 * nyquist ? 0.0 : nyquist;
    } else {
      rep[static_cast<std::size_t>(keep[bj])] = keep[bi];
      keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    changed = true;
    cur = reproject();
  }

  MatrixXd coeffs = pr.coeffs;
  if (changed) {
    // Resolve chains so every merged pair points at a surviving one.
    for (Index q = 0; q < pairs; ++q) {
      Index k = rep[static_cast<std::size_t>(q)];
      while (k >= 0 && rep[static_cast<std::size_t>(k)] >= 0)
        k = rep[static_cast<std::size_t>(k)];
      if (k >= 0)
        params.segment<2>(2 * q) = params.segment<2>(2 * k);
    }
    coeffs.setZero();
    for (std::size_t i = 0; i < keep.size(); ++i)
      coeffs.middleRows<2>(2 * keep[i]) = cur.coeffs.middleRows<2>(2 * static_cast<Index>(i));
    pr.objective = cur.objective;
  }
  out.residual_rel = y_norm2 > 0.0 ? std::sqrt(pr.objective / y_norm2) : 0.0;

  const Index r = 2 * pairs;
  out.omega.resize(r);
  out.phi.resize(n, r);
  out.amplitudes.resize(r);
  for (Index slot = 0; slot < pairs; ++slot) {
    const Index q = order[static_cast<std::size_t>(slot)];
    const cplx w(params[2 * q], params[2 * q + 1]);
    // c_cos cos + c_sin sin = u e^{i v t} + conj(u) e^{-i v t}, u = (c_cos - i c_sin) / 2
    Eigen::VectorXcd mode(n);
    for (Index i = 0; i < n; ++i)
      mode[i] = 0.5 * cplx(coeffs(2 * q, i), -coeffs(2 * q + 1, i));
    const double amp = mode.norm();
    if (amp > 0.0) {
      mode /= amp;
    } else {
      mode.setZero();
      mode[0] = 1.0;
    }
    out.omega[2 * slot] = w;
    out.omega[2 * slot + 1] = std::conj(w);
    out.phi.col(2 * slot) = mode;
    out.phi.col(2 * slot + 1) = mode.conjugate();
    out.amplitudes[2 * slot] = amp;
    out.amplitudes[2 * slot + 1] = amp;
  }
  return out;
}

double jacobian_check(const MatrixXd& window, const VectorXd& times,
                      const Eigen::VectorXcd& omega)
{
  const MatrixXd y = window.transpose();
  const VectorXd t = times.array() - times[0];
  const VectorXd p = detail::pair_parameters(omega);
  const MatrixXd analytic = detail::projected_jacobian(y, t, p);

  double worst = 0.0;
  for (Index c = 0; c < p.size(); ++c) {
    const Index q = c / 2;
    const double h = 1e-6 * (1.0 + std::hypot(p[2 * q], p[2 * q + 1]));
    VectorXd hi = p;
    VectorXd lo = p;
    hi[c] += h;
    lo[c] -= h;
    const VectorXd fd = (detail::projected_residual(y, t, hi) -
                         detail::projected_residual(y, t, lo)) / (2.0 * h);
    const double scale = fd.cwiseAbs().maxCoeff();
    if (!(scale > 1e-10))
      continue;
    worst = std::max(worst, (analytic.col(c) - fd).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace mrcosts
