// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mrcosts {

/// Box constraint |Re(omega)| <= rho, in 1/time.
struct EigConstraint {
  double rho = 0.0;
};

/// Levenberg-Marquardt settings for the variable projection fit.
struct VarproSettings {
  int rank = 8;  // even, < window length
  int max_iters = 100;
  double tol_grad = 1e-8;
  double tol_step = 1e-10;
  /// Stop once an accepted step lowers the objective by less than this
  /// fraction: noise-dominated windows otherwise creep along flat valleys.
  double tol_stall = 1e-6;
  double lm_lambda0 = 1e-2;
};

struct VarproResult {
  Eigen::VectorXcd omega;       // r entries, conjugate pairs adjacent
  Eigen::MatrixXcd phi;         // n_space x r, unit columns
  Eigen::VectorXcd amplitudes;  // r entries
  double residual_rel = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective value of every accepted iterate, starting with the initial one.
  std::vector<double> accepted_objective;
};

/// Initial eigenvalues from an exact one-step least-squares propagator.
///
/// The demeaned window is delay-embedded until its numerical rank stops
/// growing or reaches `rank`; the propagator is the SVD-projected
/// regression of successive embedded snapshots. Eigenvalues are mapped
/// through log(mu)/dt and returned as rank/2 conjugate pairs sorted by
/// increasing |Im|. Missing pairs (embedded rank < rank) are padded with
/// frequencies spread over the Nyquist band.
///
/// Throws RankDeficientWindow when the window carries no resolvable
/// dynamics (embedded numerical rank < 2).
Eigen::VectorXcd init_eigenvalues(const Eigen::MatrixXd& window,
                                  const Eigen::VectorXd& times, int rank);

/// Fits x(t) ~ sum_j phi_j exp(omega_j (t - t_0)) b_j to a demeaned window.
///
/// Only omega is iterated; the linear coefficients are eliminated by least
/// squares at every step. Re(omega) is clamped into [-rho, rho] after each
/// step. Throws NumericalBreakdown when no finite residual can be produced.
VarproResult varpro_solve(const Eigen::MatrixXd& window, const Eigen::VectorXd& times,
                          const Eigen::VectorXcd& init_omega,
                          const VarproSettings& settings,
                          const EigConstraint& constraint);

/// Max column-relative deviation between the analytic residual Jacobian
/// and central finite differences (step 1e-6 * (1 + |omega|)). Columns with
/// norm <= 1e-10 are skipped; returns 0 when nothing is compared.
double jacobian_check(const Eigen::MatrixXd& window, const Eigen::VectorXd& times,
                      const Eigen::VectorXcd& omega);

namespace detail {

/// Real parameter vector [a_0, v_0, a_1, v_1, ...] of rank/2 pairs.
Eigen::VectorXd pair_parameters(const Eigen::VectorXcd& omega);

/// Residual Y - A A^+ Y, flattened column-major (time fastest).
Eigen::VectorXd projected_residual(const Eigen::MatrixXd& data_tm,
                                   const Eigen::VectorXd& t_rel,
                                   const Eigen::VectorXd& params);

/// Analytic Jacobian of projected_residual, one column per parameter.
Eigen::MatrixXd projected_jacobian(const Eigen::MatrixXd& data_tm,
                                   const Eigen::VectorXd& t_rel,
                                   const Eigen::VectorXd& params);

}  // namespace detail

}  // namespace mrcosts
