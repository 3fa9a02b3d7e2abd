// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mrcosts {

/// Real space x time data on a uniform time grid.
///
/// Columns are snapshots. Multi-variable data is stacked along the space
/// axis; `space_labels` (optional) names each row.
class SnapshotMatrix {
 public:
  SnapshotMatrix() = default;

  /// Validates shape, finiteness and uniform spacing of `times`.
  /// Throws ShapeMismatch, NonFiniteValue or NonUniformTimeGrid.
  SnapshotMatrix(Eigen::MatrixXd values, Eigen::VectorXd times,
                 std::vector<std::string> space_labels = {});

  /// Builds t_i = t0 + i * dt.
  static SnapshotMatrix uniform(Eigen::MatrixXd values, double t0, double dt);

  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::VectorXd& times() const { return times_; }
  const std::vector<std::string>& space_labels() const { return labels_; }

  Eigen::Index n_space() const { return values_.rows(); }
  Eigen::Index n_time() const { return values_.cols(); }
  double dt() const { return dt_; }

  friend bool operator==(const SnapshotMatrix& a, const SnapshotMatrix& b);

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd times_;
  std::vector<std::string> labels_;
  double dt_ = 0.0;
};

/// Relative tolerance on the spacing of a uniform time grid.
inline constexpr double kTimeGridRelTol = 1e-9;

}  // namespace mrcosts
