// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/snapshot.hpp"

#include "mrcosts/error.hpp"

#include <cmath>
#include <utility>

namespace mrcosts {

SnapshotMatrix::SnapshotMatrix(Eigen::MatrixXd values, Eigen::VectorXd times,
                               std::vector<std::string> space_labels)
    : values_(std::move(values)), times_(std::move(times)),
      labels_(std::move(space_labels))
{
  if (values_.rows() < 1 || values_.cols() < 2)
    throw ShapeMismatch("need n_space >= 1 and n_time >= 2, got " +
                        std::to_string(values_.rows()) + "x" +
                        std::to_string(values_.cols()));
  if (times_.size() != values_.cols())
    throw ShapeMismatch("times has " + std::to_string(times_.size()) +
                        " entries for " + std::to_string(values_.cols()) +
                        " snapshots");
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != values_.rows())
    throw ShapeMismatch("space_labels has " + std::to_string(labels_.size()) +
                        " entries for " + std::to_string(values_.rows()) + " rows");

  for (Eigen::Index j = 0; j < times_.size(); ++j)
    if (!std::isfinite(times_[j]))
      throw NonFiniteValue("time at snapshot " + std::to_string(j));
  for (Eigen::Index j = 0; j < values_.cols(); ++j)
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
      if (!std::isfinite(values_(i, j)))
        throw NonFiniteValue("value at space " + std::to_string(i) +
                             ", snapshot " + std::to_string(j));

  const Eigen::Index n = times_.size();
  dt_ = (times_[n - 1] - times_[0]) / static_cast<double>(n - 1);
  if (!(dt_ > 0.0))
    throw NonUniformTimeGrid("times are not increasing");
  for (Eigen::Index j = 1; j < n; ++j) {
    const double step = times_[j] - times_[j - 1];
    if (!(step > 0.0) || std::abs(step - dt_) > kTimeGridRelTol * dt_)
      throw NonUniformTimeGrid("spacing breaks at snapshot " + std::to_string(j));
  }
}

SnapshotMatrix SnapshotMatrix::uniform(Eigen::MatrixXd values, double t0, double dt)
{
  Eigen::VectorXd t(values.cols());
  for (Eigen::Index j = 0; j < t.size(); ++j)
    t[j] = t0 + static_cast<double>(j) * dt;
  return SnapshotMatrix(std::move(values), std::move(t));
}

bool operator==(const SnapshotMatrix& a, const SnapshotMatrix& b)
{
  return a.values_.rows() == b.values_.rows() &&
         a.values_.cols() == b.values_.cols() && a.values_ == b.values_ &&
         a.times_ == b.times_ && a.labels_ == b.labels_;
}

}  // namespace mrcosts
