// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/clustering.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mrcosts {

namespace {

std::size_t distinct_count(std::span<const double> x)
{
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// Nearest centroid; ties go to the lower index. `sorted` must be ascending.
int nearest(const std::vector<double>& sorted, double x)
{
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.begin())
    return 0;
  if (it == sorted.end())
    return static_cast<int>(sorted.size()) - 1;
  const auto hi = static_cast<int>(it - sorted.begin());
  return (x - sorted[static_cast<std::size_t>(hi - 1)] <= *it - x) ? hi - 1 : hi;
}

struct Run {
  std::vector<double> centroids;  // ascending
  std::vector<int> labels;
  double inertia = 0.0;
};

Run lloyd(std::span<const double> x, int k, std::mt19937_64& rng)
{
  const std::size_t n = x.size();
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(k));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  c.push_back(x[pick(rng)]);
  std::vector<double> d2(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(c.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double ci : c)
        best = std::min(best, (x[i] - ci) * (x[i] - ci));
      d2[i] = best;
      total += best;
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        target -= d2[chosen];
        if (target < 0.0 && d2[chosen] > 0.0)
          break;
      }
      if (d2[chosen] == 0.0)  // rounding left us on an existing centre
        chosen = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    } else {
      chosen = pick(rng);
    }
    c.push_back(x[chosen]);
  }
  std::sort(c.begin(), c.end());

  Run run;
  run.labels.assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = nearest(c, x[i]);
      if (l != run.labels[i]) {
        run.labels[i] = l;
        changed = true;
      }
    }
    if (!changed)
      break;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> cnt(static_cast<std::size_t>(k), 0);
    std::vector<double> lo(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(k), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      const auto l = static_cast<std::size_t>(run.labels[i]);
      sum[l] += x[i];
      ++cnt[l];
      lo[l] = std::min(lo[l], x[i]);
      hi[l] = std::max(hi[l], x[i]);
    }
    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < c.size(); ++j) {
      // Clamped: a rounded mean of near-equal values can leave its members'
      // range and collide with the neighbouring centre.
      if (cnt[j] > 0)
        c[j] = std::clamp(sum[j] / static_cast<double>(cnt[j]), lo[j], hi[j]);
      else
        empty.push_back(j);
    }
    // Empty cluster: move it onto the point farthest from every centre.
    // Near-duplicate data can round a mean onto a data value, so distances
    // are taken to all current centres, never only the point's own.
    for (std::size_t j : empty) {
      double worst = 0.0;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < c.size(); ++q)
          if (cnt[q] > 0)  // still-empty centres are stale
            d = std::min(d, std::abs(x[i] - c[q]));
        if (d > worst) {
          worst = d;
          far = i;
        }
      }
      if (far == n)
        break;
      c[j] = x[far];
      cnt[j] = 1;  // now a live centre for the next empty one
    }
    const bool reseeded = !empty.empty();
    // Means of ordered 1-D intervals stay ordered; only a reseed can break
    // the order that nearest() relies on.
    if (reseeded) {
      std::sort(c.begin(), c.end());
      std::fill(run.labels.begin(), run.labels.end(), -1);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    run.labels[i] = nearest(c, x[i]);
  run.centroids = c;
  std::vector<bool> used(c.size(), false);
  for (int l : run.labels)
    used[static_cast<std::size_t>(l)] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    run.inertia = std::numeric_limits<double>::infinity();  // unusable run
    return run;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c[static_cast<std::size_t>(run.labels[i])];
    run.inertia += d * d;
  }
  return run;
}

}  // namespace

std::string_view to_string(OmegaTransform t)
{
  switch (t) {
    case OmegaTransform::abs_imag:
      return "abs_imag";
    case OmegaTransform::abs_imag_sq:
      return "abs_imag_sq";
    case OmegaTransform::log10_abs_imag:
      return "log10_abs_imag";
  }
  return "abs_imag";
}

OmegaTransform parse_transform(std::string_view name)
{
  if (name == "abs_imag")
    return OmegaTransform::abs_imag;
  if (name == "abs_imag_sq")
    return OmegaTransform::abs_imag_sq;
  if (name == "log10_abs_imag")
    return OmegaTransform::log10_abs_imag;
  throw ConfigError("unknown omega transform '" + std::string(name) + "'");
}

double transform_value(std::complex<double> omega, OmegaTransform t)
{
  const double v = std::abs(omega.imag());
  switch (t) {
    case OmegaTransform::abs_imag:
      return v;
    case OmegaTransform::abs_imag_sq:
      return v * v;
    case OmegaTransform::log10_abs_imag:
      return std::log10(v);
  }
  return v;
}

double inverse_transform(double feature, OmegaTransform t)
{
  switch (t) {
    case OmegaTransform::abs_imag:
      return feature;
    case OmegaTransform::abs_imag_sq:
      return std::sqrt(std::max(feature, 0.0));
    case OmegaTransform::log10_abs_imag:
      return std::pow(10.0, feature);
  }
  return feature;
}

OmegaFeatures transform_omega(const Eigen::VectorXcd& omegas, OmegaTransform kind,
                              std::span<const SourceIndex> sources)
{
  OmegaFeatures out;
  out.transform = kind;
  const auto n = static_cast<std::size_t>(omegas.size());
  if (!sources.empty() && sources.size() != n)
    throw ShapeMismatch("sources do not match the eigenvalue count");
  auto source_of = [&](std::size_t j) {
    return sources.empty() ? SourceIndex{0, 0, static_cast<int>(j)} : sources[j];
  };

  double floor = 0.0;
  if (kind == OmegaTransform::log10_abs_imag && n > 0) {
    std::vector<double> mags(n);
    for (std::size_t j = 0; j < n; ++j)
      mags[j] = std::abs(omegas[static_cast<Eigen::Index>(j)].imag());
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(n / 2), mags.end());
    floor = kNearZeroRel * mags[n / 2];
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto w = omegas[static_cast<Eigen::Index>(j)];
    if (kind == OmegaTransform::log10_abs_imag &&
        (std::abs(w.imag()) <= floor || w.imag() == 0.0)) {
      out.near_zero.push_back(source_of(j));
      continue;
    }
    out.values.push_back(transform_value(w, kind));
    out.source.push_back(source_of(j));
  }
  return out;
}

std::vector<double> silhouette_samples(std::span<const double> x, std::span<const int> labels)
{
  if (x.size() != labels.size())
    throw ShapeMismatch("labels do not match the features");
  int k = 0;
  for (int l : labels) {
    if (l < 0)
      throw DegeneratePartition("negative label");
    k = std::max(k, l + 1);
  }
  if (k < 2)
    throw DegeneratePartition("silhouette needs at least two clusters");

  // Sorted members and prefix sums per cluster for O(log n) distance sums.
  std::vector<std::vector<double>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < x.size(); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(x[i]);
  std::vector<std::vector<double>> prefix(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    auto& m = members[static_cast<std::size_t>(c)];
    if (m.empty())
      throw DegeneratePartition("cluster " + std::to_string(c) + " is empty");
    std::sort(m.begin(), m.end());
    auto& p = prefix[static_cast<std::size_t>(c)];
    p.resize(m.size() + 1, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
      p[i + 1] = p[i] + m[i];
  }
  auto distance_sum = [&](int c, double v) {
    const auto& m = members[static_cast<std::size_t>(c)];
    const auto& p = prefix[static_cast<std::size_t>(c)];
    const auto below = static_cast<std::size_t>(std::upper_bound(m.begin(), m.end(), v) - m.begin());
    const double lo = v * static_cast<double>(below) - p[below];
    const double hi = (p[m.size()] - p[below]) - v * static_cast<double>(m.size() - below);
    return lo + hi;
  };

  std::vector<double> s(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int own = labels[i];
    const auto own_n = members[static_cast<std::size_t>(own)].size();
    if (own_n == 1)
      continue;
    const double a = distance_sum(own, x[i]) / static_cast<double>(own_n - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own)
        b = std::min(b, distance_sum(c, x[i]) /
                            static_cast<double>(members[static_cast<std::size_t>(c)].size()));
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? std::clamp((b - a) / denom, -1.0, 1.0) : 0.0;
  }
  return s;
}

double silhouette(std::span<const double> x, std::span<const int> labels)
{
  const auto s = silhouette_samples(x, labels);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

ClusterResult kmeans(std::span<const double> x, int k, std::uint64_t seed, int restarts)
{
  if (k < 1)
    throw TooFewPoints("K must be >= 1");
  if (x.empty() || distinct_count(x) < static_cast<std::size_t>(k))
    throw TooFewPoints("K=" + std::to_string(k) + " exceeds the " +
                       std::to_string(distinct_count(x)) + " distinct feature values");
  std::mt19937_64 rng(seed);
  Run best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Run run = lloyd(x, k, rng);
    if (run.inertia < best.inertia)
      best = std::move(run);
  }
  if (best.labels.empty())
    throw DegeneratePartition("every k-means run for K=" + std::to_string(k) +
                              " left a cluster empty");

  ClusterResult out;
  out.labels = std::move(best.labels);
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  out.seed = seed;
  out.cluster_silhouette.assign(static_cast<std::size_t>(k), 0.0);
  if (k >= 2) {
    const auto s = silhouette_samples(x, out.labels);
    std::vector<std::size_t> cnt(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.cluster_silhouette[static_cast<std::size_t>(out.labels[i])] += s[i];
      ++cnt[static_cast<std::size_t>(out.labels[i])];
      out.silhouette += s[i];
    }
    out.silhouette /= static_cast<double>(s.size());
    for (std::size_t c = 0; c < cnt.size(); ++c)
      if (cnt[c] > 0)
        out.cluster_silhouette[c] /= static_cast<double>(cnt[c]);
  }
  return out;
}

int resolvable_count(std::span<const double> x)
{
  if (x.empty())
    return 0;
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double tol = kFeatureResolution * std::max(std::abs(v.front()), std::abs(v.back()));
  int groups = 1;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] - v[i - 1] > tol)
      ++groups;
  return groups;
}

SweepResult sweep_clusters(std::span<const double> x, int k_min, int k_max, std::uint64_t seed,
                           int restarts)
{
  if (k_min < 2)
    throw ConfigError("k_min must be >= 2");
  if (k_max < k_min)
    throw ConfigError("k_max must be >= k_min");
  const int cap = std::min(k_max, resolvable_count(x));
  if (cap < k_min)
    throw TooFewPoints("only " + std::to_string(resolvable_count(x)) +
                       " distinguishable feature values for K >= " + std::to_string(k_min));
  SweepResult out;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= cap; ++k) {
    ClusterResult res;
    try {
      res = kmeans(x, k, seed, restarts);
    } catch (const DegeneratePartition&) {
      continue;  // K not realisable on these values; no score
    }
    out.scores.emplace_back(k, res.silhouette);
    if (res.silhouette > best_score) {
      best_score = res.silhouette;
      out.best_k = k;
      out.best = std::move(res);
    }
  }
  if (out.scores.empty())
    throw TooFewPoints("no K in [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                       "] gives a partition without empty clusters");
  out.low_confidence = best_score < kLowConfidenceSilhouette;
  return out;
}

}  // namespace mrcosts
