// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "oracle.hpp"

#include "mrcosts/clustering.hpp"
#include "mrcosts/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace mrcosts;

namespace {

// n samples from each of the given centres with relative spread `rel`.
std::vector<double> clumps(const std::vector<double>& centres, double rel, int n,
                           std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<double> x;
  for (double c : centres) {
    std::normal_distribution<double> normal(c, rel * c);
    for (int i = 0; i < n; ++i)
      x.push_back(normal(rng));
  }
  std::shuffle(x.begin(), x.end(), rng);
  return x;
}

std::vector<double> log10_all(const std::vector<double>& x)
{
  std::vector<double> out;
  for (double v : x)
    out.push_back(std::log10(v));
  return out;
}

}  // namespace

TEST_SUITE("transform")
{
  TEST_CASE("conjugates coincide under abs_imag")
  {
    const Eigen::Vector2cd w(std::complex<double>(0.0, 2.0), std::complex<double>(0.0, -2.0));
    const auto f = transform_omega(w, OmegaTransform::abs_imag);
    CHECK(f.values == std::vector<double>{2.0, 2.0});
  }

  TEST_CASE("squared imaginary part")
  {
    CHECK(transform_value({3.0, 4.0}, OmegaTransform::abs_imag_sq) == 16.0);
    CHECK(inverse_transform(16.0, OmegaTransform::abs_imag_sq) == 4.0);
  }

  TEST_CASE("log transform flags near-zero entries")
  {
    const Eigen::Vector3cd w(std::complex<double>(0.0, 1e-20), std::complex<double>(0.0, 1.0),
                            std::complex<double>(0.0, 10.0));
    const auto f = transform_omega(w, OmegaTransform::log10_abs_imag);
    CHECK(f.values.size() == 2);
    REQUIRE(f.near_zero.size() == 1);
    CHECK(f.near_zero[0].mode == 0);
    CHECK(f.values[1] == doctest::Approx(1.0));
    CHECK(inverse_transform(1.0, OmegaTransform::log10_abs_imag) == doctest::Approx(10.0));
  }

  TEST_CASE("names")
  {
    for (auto t : {OmegaTransform::abs_imag, OmegaTransform::abs_imag_sq,
                   OmegaTransform::log10_abs_imag})
      CHECK(parse_transform(to_string(t)) == t);
    CHECK_THROWS_AS(parse_transform("real"), ConfigError);
  }
}

TEST_SUITE("kmeans")
{
  TEST_CASE("two separated groups")
  {
    const std::vector<double> x{1, 1, 1, 10, 10, 10};
    const auto r = kmeans(x, 2, 0);
    CHECK(r.centroids == std::vector<double>{1.0, 10.0});
    CHECK(r.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
  }

  TEST_CASE("as many clusters as points")
  {
    const std::vector<double> x{3, 1, 2};
    const auto r = kmeans(x, 3, 1);
    CHECK(r.labels == std::vector<int>{2, 0, 1});
    CHECK(r.silhouette == 0.0);
  }

  TEST_CASE("three log-spaced clumps are recovered within 2 percent")
  {
    const auto x = clumps({0.1, 1.0, 10.0}, 0.01, 60, 5);
    const auto r = kmeans(log10_all(x), 3, 9);
    REQUIRE(r.centroids.size() == 3);
    const double truth[3] = {0.1, 1.0, 10.0};
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(std::pow(10.0, r.centroids[c]) / truth[c] - 1.0) < 0.02);
  }

  TEST_CASE("too few distinct values")
  {
    const std::vector<double> x{2, 2, 2, 2};
    CHECK_THROWS_AS(kmeans(x, 2, 0), TooFewPoints);
  }

  TEST_CASE("no empty clusters on heavily duplicated data")
  {
    // Few distinct values repeated many times, K up to the distinct count:
    // empty clusters appear during Lloyd and must be reseeded apart.
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
      const int distinct = std::uniform_int_distribution<int>(3, 12)(rng);
      std::vector<double> levels(static_cast<std::size_t>(distinct));
      for (auto& v : levels)
        v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      std::vector<double> x(300);
      std::geometric_distribution<int> skew(0.35);
      for (auto& v : x)
        v = levels[static_cast<std::size_t>(std::min(skew(rng), distinct - 1))];
      std::vector<double> u = x;
      std::sort(u.begin(), u.end());
      const auto present = std::unique(u.begin(), u.end()) - u.begin();
      for (int k = 2; k <= present; ++k) {
        ClusterResult r;
        REQUIRE_NOTHROW(r = kmeans(x, k, static_cast<std::uint64_t>(trial)));
        std::vector<int> seen(static_cast<std::size_t>(k), 0);
        for (int l : r.labels)
          ++seen[static_cast<std::size_t>(l)];
        for (int s : seen)
          CHECK(s > 0);
      }
    }
  }

  TEST_CASE("clumps a few ulps wide still give K non-empty clusters")
  {
    // Noiseless fits repeat one frequency up to rounding: cluster means then
    // round onto data values.
    std::mt19937_64 rng(8);
    std::vector<double> x;
    for (double centre : {-1.5028501273058672, -0.80388012296984868, 0.1}) {
      std::vector<double> near{centre};
      for (int u = 0; u < 25; ++u)
        near.push_back(std::nextafter(near.back(), 10.0));
      std::uniform_int_distribution<std::size_t> pick(0, near.size() - 1);
      for (int i = 0; i < 400; ++i)
        x.push_back(near[pick(rng)]);
    }
    for (int k = 2; k <= 16; ++k) {
      ClusterResult r;
      REQUIRE_NOTHROW(r = kmeans(x, k, 7));
      std::vector<int> seen(static_cast<std::size_t>(k), 0);
      for (int l : r.labels)
        ++seen[static_cast<std::size_t>(l)];
      CHECK(std::count(seen.begin(), seen.end(), 0) == 0);
    }
    const auto sw = sweep_clusters(x, 2, 16, 7);
    CHECK(sw.best_k == 3);
  }

  TEST_CASE("deterministic per seed")
  {
    const auto x = clumps({1.0, 3.0, 9.0, 27.0}, 0.2, 40, 2);
    const auto a = kmeans(x, 4, 123);
    const auto b = kmeans(x, 4, 123);
    CHECK(a.labels == b.labels);
    CHECK(a.centroids == b.centroids);
  }

  TEST_CASE("labels ordered by centroid")
  {
    const auto x = clumps({5.0, 1.0, 3.0, 8.0}, 0.05, 30, 8);
    const auto r = kmeans(x, 4, 4);
    CHECK(std::is_sorted(r.centroids.begin(), r.centroids.end()));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        if (x[i] < x[j])
          CHECK(r.labels[i] <= r.labels[j]);
  }

  TEST_CASE("permuting the input permutes the labels")
  {
    auto x = clumps({1.0, 4.0, 16.0}, 0.1, 25, 6);
    const auto r = kmeans(x, 3, 77);
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> y;
    for (auto i : perm)
      y.push_back(x[i]);
    const auto s = kmeans(y, 3, 77);
    for (std::size_t i = 0; i < perm.size(); ++i)
      CHECK(s.labels[i] == r.labels[perm[i]]);
  }
}

TEST_SUITE("silhouette")
{
  TEST_CASE("two singletons score zero")
  {
    const std::vector<double> x{0, 1};
    const std::vector<int> l{0, 1};
    CHECK(silhouette(x, l) == 0.0);
  }

  TEST_CASE("well separated clumps score above 0.95")
  {
    const auto x = clumps({1.0, 100.0}, 0.01, 50, 3);
    const auto r = kmeans(x, 2, 0);
    CHECK(r.silhouette > 0.95);
  }

  TEST_CASE("identical points in two clusters score zero")
  {
    const std::vector<double> x{4, 4, 4, 4};
    const std::vector<int> l{0, 0, 1, 1};
    CHECK(silhouette(x, l) == 0.0);
  }

  TEST_CASE("degenerate partitions")
  {
    const std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 0, 0}), DegeneratePartition);
    CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 2, 2}), DegeneratePartition);
  }

  TEST_CASE("matches the brute-force definition on random partitions")
  {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = std::uniform_int_distribution<int>(2, 80)(rng);
      const int k = std::uniform_int_distribution<int>(2, std::min(n, 6))(rng);
      std::vector<double> x(static_cast<std::size_t>(n));
      std::vector<int> l(static_cast<std::size_t>(n));
      std::uniform_real_distribution<double> u(-5.0, 5.0);
      for (int i = 0; i < n; ++i) {
        // Some exact duplicates on purpose.
        x[static_cast<std::size_t>(i)] = i % 7 == 3 ? 1.25 : u(rng);
        l[static_cast<std::size_t>(i)] = i < k ? i : std::uniform_int_distribution<int>(0, k - 1)(rng);
      }
      const double fast = silhouette(x, l);
      const double slow = oracle::silhouette_brute(x, l);
      CHECK(std::abs(fast - slow) < 1e-10);
      CHECK(fast >= -1.0);
      CHECK(fast <= 1.0);
    }
  }
}

TEST_SUITE("sweep")
{
  TEST_CASE("three log clumps select K = 3 with centroids within 2 percent")
  {
    const auto x = clumps({0.05, 0.5, 5.0}, 0.01, 80, 21);
    const auto sw = sweep_clusters(log10_all(x), 2, 8, 3);
    CHECK(sw.best_k == 3);
    CHECK(sw.scores.size() == 7);
    CHECK_FALSE(sw.low_confidence);
    const double truth[3] = {0.05, 0.5, 5.0};
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(std::pow(10.0, sw.best.centroids[c]) / truth[c] - 1.0) < 0.02);
  }

  TEST_CASE("a single clump scores low; the flag follows the threshold")
  {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::vector<double> blob(300);
    for (auto& v : blob)
      v = normal(rng);
    const auto sw = sweep_clusters(blob, 2, 4, 0);
    CHECK(sw.scores.size() == 3);
    // 1-D k-means cuts a unimodal clump into contiguous pieces, which still
    // score around 0.55 -- far from the > 0.95 of real structure, but above
    // the flag threshold.
    for (const auto& [k, score] : sw.scores)
      CHECK(score < 0.7);
    CHECK(sw.low_confidence == (sw.best.silhouette < kLowConfidenceSilhouette));

    // {0, 1, 2} split in two scores 1/6.
    const auto weak = sweep_clusters(std::vector<double>{0, 1, 2}, 2, 2, 0);
    CHECK(weak.best.silhouette == doctest::Approx(1.0 / 6.0));
    CHECK(weak.low_confidence);
  }

  TEST_CASE("fixed range forces K")
  {
    const auto x = clumps({1.0, 10.0}, 0.01, 30, 1);
    const auto sw = sweep_clusters(x, 4, 4, 0);
    CHECK(sw.best_k == 4);
    CHECK(sw.scores.size() == 1);
  }

  TEST_CASE("range checks")
  {
    const std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(sweep_clusters(x, 1, 3, 0), ConfigError);
    CHECK_THROWS_AS(sweep_clusters(x, 3, 2, 0), ConfigError);
    CHECK_THROWS_AS(sweep_clusters(std::vector<double>{1, 1}, 2, 3, 0), TooFewPoints);
  }

  TEST_CASE("values a few ulps apart count once")
  {
    const double a = 0.6283185307179586;
    const std::vector<double> x{a, std::nextafter(a, 1.0), a, 2.0, std::nextafter(2.0, 3.0), 2.0 + 1e-6};
    CHECK(resolvable_count(x) == 3);
    CHECK(resolvable_count(std::vector<double>{}) == 0);
    CHECK_THROWS_AS(sweep_clusters(std::vector<double>{a, std::nextafter(a, 1.0)}, 2, 3, 0), TooFewPoints);
    const auto sw = sweep_clusters(x, 2, 8, 0);
    CHECK(sw.scores.size() == 2);
  }

  TEST_CASE("the first K reaching the best score wins")
  {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(40);
      std::uniform_int_distribution<int> level(0, 5);
      for (auto& v : x)
        v = level(rng);  // heavy duplication makes equal scores likely
      const auto sw = sweep_clusters(x, 2, 6, 0);
      double best = -2.0;
      int first = 0;
      for (const auto& [k, score] : sw.scores)
        if (score > best) {
          best = score;
          first = k;
        }
      CHECK(sw.best_k == first);
    }
  }
}
