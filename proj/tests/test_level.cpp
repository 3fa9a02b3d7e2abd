// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "mrcosts/error.hpp"
#include "mrcosts/level.hpp"
#include "mrcosts/model.hpp"
#include "mrcosts/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mrcosts;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

LevelConfig level_config(int w, int rank, int bands)
{
  LevelConfig c;
  c.window_length = w;
  c.slide = std::max(1, w / 10);
  c.rank = rank;
  c.n_local_bands = bands;
  return c;
}

LevelFitOptions serial()
{
  LevelFitOptions o;
  o.threads = 1;
  return o;
}

// Pearson correlation of two fields over snapshots [a, b).
double correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int a, int b)
{
  const Eigen::ArrayXXd u = x.middleCols(a, b - a).array() - x.middleCols(a, b - a).mean();
  const Eigen::ArrayXXd v = y.middleCols(a, b - a).array() - y.middleCols(a, b - a).mean();
  return (u * v).sum() / std::sqrt((u * u).sum() * (v * v).sum());
}

SynthResult slow_plus_fast(double slow_period, double fast_period, double sigma, int n_time)
{
  std::vector<ComponentSpec> comps(2);
  comps[0].frequency = 1.0 / slow_period;
  comps[0].pattern = TravelingPattern{1.0, 1.0};
  comps[1].frequency = 1.0 / fast_period;
  comps[1].amplitude = 0.6;
  comps[1].pattern = TravelingPattern{2.0, -1.0};
  return generate(comps, 12, n_time, 1.0, sigma, 31);
}

}  // namespace

TEST_SUITE("level config")
{
  TEST_CASE("validation")
  {
    CHECK_NOTHROW(validate(level_config(16, 8, 4)));
    CHECK_THROWS_WITH_AS(validate(level_config(16, 7, 4)), doctest::Contains("rank must be even"),
                         ConfigError);
    CHECK_THROWS_AS(validate(level_config(8, 8, 4)), ConfigError);
    LevelConfig c = level_config(16, 4, 2);
    c.slide = 17;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = level_config(16, 4, kSweepLocalBands);
    c.k_min = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }

  TEST_CASE("default band count is half the rank")
  {
    LevelConfig c;
    c.rank = 6;
    CHECK(resolved_local_bands(c) == 3);
    c.n_local_bands = kSweepLocalBands;
    CHECK(resolved_local_bands(c) == kSweepLocalBands);
    c.n_local_bands = 5;
    CHECK(resolved_local_bands(c) == 5);
  }

  TEST_CASE("default rho")
  {
    LevelConfig c = level_config(11, 4, 2);
    CHECK(resolved_rho(c, 0.5) == doctest::Approx(0.1 / 5.0));
    c.rho = 0.3;
    CHECK(resolved_rho(c, 0.5) == 0.3);
  }
}

TEST_SUITE("fit_level")
{
  TEST_CASE("single traveling wave: fast band sits on the wave frequency")
  {
    std::vector<ComponentSpec> comps(1);
    comps[0].frequency = 1.0 / 20;
    comps[0].pattern = TravelingPattern{1.0, 1.0};
    const auto res = generate(comps, 8, 400, 1.0, 0.0, 1);
    const auto lvl = fit_level(res.data, level_config(40, 2, 2), 3, serial());
    REQUIRE(lvl.n_bands() == 2);
    const double truth = kTwoPi / 20;
    CHECK(std::abs(lvl.centroids[1] / truth - 1.0) < 0.01);
    CHECK(lvl.failed_count() == 0);
  }

  TEST_CASE("white noise is fit poorly and mostly rejected")
  {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(32, 1024);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x.data()[i] = normal(rng);
    const auto data = SnapshotMatrix::uniform(x, 0.0, 1.0);
    const auto lvl = fit_level(data, level_config(64, 8, 4), 5, serial());
    CHECK(lvl.median_residual() > 0.8);
    const Eigen::MatrixXd rec = overlap_reconstruct(
        lvl.fits, [](int, int) { return true; }, true, data.times());
    CHECK(rec.squaredNorm() / x.squaredNorm() < 0.5);
  }

  TEST_CASE("dyadic windows with four forced bands")
  {
    const auto res = slow_plus_fast(150, 11, 0.1, 1024);
    std::vector<LevelConfig> cfgs;
    for (int w : {16, 32, 64, 128})
      cfgs.push_back(level_config(w, 8, 4));
    const auto model = fit(res.data, cfgs, 2, serial());
    REQUIRE(model.levels.size() == 4);
    for (const auto& lvl : model.levels)
      CHECK(lvl.n_bands() == 4);
  }

  TEST_CASE("labels are complete and centroids increase")
  {
    const auto res = slow_plus_fast(120, 9, 0.05, 600);
    const auto lvl = fit_level(res.data, level_config(40, 6, kSweepLocalBands), 4, serial());
    for (std::size_t p = 1; p < lvl.centroids.size(); ++p)
      CHECK(lvl.centroids[p] > lvl.centroids[p - 1]);
    for (std::size_t k = 0; k < lvl.fits.size(); ++k) {
      REQUIRE(lvl.local_labels[k].size() == 6);
      for (int l : lvl.local_labels[k])
        CHECK((l >= 0 && l < lvl.n_bands()));
    }
  }

  TEST_CASE("refitting with the same seed is bit-exact")
  {
    const auto res = slow_plus_fast(100, 7, 0.2, 400);
    const auto a = fit_level(res.data, level_config(32, 6, 3), 9, serial());
    LevelFitOptions par;
    par.threads = 3;
    const auto b = fit_level(res.data, level_config(32, 6, 3), 9, par);
    REQUIRE(a.fits.size() == b.fits.size());
    for (std::size_t k = 0; k < a.fits.size(); ++k)
      CHECK(a.fits[k].omega == b.fits[k].omega);
    CHECK(a.local_labels == b.local_labels);
    CHECK(a.centroids == b.centroids);
  }

  TEST_CASE("every window failing is an error")
  {
    // A Nyquist alternation is a single real eigenvalue (-1): rank one.
    Eigen::MatrixXd x(3, 64);
    for (int i = 0; i < 64; ++i)
      x.col(i) = Eigen::Vector3d(1.0, -0.5, 2.0) * (i % 2 == 0 ? 1.0 : -1.0);
    const auto data = SnapshotMatrix::uniform(x, 0.0, 1.0);
    CHECK_THROWS_AS(fit_level(data, level_config(16, 4, 2), 0, serial()), AllWindowsFailed);
  }

  TEST_CASE("window longer than the record")
  {
    const auto data = SnapshotMatrix::uniform(Eigen::MatrixXd::Random(2, 20), 0.0, 1.0);
    CHECK_THROWS_AS(fit_level(data, level_config(32, 4, 2), 0, serial()), WindowTooLong);
  }
}

TEST_SUITE("local bands")
{
  TEST_CASE("constant field: band 0 is the constant")
  {
    const auto data = SnapshotMatrix::uniform(Eigen::MatrixXd::Constant(4, 100, 2.5), 0.0, 1.0);
    const auto lvl = fit_level(data, level_config(20, 4, 2), 0, serial());
    const Eigen::MatrixXd b0 = reconstruct_local_band(lvl, 0, data.times());
    CHECK((b0.array() - 2.5).abs().maxCoeff() < 1e-12);
    const auto handoff = lowpass_handoff(lvl, data);
    CHECK((handoff.values().array() - 2.5).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("bands add up to the full reconstruction")
  {
    const auto res = slow_plus_fast(90, 8, 0.1, 500);
    const auto lvl = fit_level(res.data, level_config(30, 8, 4), 1, serial());
    const auto& t = res.data.times();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(12, 500);
    for (int p = 0; p < lvl.n_bands(); ++p)
      sum += reconstruct_local_band(lvl, p, t);
    const Eigen::MatrixXd all = overlap_reconstruct(
        lvl.fits, [](int, int) { return true; }, true, t);
    CHECK((sum - all).norm() <= 1e-12 * all.norm());
    CHECK_THROWS_AS(reconstruct_local_band(lvl, lvl.n_bands(), t), BandOutOfRange);
    CHECK_THROWS_AS(reconstruct_local_band(lvl, -1, t), BandOutOfRange);
  }

  TEST_CASE("highest band follows the fast component, handoff the slow one")
  {
    const auto res = slow_plus_fast(200, 10, 0.0, 800);
    const auto lvl = fit_level(res.data, level_config(40, 4, 2), 6, serial());
    REQUIRE(lvl.n_bands() == 2);
    const auto& t = res.data.times();
    const Eigen::MatrixXd fast = reconstruct_local_band(lvl, 1, t);
    CHECK(correlation(fast, res.truth[1], 40, 760) > 0.99);
    const auto handoff = lowpass_handoff(lvl, res.data);
    CHECK(correlation(handoff.values(), res.truth[0], 40, 760) > 0.99);
    CHECK(handoff.times() == res.data.times());
  }

  TEST_CASE("a single-band level hands off everything")
  {
    const auto res = slow_plus_fast(200, 10, 0.05, 400);
    const auto lvl = fit_level(res.data, level_config(40, 4, 1), 6, serial());
    REQUIRE(lvl.n_bands() == 1);
    const Eigen::MatrixXd all = overlap_reconstruct(
        lvl.fits, [](int, int) { return true; }, true, res.data.times());
    CHECK((lowpass_handoff(lvl, res.data).values() - all).norm() <= 1e-12 * all.norm());
  }
}
