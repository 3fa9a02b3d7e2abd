// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails.
//
//   mrcosts_acceptance [path/to/three_scales.toml]

#include "cli.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

#include "mrcosts/clustering.hpp"
#include "mrcosts/config.hpp"
#include "mrcosts/error.hpp"
#include "mrcosts/model.hpp"
#include "mrcosts/varpro.hpp"
#include "mrcosts/window.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace mrcosts;
using namespace mrcosts::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared fixture state; fitted lazily so every criterion can be run alone.
struct Fixture {
  RunConfig cfg;
  SynthResult noisy;
  SynthResult clean;
  std::optional<MrCostsModel> noisy_model;
  std::optional<MrCostsModel> clean_model;
  std::optional<MrCostsModel> noise_model;
  Eigen::MatrixXd noise;
  double noisy_fit_seconds = 0.0;

  explicit Fixture(const fs::path& config) : cfg(load_run_config(config))
  {
    if (!cfg.synth)
      throw ConfigError(config.string() + " has no [synth] section");
    noisy = generate(*cfg.synth);
    SynthConfig c = *cfg.synth;
    c.snr.reset();
    c.noise_sigma.reset();
    clean = generate(c);
  }

  MrCostsModel fit_separated(const SnapshotMatrix& data) const
  {
    MrCostsModel m = fit(data, cfg.levels, cfg.seed);
    global_separation(m, cfg.global);
    return m;
  }

  const MrCostsModel& noisy_fit()
  {
    if (!noisy_model) {
      const auto t0 = std::chrono::steady_clock::now();
      noisy_model = fit_separated(noisy.data);
      noisy_fit_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return *noisy_model;
  }
  const MrCostsModel& clean_fit()
  {
    if (!clean_model)
      clean_model = fit_separated(clean.data);
    return *clean_model;
  }
  // Pure white noise with the fixture's shape and levels.
  const MrCostsModel& noise_fit()
  {
    if (!noise_model) {
      std::mt19937_64 rng(20240601);
      std::normal_distribution<double> normal;
      noise.resize(cfg.synth->n_space, cfg.synth->n_time);
      for (Eigen::Index i = 0; i < noise.size(); ++i)
        noise.data()[i] = normal(rng);
      noise_model = fit_separated(SnapshotMatrix::uniform(noise, 0.0, cfg.synth->dt));
    }
    return *noise_model;
  }
};

// 1. Three oscillatory global bands near the true frequencies.
Outcome frequency_recovery(Fixture& fx)
{
  const MrCostsModel& m = fx.noisy_fit();
  const auto& g = *m.global;
  std::vector<double> truth;
  for (const auto& c : fx.cfg.synth->components)
    truth.push_back(kTwoPi * c.frequency);
  std::sort(truth.begin(), truth.end());

  std::string bands;
  for (int p = 1; p < g.n_bands(); ++p)
    bands += fmt("%s%.4g", p > 1 ? ", " : "", g.centroids[static_cast<std::size_t>(p)]);
  std::string nearest;
  bool matched = true;
  for (double w : truth) {
    double best = std::numeric_limits<double>::infinity();
    for (int p = 1; p < g.n_bands(); ++p)
      best = std::min(best, std::abs(g.centroids[static_cast<std::size_t>(p)] / w - 1.0));
    matched = matched && best <= 0.05;
    nearest += fmt("%s%.4g:%.1f%%", nearest.empty() ? "" : ", ", w, 100.0 * best);
  }
  const int oscillatory = g.n_bands() - 1;
  Outcome o;
  o.pass = oscillatory == 3 && matched && fx.noisy_fit_seconds < 60.0;
  o.detail = fmt("%d oscillatory bands [%s] rad/sample; truth vs nearest band [%s]; fit %.1f s",
                 oscillatory, bands.c_str(), nearest.c_str(), fx.noisy_fit_seconds);
  return o;
}

// 2. Noiseless fidelity and de-noising.
Outcome reconstruction_fidelity(Fixture& fx)
{
  const MrCostsModel& mc = fx.clean_fit();
  const int trim = default_edge_trim(mc);
  const double clean_err = relative_error(reconstruct_full(mc), fx.clean.clean.values(), trim);
  const MrCostsModel& mn = fx.noisy_fit();
  const Eigen::MatrixXd full = reconstruct_full(mn);
  const double vs_truth = relative_error(full, fx.noisy.clean.values(), trim);
  const double vs_input = relative_error(full, fx.noisy.data.values(), trim);
  Outcome o;
  o.pass = clean_err < 5.0 && vs_truth < vs_input;
  o.detail = fmt("noiseless interior error %.3g%%; SNR 10: %.2f%% vs truth, %.2f%% vs noisy input",
                 clean_err, vs_truth, vs_input);
  return o;
}

// 3. Bands add up to the full reconstruction, and that equals the
// independently assembled sum of every oscillatory mode plus one background.
Outcome band_identity(Fixture& fx)
{
  double worst = 0.0;
  for (const MrCostsModel* m : {&fx.noisy_fit(), &fx.clean_fit(), &fx.noise_fit()}) {
    Eigen::MatrixXd assembled = Eigen::MatrixXd::Zero(m->n_space, m->times.size());
    for (std::size_t l = 0; l + 1 < m->levels.size(); ++l) {
      const auto& lvl = m->levels[l];
      assembled += overlap_reconstruct(
          lvl.fits,
          [&](int k, int j) {
            return lvl.local_labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] > 0;
          },
          false, m->times);
    }
    assembled +=
        overlap_reconstruct(m->deepest().fits, [](int, int) { return true; }, true, m->times);

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m->n_space, m->times.size());
    for (int p = 0; p < m->global->n_bands(); ++p)
      sum += reconstruct_global_band(*m, p);
    const Eigen::MatrixXd full = reconstruct_full(*m);
    worst = std::max({worst, (sum - full).norm() / full.norm(),
                      (assembled - full).norm() / full.norm()});
  }
  return {worst <= 1e-12, fmt("worst relative deviation %.2e over 3 models", worst)};
}

// 4. Variable projection against exact DMD, and the analytic Jacobian.
Outcome varpro_correctness(Fixture&)
{
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal;
  const int ranks[3] = {2, 4, 8};
  double worst_omega = 0.0;
  double worst_jac = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int r = ranks[trial % 3];
    const auto w = random_exp_window(rng, 12, 64, r / 2, 0.1, 0.02);
    const Eigen::VectorXcd ref = oracle::exact_dmd(w.x, w.t, r);
    const auto fit =
        varpro_solve(w.x, w.t, init_eigenvalues(w.x, w.t, r), VarproSettings{r}, {0.05});
    worst_omega = std::max(worst_omega, spectrum_rel_error(fit.omega, ref));
    // Away from the optimum too, where the residual is not small.
    Eigen::VectorXcd probe = w.omega;
    for (Eigen::Index q = 0; q < probe.size(); q += 2) {
      const std::complex<double> d(0.01 * normal(rng), 0.2 * normal(rng));
      probe[q] += d;
      probe[q + 1] = std::conj(probe[q]);
    }
    worst_jac = std::max({worst_jac, jacobian_check(w.x, w.t, probe),
                          jacobian_check(w.x, w.t, fit.omega)});
  }
  return {worst_omega < 1e-6 && worst_jac < 1e-5,
          fmt("50 windows: worst omega deviation %.2e, worst Jacobian deviation %.2e",
              worst_omega, worst_jac)};
}

// 5. |Re omega| <= rho holds exactly when the truth violates it.
Outcome constraint_enforcement(Fixture&)
{
  std::mt19937_64 rng(55);
  int violations = 0;
  int checked = 0;
  double worst_truth = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 2 + 2 * (trial % 3);
    const auto w = random_exp_window(rng, 8, 80, r / 2, 0.1, 0.3);
    const double rho = 0.02;
    for (const auto& v : w.omega)
      worst_truth = std::max(worst_truth, std::abs(v.real()));
    const auto fit = varpro_solve(w.x, w.t, init_eigenvalues(w.x, w.t, r), VarproSettings{r},
                                  EigConstraint{rho});
    for (const auto& v : fit.omega) {
      ++checked;
      violations += std::abs(v.real()) > rho;
    }
  }
  return {violations == 0 && worst_truth > 0.02,
          fmt("%d of %d eigenvalues outside rho = 0.02 (true |Re| up to %.3f)", violations,
              checked, worst_truth)};
}

// 6. Three clumps a decade apart: the sweep picks K = 3.
Outcome clustering(Fixture&)
{
  std::mt19937_64 rng(606);
  std::normal_distribution<double> normal;
  const double centres[3] = {0.01, 0.1, 1.0};
  Eigen::VectorXcd omega(240);
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const double c = centres[i % 3];
    omega[i] = {0.0, c * (1.0 + 0.01 * normal(rng))};
  }
  const OmegaFeatures f = transform_omega(omega, OmegaTransform::log10_abs_imag);
  const SweepResult sw = sweep_clusters(f.values, 2, 8, 7);
  const int k = static_cast<int>(sw.best.centroids.size());
  double worst = 0.0;
  if (k == 3)
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(inverse_transform(sw.best.centroids[static_cast<std::size_t>(c)],
                                                         OmegaTransform::log10_abs_imag) /
                                           centres[c] -
                                       1.0));
  return {k == 3 && worst < 0.02,
          fmt("selected K = %d (silhouette %.3f), worst centroid deviation %.2f%%", k,
              sw.best.silhouette, 100.0 * worst)};
}

// 7. Blend weights are a partition of unity.
Outcome partition_of_unity(Fixture&)
{
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int uncovered_ok = 0;
  int cases = 0;
  for (; cases < 100; ++cases) {
    const int n_time = std::uniform_int_distribution<int>(8, 600)(rng);
    const int length = std::uniform_int_distribution<int>(3, n_time)(rng);
    const int slide = std::uniform_int_distribution<int>(1, length)(rng);
    const auto windows = make_windows(n_time, length, slide);
    std::vector<bool> alive(windows.size(), true);
    if (cases % 2)
      for (std::size_t k = 0; k < alive.size(); ++k)
        alive[k] = std::bernoulli_distribution(0.85)(rng);

    std::vector<int> cover(static_cast<std::size_t>(n_time), 0);
    for (std::size_t k = 0; k < windows.size(); ++k)
      if (alive[k])
        for (int i = 0; i < windows[k].length; ++i)
          ++cover[static_cast<std::size_t>(windows[k].start_index + i)];
    const bool covered = std::find(cover.begin(), cover.end(), 0) == cover.end();
    try {
      const auto wts = overlap_weights(windows, alive, n_time);
      if (!covered)
        return {false, fmt("case %d: uncovered time not reported", cases)};
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_time);
      for (std::size_t k = 0; k < windows.size(); ++k)
        sum.segment(windows[k].start_index, windows[k].length) += wts[k];
      worst = std::max(worst, (sum.array() - 1.0).abs().maxCoeff());
    } catch (const UncoveredTime&) {
      if (covered)
        return {false, fmt("case %d: spurious UncoveredTime", cases)};
      ++uncovered_ok;
    }
  }
  return {worst <= 1e-12, fmt("%d geometries (%d with a gap, correctly rejected); worst |sum - 1| = %.2e",
                              cases, uncovered_ok, worst)};
}

// 8. The edges are the least reliable part.
Outcome edge_degradation(Fixture& fx)
{
  struct Run {
    const char* name;
    const MrCostsModel* model;
    const Eigen::MatrixXd* truth;
  };
  const Run runs[] = {{"noisy vs truth", &fx.noisy_fit(), &fx.noisy.clean.values()},
                      {"noisy vs input", &fx.noisy_fit(), &fx.noisy.data.values()},
                      {"noiseless", &fx.clean_fit(), &fx.clean.clean.values()}};
  bool pass = true;
  std::string detail;
  for (const auto& r : runs) {
    const Eigen::MatrixXd full = reconstruct_full(*r.model);
    const double whole = relative_error(full, *r.truth, 0);
    const double inner = relative_error(full, *r.truth, default_edge_trim(*r.model));
    // Noiseless errors sit at rounding level, where the order is noise.
    pass = pass && inner <= whole + 1e-9;
    detail += fmt("%s%s %.3g%% <= %.3g%%", detail.empty() ? "" : "; ", r.name, inner, whole);
  }
  return {pass, "interior vs full: " + detail};
}

std::string slurp(const fs::path& p)
{
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// 9. The fit command is deterministic down to the byte.
Outcome determinism(Fixture&, const fs::path& config)
{
  const fs::path dir = fs::temp_directory_path() /
                       ("mrcosts-acceptance-" + std::to_string(std::random_device{}()));
  struct Cleanup {
    fs::path p;
    ~Cleanup()
    {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};
  std::ostringstream out, err;
  auto run = [&](std::vector<std::string> args) {
    const int code = cli::run(args, out, err);
    if (code != cli::kExitOk)
      throw std::runtime_error("mrcosts " + args[0] + " exited with " + std::to_string(code) +
                               ": " + err.str());
  };
  run({"synth", "--config", config.string(), "--out", (dir / "data").string()});
  for (const char* name : {"a", "b"})
    run({"fit", "--config", config.string(), "--input", (dir / "data" / "data.f64bin").string(),
         "--out", (dir / name).string()});

  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const fs::path twin = dir / "b" / e.path().filename();
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin))
      return {false, "archives differ at " + e.path().filename().string()};
    ++files;
  }
  int twins = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "b"))
    ++twins;
  return {files == twins && files > 0, fmt("%d archive files byte-identical", files)};
}

// 10. White noise is mostly rejected.
Outcome white_noise(Fixture& fx)
{
  const MrCostsModel& m = fx.noise_fit();
  const double ratio = reconstruct_full(m).squaredNorm() / fx.noise.squaredNorm();
  return {ratio < 0.5, fmt("full reconstruction holds %.1f%% of the input energy (%d global bands)",
                           100.0 * ratio, m.global->n_bands())};
}

}  // namespace

int main(int argc, char** argv)
{
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(MRCOSTS_FIXTURE_CONFIG);
  std::optional<Fixture> fx;
  try {
    fx.emplace(config);
  } catch (const std::exception& e) {
    std::cerr << "cannot set up the fixture: " << e.what() << '\n';
    return 2;
  }

  const std::vector<std::pair<const char*, std::function<Outcome(Fixture&)>>> criteria = {
      {"frequency recovery", frequency_recovery},
      {"reconstruction fidelity", reconstruction_fidelity},
      {"band sum identity", band_identity},
      {"varpro correctness", varpro_correctness},
      {"constraint enforcement", constraint_enforcement},
      {"clustering", clustering},
      {"partition of unity", partition_of_unity},
      {"edge degradation", edge_degradation},
      {"determinism", [&](Fixture& f) { return determinism(f, config); }},
      {"white-noise rejection", white_noise},
  };

  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(*fx);
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": "
              << o.detail << fmt(" [%.1f s]", secs) << std::endl;
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size()
            << " criteria passed" << fmt(" in %.0f s", total) << std::endl;
  return failed == 0 ? 0 : 1;
}
