// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "fixtures.hpp"

#include "mrcosts/archive.hpp"
#include "mrcosts/error.hpp"
#include "mrcosts/keyvalue.hpp"
#include "mrcosts/matrix_io.hpp"
#include "mrcosts/synth.hpp"

#include <cstring>
#include <fstream>
#include <limits>

using namespace mrcosts;
using mrcosts::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s)
{
  std::ofstream(p, std::ios::binary) << s;
}

std::string read_text(const std::filesystem::path& p)
{
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

template <typename Derived>
bool bit_equal(const Eigen::PlainObjectBase<Derived>& a, const Eigen::PlainObjectBase<Derived>& b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(typename Derived::Scalar) * a.size()) == 0;
}

MrCostsModel small_model()
{
  std::vector<ComponentSpec> comps(2);
  comps[0].frequency = 1.0 / 100;
  comps[0].pattern = StandingPattern{1.0, 0.0};
  comps[1].frequency = 1.0 / 10;
  comps[1].amplitude = 0.5;
  comps[1].pattern = TravelingPattern{2.0, 1.0};
  const auto res = generate(comps, 6, 400, 1.0, 0.05, 3);
  std::vector<LevelConfig> levels(2);
  levels[0].window_length = 24;
  levels[0].slide = 3;
  levels[0].rank = 4;
  levels[1].window_length = 120;
  levels[1].slide = 12;
  levels[1].rank = 4;
  MrCostsModel m = fit(res.data, levels, 11);
  GlobalOptions g;
  g.k_max = 6;
  global_separation(m, g);
  return m;
}

}  // namespace

TEST_SUITE("snapshot")
{
  TEST_CASE("uniform grid is accepted, ragged grid rejected")
  {
    const Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 3);
    const SnapshotMatrix m(v, Eigen::Vector3d(0.0, 0.5, 1.0));
    CHECK(m.dt() == doctest::Approx(0.5));
    CHECK_THROWS_AS(SnapshotMatrix(v, Eigen::Vector3d(0.0, 0.5, 1.1)), NonUniformTimeGrid);
    CHECK_THROWS_AS(SnapshotMatrix(v, Eigen::Vector3d(0.0, 0.0, 0.0)), NonUniformTimeGrid);
  }

  TEST_CASE("shape and finiteness are enforced")
  {
    CHECK_THROWS_AS(SnapshotMatrix(Eigen::MatrixXd::Ones(2, 1), Eigen::VectorXd::Zero(1)),
                    ShapeMismatch);
    CHECK_THROWS_AS(SnapshotMatrix(Eigen::MatrixXd::Ones(2, 3), Eigen::Vector2d(0, 1)),
                    ShapeMismatch);
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 3);
    v(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SnapshotMatrix::uniform(v, 0.0, 1.0), NonFiniteValue);
    CHECK_THROWS_AS(SnapshotMatrix(Eigen::MatrixXd::Ones(2, 2), Eigen::Vector2d(0, 1), {"a"}),
                    ShapeMismatch);
  }
}

TEST_SUITE("matrix io")
{
  TEST_CASE("three-snapshot csv with header")
  {
    TempDir dir;
    write_text(dir / "a.csv", "t,s0,s1\n0,1,2\n0.5,1,2\n1.0,1,2\n");
    const auto m = load_matrix(dir / "a.csv", MatrixFormat::csv);
    CHECK(m.n_space() == 2);
    CHECK(m.n_time() == 3);
    CHECK(m.dt() == 0.5);
    CHECK(m.values()(1, 2) == 2.0);
    CHECK(m.space_labels() == std::vector<std::string>{"s0", "s1"});
  }

  TEST_CASE("csv without header")
  {
    TempDir dir;
    write_text(dir / "a.csv", "0,1\n1,2\n2,3\n");
    const auto m = load_matrix(dir / "a.csv", MatrixFormat::csv);
    CHECK(m.n_space() == 1);
    CHECK(m.values()(0, 2) == 3.0);
  }

  TEST_CASE("f64bin round trip is bit-exact")
  {
    TempDir dir;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd v(7, 33);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v.data()[i] = normal(rng) * 1e3;
    const auto m = SnapshotMatrix::uniform(v, 0.1, 0.3);
    save_matrix(m, dir / "m.f64bin", MatrixFormat::f64bin);
    const auto back = load_matrix(dir / "m.f64bin", MatrixFormat::f64bin);
    CHECK(bit_equal(back.values(), m.values()));
    CHECK(bit_equal(back.times(), m.times()));
  }

  TEST_CASE("csv written from the three-snapshot example reads back identically as f64bin")
  {
    TempDir dir;
    write_text(dir / "a.csv", "t,s0,s1\n0,1,2\n0.5,1,2\n1.0,1,2\n");
    const auto m = load_matrix(dir / "a.csv", MatrixFormat::csv);
    save_matrix(m, dir / "a.f64bin", MatrixFormat::f64bin);
    const auto back = load_matrix(dir / "a.f64bin", MatrixFormat::f64bin);
    CHECK(bit_equal(back.values(), m.values()));
  }

  TEST_CASE("csv round trip within 1e-12 relative")
  {
    TempDir dir;
    Eigen::MatrixXd v(3, 5);
    v << 0.1, 1.0 / 3, -2e-8, 7e12, 5, 0, 1, 2, 3, 4, 3.14159, 2.71828, 1.41421, -1e-300, 42;
    const auto m = SnapshotMatrix::uniform(v, 0.0, 0.1);
    save_matrix(m, dir / "m.csv", MatrixFormat::csv);
    const auto back = load_matrix(dir / "m.csv", MatrixFormat::csv);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      CHECK(std::abs(back.values().data()[i] - v.data()[i]) <=
            1e-12 * std::abs(v.data()[i]));
  }

  TEST_CASE("1x2 matrix gives a header line and two rows")
  {
    TempDir dir;
    Eigen::MatrixXd v(1, 2);
    v << 0.1, 0.2;
    save_matrix(SnapshotMatrix::uniform(v, 0.0, 1.0), dir / "m.csv", MatrixFormat::csv);
    const std::string text = read_text(dir / "m.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind("t,", 0) == 0);
  }

  TEST_CASE("non-uniform csv names the offending row")
  {
    TempDir dir;
    write_text(dir / "a.csv", "t,s0\n0,1\n0.5,1\n1.1,1\n");
    try {
      load_matrix(dir / "a.csv", MatrixFormat::csv);
      FAIL("expected NonUniformTimeGrid");
    } catch (const NonUniformTimeGrid& e) {
      CHECK(std::string(e.what()).find("row 3 (t=1.1)") != std::string::npos);
    }
  }

  TEST_CASE("malformed csv input")
  {
    TempDir dir;
    write_text(dir / "a.csv", "0,1,2\n1,1\n");
    CHECK_THROWS_AS(load_matrix(dir / "a.csv", MatrixFormat::csv), ParseError);
    write_text(dir / "b.csv", "0,1\n1,abc\n2,3\n");
    CHECK_THROWS_AS(load_matrix(dir / "b.csv", MatrixFormat::csv), ParseError);
    write_text(dir / "c.csv", "0,1\n1,nan\n2,3\n");
    CHECK_THROWS_AS(load_matrix(dir / "c.csv", MatrixFormat::csv), NonFiniteValue);
    CHECK_THROWS_AS(load_matrix(dir / "missing.csv", MatrixFormat::csv), IoError);
  }

  TEST_CASE("malformed f64bin input")
  {
    TempDir dir;
    const auto m = SnapshotMatrix::uniform(Eigen::MatrixXd::Ones(2, 4), 0.0, 1.0);
    save_matrix(m, dir / "m.f64bin", MatrixFormat::f64bin);
    std::string bytes = read_text(dir / "m.f64bin");
    write_text(dir / "short.f64bin", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_matrix(dir / "short.f64bin", MatrixFormat::f64bin), ParseError);
    bytes[0] = 'X';
    write_text(dir / "magic.f64bin", bytes);
    CHECK_THROWS_AS(load_matrix(dir / "magic.f64bin", MatrixFormat::f64bin), ParseError);
  }

  TEST_CASE("unwritable path")
  {
    const auto m = SnapshotMatrix::uniform(Eigen::MatrixXd::Ones(1, 2), 0.0, 1.0);
    CHECK_THROWS_AS(save_matrix(m, "/nonexistent-dir/x/m.f64bin", MatrixFormat::f64bin),
                    IoError);
  }

  TEST_CASE("format names")
  {
    CHECK(parse_matrix_format("csv") == MatrixFormat::csv);
    CHECK(parse_matrix_format("f64bin") == MatrixFormat::f64bin);
    CHECK_THROWS_AS(parse_matrix_format("hdf5"), ConfigError);
    CHECK(guess_matrix_format("x.csv") == MatrixFormat::csv);
    CHECK(guess_matrix_format("x.bin") == MatrixFormat::f64bin);
  }
}

TEST_SUITE("keyvalue")
{
  TEST_CASE("sections, comments and typed values")
  {
    const auto doc = KeyValueDoc::parse(R"(# top
name = "a # not a comment"  # trailing
count = 3
[level.0]
rho = 1.5e-3
flag = true
xs = [1, 2.5, -3]
ks = []
)");
    CHECK(doc.get_string("", "name") == "a # not a comment");
    CHECK(doc.get_int("", "count") == 3);
    CHECK(doc.get_double("level.0", "rho") == 1.5e-3);
    CHECK(doc.get_bool("level.0", "flag"));
    CHECK(doc.get_doubles("level.0", "xs") == std::vector<double>{1, 2.5, -3});
    CHECK(doc.get_ints("level.0", "ks").empty());
    CHECK(doc.sections() == std::vector<std::string>{"", "level.0"});
  }

  TEST_CASE("errors name the line")
  {
    try {
      KeyValueDoc::parse("a = 1\nb 2\n", "cfg");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(KeyValueDoc::parse("a = 1\na = 2\n"), ParseError);
    CHECK_THROWS_AS(KeyValueDoc::parse("[x]\n[x]\n"), ParseError);
    CHECK_THROWS_AS(KeyValueDoc::parse("[x\n"), ParseError);
    CHECK_THROWS_AS(KeyValueDoc::parse("a =\n"), ParseError);
    const auto doc = KeyValueDoc::parse("a = 1.5\ns = x\n");
    CHECK_THROWS_AS(doc.get_int("", "a"), ParseError);
    CHECK_THROWS_AS(doc.get_string("", "s"), ParseError);
    CHECK_THROWS_AS(doc.get_double("", "missing"), ParseError);
    CHECK_THROWS_AS(doc.get_bool("", "a"), ParseError);
  }

  TEST_CASE("dump and parse round trip doubles exactly")
  {
    KeyValueDoc doc;
    const std::vector<double> xs{0.1, 1.0 / 3.0, 6.02214076e23, -4.9e-324, 0.0};
    doc.set_doubles("s", "xs", xs);
    doc.set_string("s", "text", "say \"hi\"\\ok\nnext");
    doc.set_int("", "n", -12);
    const auto back = KeyValueDoc::parse(doc.dump());
    CHECK(back.get_doubles("s", "xs") == xs);
    CHECK(back.get_string("s", "text") == "say \"hi\"\\ok\nnext");
    CHECK(back.get_int("", "n") == -12);
    CHECK(back.dump() == doc.dump());
  }
}

TEST_SUITE("archive")
{
  TEST_CASE("save then load reproduces every numeric field bit-exactly")
  {
    const MrCostsModel m = small_model();
    TempDir dir;
    save_model(m, dir.path(), "seed = 11\n");
    const MrCostsModel back = load_model(dir.path());

    REQUIRE(back.levels.size() == m.levels.size());
    CHECK(bit_equal(back.times, m.times));
    CHECK(back.n_space == m.n_space);
    CHECK(back.seed == m.seed);
    for (std::size_t l = 0; l < m.levels.size(); ++l) {
      const auto& a = m.levels[l];
      const auto& b = back.levels[l];
      CHECK(b.config.window_length == a.config.window_length);
      CHECK(b.config.slide == a.config.slide);
      CHECK(b.config.rank == a.config.rank);
      CHECK(b.config.rho == a.config.rho);
      CHECK(b.config.n_local_bands == a.config.n_local_bands);
      CHECK(b.centroids == a.centroids);
      CHECK(b.band_silhouette == a.band_silhouette);
      CHECK(b.silhouette == a.silhouette);
      CHECK(b.reference_scale == a.reference_scale);
      CHECK(b.local_labels == a.local_labels);
      REQUIRE(b.fits.size() == a.fits.size());
      for (std::size_t k = 0; k < a.fits.size(); ++k) {
        CHECK(b.fits[k].spec == a.fits[k].spec);
        CHECK(bit_equal(b.fits[k].omega, a.fits[k].omega));
        CHECK(bit_equal(b.fits[k].amplitudes, a.fits[k].amplitudes));
        CHECK(bit_equal(b.fits[k].phi, a.fits[k].phi));
        CHECK(bit_equal(b.fits[k].background, a.fits[k].background));
        CHECK(b.fits[k].residual_rel == a.fits[k].residual_rel);
        CHECK(b.fits[k].iterations == a.fits[k].iterations);
        CHECK(b.fits[k].converged == a.fits[k].converged);
      }
    }
    REQUIRE(back.global.has_value());
    CHECK(back.global->labels == m.global->labels);
    CHECK(back.global->centroids == m.global->centroids);
    CHECK(back.global->band_silhouette == m.global->band_silhouette);
    CHECK(back.global->sweep == m.global->sweep);
    CHECK(bit_equal(reconstruct_full(back), reconstruct_full(m)));
    CHECK(read_text(dir / "run_config.toml") == "seed = 11\n");
  }

  TEST_CASE("saving twice gives identical bytes")
  {
    const MrCostsModel m = small_model();
    TempDir a;
    TempDir b;
    save_model(m, a.path());
    save_model(m, b.path());
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
      if (!entry.is_regular_file())
        continue;
      const auto rel = std::filesystem::relative(entry.path(), a.path());
      CHECK(read_text(entry.path()) == read_text(b.path() / rel));
    }
  }

  TEST_CASE("failed windows survive the round trip")
  {
    MrCostsModel m = small_model();
    auto& f = m.levels[0].fits[3];
    f.failed = true;
    f.failure = "RankDeficientWindow: \"test\"";
    f.omega.resize(0);
    f.amplitudes.resize(0);
    f.phi.resize(0, 0);
    m.levels[0].local_labels[3].assign(4, -1);
    TempDir dir;
    save_model(m, dir.path());
    const auto back = load_model(dir.path());
    CHECK(back.levels[0].fits[3].failed);
    CHECK(back.levels[0].fits[3].failure == f.failure);
    CHECK(back.levels[0].fits[3].rank() == 0);
  }

  TEST_CASE("version 2 manifest is rejected")
  {
    TempDir dir;
    save_model(small_model(), dir.path());
    std::string text = read_text(dir / "manifest.toml");
    text.replace(text.find("format_version = 1"), 18, "format_version = 2");
    write_text(dir / "manifest.toml", text);
    CHECK_THROWS_AS(load_model(dir.path()), VersionMismatch);
  }

  TEST_CASE("truncated blob is a corrupt archive")
  {
    TempDir dir;
    save_model(small_model(), dir.path());
    const auto blob = dir.path() / "level1" / "win2.f64bin";
    const std::string bytes = read_text(blob);
    write_text(blob, bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_model(dir.path()), CorruptArchive);
    write_text(blob, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_model(dir.path()), CorruptArchive);
  }

  TEST_CASE("missing pieces")
  {
    TempDir dir;
    CHECK_THROWS_AS(load_model(dir.path()), IoError);
    save_model(small_model(), dir.path());
    std::filesystem::remove(dir.path() / "global_bands.f64bin");
    CHECK_THROWS_AS(load_model(dir.path()), CorruptArchive);
    write_text(dir / "manifest.toml", "format_version = 1\nn_levels = [\n");
    CHECK_THROWS_AS(load_model(dir.path()), CorruptArchive);
  }
}
