// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/config.hpp"

#include "mrcosts/error.hpp"
#include "mrcosts/keyvalue.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mrcosts {

namespace fs = std::filesystem;

namespace {

// Reads typed values from one section and remembers which keys were used,
// so leftovers can be reported as unknown.
class SectionReader {
public:
  SectionReader(const KeyValueDoc& doc, std::string name) : doc_(doc), name_(std::move(name)) {}

  bool has(const std::string& key)
  {
    used_.insert(key);
    return doc_.has(name_, key);
  }
  bool is_string(const std::string& key) { return has(key) && raw(key).front() == '"'; }
  std::string str(const std::string& key) { return (used_.insert(key), doc_.get_string(name_, key)); }
  double num(const std::string& key) { return (used_.insert(key), doc_.get_double(name_, key)); }
  std::int64_t integer(const std::string& key)
  {
    return (used_.insert(key), doc_.get_int(name_, key));
  }
  int small_int(const std::string& key)
  {
    const auto v = integer(key);
    if (v < -1'000'000'000 || v > 1'000'000'000)
      throw ConfigError(where() + key + " is out of range");
    return static_cast<int>(v);
  }
  double num_or(const std::string& key, double dflt) { return has(key) ? num(key) : dflt; }
  int int_or(const std::string& key, int dflt) { return has(key) ? small_int(key) : dflt; }

  // Integer, or the string "auto" (-> nullopt).
  std::optional<int> int_or_auto(const std::string& key)
  {
    if (!has(key) || (is_string(key) && str(key) == "auto"))
      return std::nullopt;
    if (is_string(key))
      throw ConfigError(where() + key + " must be an integer or \"auto\"");
    return small_int(key);
  }

  void finish() const
  {
    if (!doc_.has_section(name_))
      return;
    for (const auto& [key, value] : doc_.section(name_))
      if (!used_.count(key))
        throw ConfigError(where() + "unknown key '" + key + "'");
  }

  std::string where() const { return name_.empty() ? std::string() : "[" + name_ + "] "; }

private:
  const std::string& raw(const std::string& key) const { return doc_.section(name_).at(key); }

  const KeyValueDoc& doc_;
  std::string name_;
  std::set<std::string> used_;
};

// Section names of the form prefix.N, checked to run 0..N-1.
int count_indexed(const KeyValueDoc& doc, const std::string& prefix)
{
  std::set<int> seen;
  for (const auto& s : doc.sections()) {
    if (s.rfind(prefix + ".", 0) != 0)
      continue;
    const std::string idx = s.substr(prefix.size() + 1);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos ||
        idx.size() > 6)
      throw ConfigError("bad section name [" + s + "]");
    seen.insert(std::stoi(idx));
  }
  int n = 0;
  for (int i : seen) {
    if (i != n)
      throw ConfigError("[" + prefix + "." + std::to_string(n) + "] is missing");
    ++n;
  }
  return n;
}

fs::path resolve(const fs::path& base, const std::string& p)
{
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

LevelConfig read_level(const KeyValueDoc& doc, int l, double& fraction)
{
  SectionReader r(doc, "level." + std::to_string(l));
  LevelConfig c;
  if (!r.has("window_length"))
    throw ConfigError(r.where() + "window_length is required");
  c.window_length = r.small_int("window_length");
  c.rank = r.int_or("rank", c.rank);
  c.rho = r.num_or("rho", 0.0);
  if (c.rho < 0.0)
    throw ConfigError(r.where() + "rho must be >= 0 (0 selects the default)");
  fraction = r.num_or("slide_fraction", kDefaultSlideFraction);
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError(r.where() + "slide_fraction must be in (0, 1]");
  c.slide = slide_for(c.window_length, fraction);
  if (r.has("n_local_bands")) {
    const auto bands = r.int_or_auto("n_local_bands");
    if (bands && *bands < 1)
      throw ConfigError(r.where() + "n_local_bands must be >= 1 or \"auto\"");
    c.n_local_bands = bands.value_or(kSweepLocalBands);
  }
  if (r.has("transform"))
    c.transform = parse_transform(r.str("transform"));
  c.k_min = r.int_or("k_min", c.k_min);
  c.k_max = r.int_or("k_max", c.k_max);
  r.finish();
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(r.where() + e.what());
  }
  return c;
}

ComponentSpec read_component(const KeyValueDoc& doc, int i)
{
  SectionReader r(doc, "component." + std::to_string(i));
  ComponentSpec c;
  const bool has_f = r.has("frequency");
  const bool has_p = r.has("period");
  if (has_f == has_p)
    throw ConfigError(r.where() + "give exactly one of frequency and period");
  if (has_f) {
    c.frequency = r.num("frequency");
  } else {
    const double period = r.num("period");
    if (!(period > 0.0))
      throw ConfigError(r.where() + "period must be > 0");
    c.frequency = 1.0 / period;
  }
  c.growth = r.num_or("growth", 0.0);
  c.amplitude = r.num_or("amplitude", 1.0);
  const std::string pattern = r.has("pattern") ? r.str("pattern") : "standing";
  if (pattern == "standing") {
    c.pattern = StandingPattern{r.num_or("wavenumber", 0.0), r.num_or("phase", 0.0)};
  } else if (pattern == "traveling") {
    c.pattern = TravelingPattern{r.num_or("wavenumber", 1.0), r.num_or("speed", 1.0)};
  } else {
    throw ConfigError(r.where() + "pattern must be \"standing\" or \"traveling\"");
  }
  if (r.has("onset"))
    c.onset = r.num("onset");
  if (r.has("offset"))
    c.offset = r.num("offset");
  r.finish();
  return c;
}

SynthConfig read_synth(const KeyValueDoc& doc)
{
  SectionReader r(doc, "synth");
  SynthConfig s;
  s.n_space = r.int_or("n_space", s.n_space);
  s.n_time = r.int_or("n_time", s.n_time);
  s.dt = r.num_or("dt", s.dt);
  if (r.has("noise_sigma"))
    s.noise_sigma = r.num("noise_sigma");
  if (r.has("snr"))
    s.snr = r.num("snr");
  if (s.noise_sigma && s.snr)
    throw ConfigError("[synth] give at most one of noise_sigma and snr");
  if (s.snr && !(*s.snr > 0.0))
    throw ConfigError("[synth] snr must be > 0");
  if (r.has("seed")) {
    const auto seed = r.integer("seed");
    if (seed < 0)
      throw ConfigError("[synth] seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  r.finish();
  const int n = count_indexed(doc, "component");
  if (n == 0)
    throw ConfigError("[synth] needs at least one [component.N] section");
  for (int i = 0; i < n; ++i)
    s.components.push_back(read_component(doc, i));
  return s;
}

}  // namespace

int slide_for(int window_length, double fraction)
{
  return std::max(1, static_cast<int>(std::lround(fraction * window_length)));
}

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const fs::path& base_dir, bool require_levels)
{
  KeyValueDoc doc;
  try {
    doc = KeyValueDoc::parse(text, origin);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }

  try {
    for (const auto& s : doc.sections())
      if (!s.empty() && s != "global" && s != "synth" && s.rfind("level.", 0) != 0 &&
          s.rfind("component.", 0) != 0)
        throw ConfigError("unknown section [" + s + "]");

    RunConfig cfg;
    cfg.text = text;
    SectionReader top(doc, "");
    if (top.has("input"))
      cfg.input = resolve(base_dir, top.str("input"));
    if (top.has("format"))
      cfg.format = parse_matrix_format(top.str("format"));
    if (top.has("output"))
      cfg.output = resolve(base_dir, top.str("output"));
    if (top.has("seed")) {
      const auto seed = top.integer("seed");
      if (seed < 0)
        throw ConfigError("seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(seed);
    }
    if (top.has("edge_trim")) {
      cfg.edge_trim = top.small_int("edge_trim");
      if (*cfg.edge_trim < 0)
        throw ConfigError("edge_trim must be >= 0");
    }
    top.finish();

    const int n_levels = count_indexed(doc, "level");
    if (n_levels == 0 && require_levels)
      throw ConfigError("at least one [level.N] section is required");
    for (int l = 0; l < n_levels; ++l) {
      double fraction = kDefaultSlideFraction;
      cfg.levels.push_back(read_level(doc, l, fraction));
      cfg.slide_fractions.push_back(fraction);
    }
    for (std::size_t l = 1; l < cfg.levels.size(); ++l)
      if (cfg.levels[l].window_length <= cfg.levels[l - 1].window_length)
        throw ConfigError("window lengths must increase from level to level");

    SectionReader g(doc, "global");
    cfg.global.n_bands = g.int_or_auto("n_bands");
    cfg.global.k_min = g.int_or("k_min", cfg.global.k_min);
    cfg.global.k_max = g.int_or("k_max", cfg.global.k_max);
    g.finish();
    if (cfg.global.n_bands && *cfg.global.n_bands < 2)
      throw ConfigError("[global] n_bands must be >= 2");
    if (cfg.global.k_min < 2 || cfg.global.k_max < cfg.global.k_min)
      throw ConfigError("[global] needs 2 <= k_min <= k_max");
    cfg.global.seed = cfg.seed;

    if (doc.has_section("synth"))
      cfg.synth = read_synth(doc);
    else if (count_indexed(doc, "component") > 0)
      throw ConfigError("[component.N] sections need a [synth] section");
    return cfg;
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const fs::path& path, bool require_levels)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path.string(), path.parent_path(), require_levels);
}

SynthResult generate(const SynthConfig& c)
{
  double sigma = c.noise_sigma.value_or(0.0);
  if (c.snr) {
    const SynthResult clean = generate(c.components, c.n_space, c.n_time, c.dt, 0.0, c.seed);
    sigma = sigma_for_snr(clean.clean.values(), *c.snr);
  }
  return generate(c.components, c.n_space, c.n_time, c.dt, sigma, c.seed);
}

}  // namespace mrcosts
