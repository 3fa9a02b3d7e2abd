// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mrcosts {

/// A small TOML-like document: `key = value` lines grouped under optional
/// `[section]` headers. Values are numbers, true/false, "strings" or flat
/// [lists]. `#` starts a comment outside strings. Enough for configs and
/// archive manifests; nested tables and multi-line values are not supported.
class KeyValueDoc {
public:
  using Section = std::map<std::string, std::string>;  // key -> raw value text

  /// Throws ParseError naming the line.
  static KeyValueDoc parse(const std::string& text, const std::string& origin = "<text>");
  static KeyValueDoc load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  /// Section names in file order ("" is the top level).
  const std::vector<std::string>& sections() const { return order_; }
  const Section& section(const std::string& name) const;

  // Typed accessors throw ParseError when the key is missing or malformed.
  std::string get_string(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::int64_t> get_ints(const std::string& section, const std::string& key) const;

  // Writer side: values are stored already formatted.
  void set(const std::string& section, const std::string& key, const std::string& raw);
  void set_string(const std::string& section, const std::string& key, const std::string& v);
  void set_double(const std::string& section, const std::string& key, double v);
  void set_int(const std::string& section, const std::string& key, std::int64_t v);
  void set_bool(const std::string& section, const std::string& key, bool v);
  void set_doubles(const std::string& section, const std::string& key,
                   const std::vector<double>& v);
  void set_ints(const std::string& section, const std::string& key,
                const std::vector<std::int64_t>& v);

  std::string dump() const;

private:
  const std::string& raw(const std::string& section, const std::string& key) const;

  std::map<std::string, Section> data_;
  std::map<std::string, std::vector<std::string>> key_order_;
  std::vector<std::string> order_;
  std::string origin_;
};

/// Shortest decimal text that reads back to exactly `v` (%.17g).
std::string format_double(double v);

}  // namespace mrcosts
