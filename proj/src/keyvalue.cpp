// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/keyvalue.hpp"

#include "mrcosts/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mrcosts {

namespace {

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing comment, leaving '#' inside quotes alone.
std::string strip_comment(const std::string& line)
{
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\'))
      quoted = !quoted;
    else if (line[i] == '#' && !quoted)
      return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& k)
{
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<std::string> split_list(const std::string& raw, const std::string& where)
{
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
    throw ParseError(where + ": expected a [list], got '" + raw + "'");
  std::vector<std::string> out;
  const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
  if (body.empty())
    return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, const std::string& where)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(where + ": '" + s + "' is not a number");
  return v;
}

std::int64_t to_int(const std::string& s, const std::string& where)
{
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(where + ": '" + s + "' is not an integer");
  return v;
}

}  // namespace

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KeyValueDoc KeyValueDoc::parse(const std::string& text, const std::string& origin)
{
  KeyValueDoc doc;
  doc.origin_ = origin;
  std::string current;
  doc.data_[current];
  doc.order_.push_back(current);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string s = trim(strip_comment(line));
    if (s.empty())
      continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError(where + ": unterminated section header");
      current = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_key(current))
        throw ParseError(where + ": bad section name '" + current + "'");
      if (doc.data_.count(current))
        throw ParseError(where + ": duplicate section [" + current + "]");
      doc.data_[current];
      doc.order_.push_back(current);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (!valid_key(key))
      throw ParseError(where + ": bad key '" + key + "'");
    if (value.empty())
      throw ParseError(where + ": missing value for '" + key + "'");
    if (doc.data_[current].count(key))
      throw ParseError(where + ": duplicate key '" + key + "'");
    doc.set(current, key, value);
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

bool KeyValueDoc::has_section(const std::string& section) const
{
  return data_.count(section) > 0;
}

bool KeyValueDoc::has(const std::string& section, const std::string& key) const
{
  const auto it = data_.find(section);
  return it != data_.end() && it->second.count(key) > 0;
}

const KeyValueDoc::Section& KeyValueDoc::section(const std::string& name) const
{
  const auto it = data_.find(name);
  if (it == data_.end())
    throw ParseError(origin_ + ": missing section [" + name + "]");
  return it->second;
}

const std::string& KeyValueDoc::raw(const std::string& section, const std::string& key) const
{
  const auto& sec = this->section(section);
  const auto it = sec.find(key);
  if (it == sec.end())
    throw ParseError(origin_ + ": missing key '" + key + "'" +
                     (section.empty() ? std::string() : " in [" + section + "]"));
  return it->second;
}

std::string KeyValueDoc::get_string(const std::string& section, const std::string& key) const
{
  const std::string& r = raw(section, key);
  if (r.size() < 2 || r.front() != '"' || r.back() != '"')
    throw ParseError(origin_ + ": '" + key + "' must be a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (r[i] == '\\' && i + 2 < r.size()) {
      const char c = r[++i];
      out += c == 'n' ? '\n' : c;
    } else {
      out += r[i];
    }
  }
  return out;
}

double KeyValueDoc::get_double(const std::string& section, const std::string& key) const
{
  return to_double(raw(section, key), origin_ + " [" + section + "] " + key);
}

std::int64_t KeyValueDoc::get_int(const std::string& section, const std::string& key) const
{
  return to_int(raw(section, key), origin_ + " [" + section + "] " + key);
}

bool KeyValueDoc::get_bool(const std::string& section, const std::string& key) const
{
  const std::string& r = raw(section, key);
  if (r == "true")
    return true;
  if (r == "false")
    return false;
  throw ParseError(origin_ + ": '" + key + "' must be true or false, got '" + r + "'");
}

std::vector<double> KeyValueDoc::get_doubles(const std::string& section,
                                             const std::string& key) const
{
  const std::string where = origin_ + " [" + section + "] " + key;
  std::vector<double> out;
  for (const auto& item : split_list(raw(section, key), where))
    out.push_back(to_double(item, where));
  return out;
}

std::vector<std::int64_t> KeyValueDoc::get_ints(const std::string& section,
                                                const std::string& key) const
{
  const std::string where = origin_ + " [" + section + "] " + key;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(raw(section, key), where))
    out.push_back(to_int(item, where));
  return out;
}

void KeyValueDoc::set(const std::string& section, const std::string& key, const std::string& raw)
{
  if (!data_.count(section))
    order_.push_back(section);
  auto& sec = data_[section];
  if (!sec.count(key))
    key_order_[section].push_back(key);
  sec[key] = raw;
}

void KeyValueDoc::set_string(const std::string& section, const std::string& key,
                             const std::string& v)
{
  std::string q = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\')
      q += '\\';
    if (c == '\n') {
      q += "\\n";
      continue;
    }
    q += c;
  }
  set(section, key, q + "\"");
}

void KeyValueDoc::set_double(const std::string& section, const std::string& key, double v)
{
  set(section, key, format_double(v));
}

void KeyValueDoc::set_int(const std::string& section, const std::string& key, std::int64_t v)
{
  set(section, key, std::to_string(v));
}

void KeyValueDoc::set_bool(const std::string& section, const std::string& key, bool v)
{
  set(section, key, v ? "true" : "false");
}

void KeyValueDoc::set_doubles(const std::string& section, const std::string& key,
                              const std::vector<double>& v)
{
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ", " : "") + format_double(v[i]);
  set(section, key, s + "]");
}

void KeyValueDoc::set_ints(const std::string& section, const std::string& key,
                           const std::vector<std::int64_t>& v)
{
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ", " : "") + std::to_string(v[i]);
  set(section, key, s + "]");
}

std::string KeyValueDoc::dump() const
{
  // Top-level keys first: after a header they would belong to that section.
  std::vector<std::string> names{""};
  for (const auto& name : order_)
    if (!name.empty())
      names.push_back(name);
  std::string out;
  for (const auto& name : names) {
    const auto it = key_order_.find(name);
    if (!name.empty()) {
      if (!out.empty())
        out += "\n";
      out += "[" + name + "]\n";
    }
    if (it == key_order_.end())
      continue;
    for (const auto& key : it->second)
      out += key + " = " + data_.at(name).at(key) + "\n";
  }
  return out;
}

}  // namespace mrcosts
