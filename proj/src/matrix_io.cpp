// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcosts/matrix_io.hpp"

#include "mrcosts/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace mrcosts {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_csv(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out)
{
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  if (s.empty())
    return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

SnapshotMatrix load_csv(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());

  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<double> flat;  // row-major: one snapshot after another
  std::size_t width = 0;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    const auto cells = split_csv(line);
    double probe = 0.0;
    if (first && !parse_double(cells[0], probe)) {
      for (std::size_t c = 1; c < cells.size(); ++c)
        labels.emplace_back(trim(cells[c]));
      width = cells.size();
      first = false;
      continue;
    }
    first = false;
    if (width == 0)
      width = cells.size();
    if (cells.size() != width || width < 2)
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " columns, expected " +
                       std::to_string(width));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw ParseError(path.string() + ": row " + std::to_string(row) +
                         ", column " + std::to_string(c) + ": '" +
                         std::string(trim(cells[c])) + "'");
      if (!std::isfinite(v))
        throw NonFiniteValue(path.string() + ": row " + std::to_string(row) +
                             ", column " + std::to_string(c));
      if (c == 0)
        times.push_back(v);
      else
        flat.push_back(v);
    }
  }
  if (times.size() < 2)
    throw ParseError(path.string() + ": need at least two snapshot rows");

  const auto n_space = static_cast<Eigen::Index>(width - 1);
  const auto n_time = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd values(n_space, n_time);
  for (Eigen::Index j = 0; j < n_time; ++j)
    for (Eigen::Index i = 0; i < n_space; ++i)
      values(i, j) = flat[static_cast<std::size_t>(j * n_space + i)];
  Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(times.data(), n_time);

  // Steps are held to the first one, so the report points at the row where
  // the spacing actually changes: the data row (1-based, after the header).
  const double dt = n_time > 1 ? t[1] - t[0] : 1.0;
  for (Eigen::Index j = 1; j < n_time; ++j) {
    const double step = t[j] - t[j - 1];
    if (!(step > 0.0) || std::abs(step - dt) > kTimeGridRelTol * std::abs(dt)) {
      char tv[32];
      std::snprintf(tv, sizeof tv, "%g", t[j]);
      throw NonUniformTimeGrid(path.string() + ": spacing breaks at row " +
                               std::to_string(j + 1) + " (t=" + tv + ")");
    }
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n_space)
    labels.clear();
  return SnapshotMatrix(std::move(values), std::move(t), std::move(labels));
}

template <typename T>
void append_pod(std::string& buf, const T& v)
{
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

std::string read_all(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

SnapshotMatrix load_f64bin(const fs::path& path)
{
  const std::string bytes = read_all(path);
  constexpr std::size_t header = 4 + 4 + 8 + 8;
  if (bytes.size() < header)
    throw ParseError(path.string() + ": truncated header");
  if (std::memcmp(bytes.data(), kMatrixMagic, 4) != 0)
    throw ParseError(path.string() + ": bad magic");
  std::uint32_t version = 0;
  std::uint64_t n_space = 0;
  std::uint64_t n_time = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&n_space, bytes.data() + 8, 8);
  std::memcpy(&n_time, bytes.data() + 16, 8);
  if (version != kMatrixFormatVersion)
    throw ParseError(path.string() + ": unsupported format version " +
                     std::to_string(version));
  if (n_space == 0 || n_time == 0 || n_space > (1ULL << 40) || n_time > (1ULL << 40) ||
      n_space * n_time > (1ULL << 40))
    throw ParseError(path.string() + ": implausible shape");
  const std::uint64_t expected = header + 8 * (n_time + n_space * n_time);
  if (bytes.size() != expected)
    throw ParseError(path.string() + ": expected " + std::to_string(expected) +
                     " bytes, found " + std::to_string(bytes.size()));

  Eigen::VectorXd t(static_cast<Eigen::Index>(n_time));
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n_space),
                         static_cast<Eigen::Index>(n_time));
  std::memcpy(t.data(), bytes.data() + header, 8 * n_time);
  std::memcpy(values.data(), bytes.data() + header + 8 * n_time, 8 * n_space * n_time);
  return SnapshotMatrix(std::move(values), std::move(t));
}

}  // namespace

MatrixFormat parse_matrix_format(std::string_view name)
{
  if (name == "csv")
    return MatrixFormat::csv;
  if (name == "f64bin")
    return MatrixFormat::f64bin;
  throw ConfigError("unknown matrix format '" + std::string(name) + "'");
}

MatrixFormat guess_matrix_format(const fs::path& path)
{
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::f64bin;
}

SnapshotMatrix load_matrix(const fs::path& path, MatrixFormat format)
{
  if (!fs::exists(path))
    throw IoError("no such file " + path.string());
  return format == MatrixFormat::csv ? load_csv(path) : load_f64bin(path);
}

void write_file_atomic(const fs::path& path, std::string_view bytes)
{
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
      throw IoError("short write to " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void save_matrix(const SnapshotMatrix& m, const fs::path& path, MatrixFormat format)
{
  std::string buf;
  if (format == MatrixFormat::csv) {
    std::ostringstream out;
    out << 't';
    for (Eigen::Index i = 0; i < m.n_space(); ++i) {
      out << ',';
      if (m.space_labels().empty())
        out << 's' << i;
      else
        out << m.space_labels()[static_cast<std::size_t>(i)];
    }
    out << '\n';
    char cell[32];
    for (Eigen::Index j = 0; j < m.n_time(); ++j) {
      std::snprintf(cell, sizeof cell, "%.17g", m.times()[j]);
      out << cell;
      for (Eigen::Index i = 0; i < m.n_space(); ++i) {
        std::snprintf(cell, sizeof cell, "%.17g", m.values()(i, j));
        out << ',' << cell;
      }
      out << '\n';
    }
    buf = std::move(out).str();
  } else {
    buf.append(kMatrixMagic, 4);
    append_pod(buf, kMatrixFormatVersion);
    append_pod(buf, static_cast<std::uint64_t>(m.n_space()));
    append_pod(buf, static_cast<std::uint64_t>(m.n_time()));
    buf.append(reinterpret_cast<const char*>(m.times().data()),
               static_cast<std::size_t>(8 * m.n_time()));
    buf.append(reinterpret_cast<const char*>(m.values().data()),
               static_cast<std::size_t>(8 * m.n_time() * m.n_space()));
  }
  write_file_atomic(path, buf);
}

std::vector<double> read_f64_blob(const fs::path& path)
{
  const std::string bytes = read_all(path);
  if (bytes.size() % 8 != 0)
    throw CorruptArchive(path.string() + ": size is not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

void write_f64_blob(const fs::path& path, std::span<const double> data)
{
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(data.data()),
                                           data.size_bytes()));
}

}  // namespace mrcosts
