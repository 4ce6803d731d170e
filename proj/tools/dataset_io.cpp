#include "dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "boro/error.hpp"

namespace boro::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InvalidArgument("cli", source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t d = 0, k = 0;
  bool have_dims = false, have_header = false;
  std::vector<SupervisedSample> samples;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      std::istringstream ds{std::string(s.substr(1))};
      std::string word;
      if (ds >> word && word == "dims") {
        if (have_dims) fail(source, lineno, "duplicate dims line");
        long long dd = -1, kk = -1;
        std::string extra;
        if (!(ds >> dd >> kk) || dd <= 0 || kk <= 0 || (ds >> extra))
          fail(source, lineno, "dims line must read '# dims d k' with positive d and k");
        d = static_cast<std::size_t>(dd);
        k = static_cast<std::size_t>(kk);
        have_dims = true;
      }
      continue;
    }
    if (!have_dims) fail(source, lineno, "missing '# dims d k' line before the data");
    const auto fields = split(s, ',');
    if (!have_header) {
      if (fields.size() != d + k)
        fail(source, lineno, "header has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(d + k));
      for (std::size_t c = 0; c < d + k; ++c) {
        const std::string want = c < d ? "x" + std::to_string(c + 1) : "y" + std::to_string(c - d + 1);
        if (fields[c] != want) fail(source, lineno, "header column " + std::to_string(c + 1) + " must be '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != d + k)
      fail(source, lineno, "expected " + std::to_string(d + k) + " fields, got " + std::to_string(fields.size()));
    SupervisedSample smp;
    smp.x.reserve(d);
    smp.y.reserve(k);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
        fail(source, lineno, "field " + std::to_string(c + 1) + " is not a number: '" + std::string(f) + "'");
      if (!std::isfinite(v)) fail(source, lineno, "field " + std::to_string(c + 1) + " is not finite");
      (c < d ? smp.x : smp.y).push_back(v);
    }
    samples.push_back(std::move(smp));
  }
  if (!have_dims) fail(source, lineno, "missing '# dims d k' line");
  if (!have_header) fail(source, lineno, "missing header line");
  if (samples.empty()) fail(source, lineno, "no data rows");
  return Dataset(std::move(samples));
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cli", "cannot open data file '" + path + "'");
  return read_dataset(in, path);
}

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_dataset(std::ostream& out, const Dataset& data, int digits) {
  out << "# dims " << data.dim_x() << ' ' << data.dim_y() << '\n';
  for (std::size_t c = 0; c < data.dim_x(); ++c) out << (c ? "," : "") << 'x' << c + 1;
  for (std::size_t c = 0; c < data.dim_y(); ++c) out << ",y" << c + 1;
  out << '\n';
  for (const auto& s : data) {
    for (std::size_t c = 0; c < s.x.size(); ++c) out << (c ? "," : "") << format_number(s.x[c], digits);
    for (double v : s.y) out << ',' << format_number(v, digits);
    out << '\n';
  }
}

}  // namespace boro::cli
