// Artifact I/O: deterministic JSON and CSV text, atomic file replacement.
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "psc/bend.hpp"
#include "psc/torpedo.hpp"

namespace psc::io {

using json = nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keys are sorted and numbers use shortest round-trip form, so equal values give equal bytes.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Throws json::parse_error carrying the byte offset.
inline json parse_file(const std::string& path) { return json::parse(read_file(path)); }

inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot replace " + path);
  }
}

inline std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Header row first, then one line per row; no quoting since fields never contain commas.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("csv row width mismatch");
    rows.push_back(std::move(row));
  }
  std::string text() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& f) {
      for (size_t i = 0; i < f.size(); ++i) {
        if (i) out += ',';
        out += f[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline Csv torpedo_curve_csv(const TorpedoCurve& c) {
  Csv csv{{"r", "alpha", "beta"}, {}};
  for (size_t i = 0; i < c.r.size(); ++i) csv.add({number(c.r[i]), number(c.alpha[i]), number(c.beta[i])});
  return csv;
}

inline Csv step_profile_csv(const StepMetric& m, int samples = 257) {
  Csv csv{{"t", "height"}, {}};
  for (const auto& r : step_profile(m, samples)) csv.add({number(r.t), number(r.height)});
  return csv;
}

// Boot coordinates (x, y) are written as (r, t).
inline Csv boot_trace_csv(const BootAssembly& a, int nx = 16, int ny = 16) {
  Csv csv{{"region", "r", "t", "R"}, {}};
  for (const auto& r : boot_curvature_trace(a, nx, ny)) csv.add({r.region, number(r.x), number(r.y), number(r.R)});
  return csv;
}

}  // namespace psc::io
