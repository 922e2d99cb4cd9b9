#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slowfast/error.hpp"
#include "slowfast/pde.hpp"

namespace slowfast::io {

/// Numbers in every output file: 12 significant digits.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::configuration, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::configuration, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) { row_strings(header); }

  CsvBuilder& row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << num(values[i]);
    os_ << "\n";
    return *this;
  }

  CsvBuilder& row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << "\n";
    return *this;
  }

  CsvBuilder& line(const std::string& s) {
    os_ << s << "\n";
    return *this;
  }

  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

/// One species as a row-major CSV matrix (ny rows of nx values).
inline std::string field_csv(const pde::Field& f, pde::Species s) {
  const auto& a = s == pde::Species::u ? f.u : f.v;
  std::ostringstream os;
  for (std::size_t j = 0; j < f.ny; ++j) {
    for (std::size_t i = 0; i < f.nx; ++i) os << (i ? "," : "") << num(a[f.index(i, j)]);
    os << "\n";
  }
  return os.str();
}

struct PgmImage {
  std::string bytes;    // binary P5 image
  std::string scaling;  // sidecar text: min and max mapped to 0 and 255
};

/// 8-bit greyscale image, min-max scaled; a constant field maps to 0.
inline PgmImage field_pgm(const pde::Field& f, pde::Species s) {
  const auto& a = s == pde::Species::u ? f.u : f.v;
  const auto [lo_it, hi_it] = std::minmax_element(a.begin(), a.end());
  const double lo = *lo_it, hi = *hi_it;
  std::string out = "P5\n" + std::to_string(f.nx) + " " + std::to_string(f.ny) + "\n255\n";
  out.reserve(out.size() + a.size());
  for (std::size_t j = 0; j < f.ny; ++j)
    for (std::size_t i = 0; i < f.nx; ++i) {
      const double x = a[f.index(i, j)];
      const double t = hi > lo ? (x - lo) / (hi - lo) : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
    }
  std::ostringstream sc;
  sc << "min = " << num(lo) << "\nmax = " << num(hi) << "\n";
  return {std::move(out), sc.str()};
}

}  // namespace slowfast::io
