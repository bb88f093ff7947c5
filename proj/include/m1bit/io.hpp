// Plain-text and image I/O: problem containers, CSV tables, 16-bit graymaps.
// All floating-point text uses 17 significant digits (round-trip exact).
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "m1bit/core.hpp"
#include "m1bit/sensing.hpp"

namespace m1bit {

/// 17-significant-digit decimal rendering of a double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok) {
  double v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc()) {
    // from_chars rejects "inf"/"nan" spellings; fall back to strtod.
    char* endp = nullptr;
    v = std::strtod(tok.c_str(), &endp);
    if (endp == tok.c_str()) throw std::runtime_error("parse_double: bad token '" + tok + "'");
  }
  return v;
}

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

// ---------------------------------------------------------------------------
// Problem container: header `d m n seed`, then m rows of U, then one line per
// measurement with columns p psi y s.
// ---------------------------------------------------------------------------
inline void write_problem(const std::string& path, const SyntheticProblem<double>& pr) {
  auto f = open_out(path);
  f << pr.spec.d << ' ' << pr.spec.m << ' ' << pr.spec.n << ' ' << pr.spec.seed << '\n';
  for (Index i = 0; i < pr.U.A.rows(); ++i) {
    for (Index j = 0; j < pr.U.A.cols(); ++j) {
      if (j) f << ' ';
      f << fmt17(pr.U.A(i, j));
    }
    f << '\n';
  }
  for (Index i = 0; i < pr.obs.size(); ++i)
    f << fmt17(pr.obs.p[i]) << ' ' << (pr.obs.psi[i] ? 1 : 0) << ' ' << fmt17(pr.obs.y[i])
      << ' ' << fmt17(pr.obs.s[i]) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

struct LoadedProblem {
  Index d = 0, m = 0, n = 0;
  std::uint64_t seed = 0;
  SensingMatrix<double> U;
  SaturatedObservations<double> obs;
};

inline LoadedProblem read_problem(const std::string& path) {
  auto f = open_in(path);
  LoadedProblem pr;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty problem file: " + path);
  {
    std::istringstream hs(line);
    if (!(hs >> pr.d >> pr.m >> pr.n >> pr.seed))
      throw std::runtime_error("bad problem header in " + path);
  }
  pr.U.A.resize(pr.m, pr.d);
  for (Index i = 0; i < pr.m; ++i) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated matrix in " + path);
    auto toks = split_fields(line, ' ');
    if (static_cast<Index>(toks.size()) != pr.d) throw std::runtime_error("bad matrix row in " + path);
    for (Index j = 0; j < pr.d; ++j) pr.U.A(i, j) = parse_double(toks[static_cast<std::size_t>(j)]);
  }
  pr.obs.p.resize(pr.m);
  pr.obs.psi.resize(pr.m);
  pr.obs.y.resize(pr.m);
  pr.obs.s.resize(pr.m);
  for (Index i = 0; i < pr.m; ++i) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated observations in " + path);
    auto toks = split_fields(line, ' ');
    if (toks.size() != 4) throw std::runtime_error("bad observation row in " + path);
    pr.obs.p[i] = parse_double(toks[0]);
    pr.obs.psi[i] = parse_double(toks[1]) != 0.0;
    pr.obs.y[i] = parse_double(toks[2]);
    pr.obs.s[i] = parse_double(toks[3]);
  }
  return pr;
}

// ---------------------------------------------------------------------------
// CSV tables. Comment lines start with '#'; the first non-comment line is the
// column header.
// ---------------------------------------------------------------------------
struct CsvTable {
  std::vector<std::string> comments;  // without leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvTable& t) {
  auto f = open_out(path);
  for (const auto& c : t.comments) f << "# " << c << '\n';
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) f << ',';
    f << t.columns[j];
  }
  f << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) f << ',';
      f << fmt17(row[j]);
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline CsvTable read_csv(const std::string& path) {
  auto f = open_in(path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t b = 1;
      while (b < line.size() && line[b] == ' ') ++b;
      t.comments.push_back(line.substr(b));
      continue;
    }
    auto toks = split_fields(line, ',');
    if (!have_header) {
      t.columns = toks;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(toks.size());
    for (auto& tok : toks) row.push_back(parse_double(tok));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Sinogram as CSV, one row per view.
inline void write_matrix_csv(const std::string& path, const MatrixXd& mat,
                             const std::vector<std::string>& comments = {}) {
  auto f = open_out(path);
  for (const auto& c : comments) f << "# " << c << '\n';
  for (Index i = 0; i < mat.rows(); ++i) {
    for (Index j = 0; j < mat.cols(); ++j) {
      if (j) f << ',';
      f << fmt17(mat(i, j));
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline MatrixXd read_matrix_csv(const std::string& path) {
  auto f = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_fields(line, ',');
    std::vector<double> row;
    row.reserve(toks.size());
    for (auto& tok : toks) row.push_back(parse_double(tok));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return MatrixXd(0, 0);
  MatrixXd mat(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < mat.rows(); ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != mat.cols())
      throw std::runtime_error("ragged CSV matrix in " + path);
    for (Index j = 0; j < mat.cols(); ++j) mat(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return mat;
}

// ---------------------------------------------------------------------------
// 16-bit binary PGM (P5, big-endian samples) with a text sidecar giving the
// grid and the linear window used for quantization.
// ---------------------------------------------------------------------------
struct ImageMeta {
  Index nx = 0, ny = 0;
  double pixel_size = 1.0;
  double window_min = 0.0, window_max = 1.0;
};

inline void write_pgm16(const std::string& path, const MatrixXd& img, double pixel_size,
                        double window_min, double window_max) {
  if (!(window_max > window_min)) throw std::invalid_argument("write_pgm16: empty window");
  auto f = open_out(path);
  const Index ny = img.rows(), nx = img.cols();
  f << "P5\n" << nx << ' ' << ny << "\n65535\n";
  const double scale = 65535.0 / (window_max - window_min);
  for (Index i = 0; i < ny; ++i)
    for (Index j = 0; j < nx; ++j) {
      double v = (img(i, j) - window_min) * scale;
      if (v < 0) v = 0;
      if (v > 65535) v = 65535;
      const auto q = static_cast<std::uint16_t>(v + 0.5);
      const unsigned char hi = static_cast<unsigned char>(q >> 8);
      const unsigned char lo = static_cast<unsigned char>(q & 0xff);
      f.put(static_cast<char>(hi));
      f.put(static_cast<char>(lo));
    }
  if (!f) throw std::runtime_error("write failed: " + path);

  auto meta = open_out(path + ".meta");
  meta << "nx=" << nx << "\nny=" << ny << "\npixel_size=" << fmt17(pixel_size)
       << "\nwindow_min=" << fmt17(window_min) << "\nwindow_max=" << fmt17(window_max) << '\n';
  if (!meta) throw std::runtime_error("write failed: " + path + ".meta");
}

inline MatrixXd read_pgm16(const std::string& path, ImageMeta* meta_out = nullptr) {
  auto f = open_in(path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw std::runtime_error("not a P5 graymap: " + path);
  Index nx = 0, ny = 0;
  long maxval = 0;
  f >> nx >> ny >> maxval;
  if (maxval != 65535) throw std::runtime_error("expected 16-bit graymap: " + path);
  f.get();  // single whitespace after header

  ImageMeta meta;
  meta.nx = nx;
  meta.ny = ny;
  {
    auto mf = open_in(path + ".meta");
    std::string line;
    while (std::getline(mf, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      if (key == "pixel_size") meta.pixel_size = parse_double(val);
      else if (key == "window_min") meta.window_min = parse_double(val);
      else if (key == "window_max") meta.window_max = parse_double(val);
    }
  }
  MatrixXd img(ny, nx);
  const double scale = (meta.window_max - meta.window_min) / 65535.0;
  for (Index i = 0; i < ny; ++i)
    for (Index j = 0; j < nx; ++j) {
      const int hi = f.get();
      const int lo = f.get();
      if (hi < 0 || lo < 0) throw std::runtime_error("truncated graymap: " + path);
      const auto q = static_cast<std::uint16_t>((hi << 8) | lo);
      img(i, j) = meta.window_min + q * scale;
    }
  if (meta_out) *meta_out = meta;
  return img;
}

}  // namespace m1bit
