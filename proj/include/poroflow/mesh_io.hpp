#pragma once

// Plain-text mesh files:
//
//   trimesh 1
//   vertices N      followed by N lines "x y"
//   cells M         followed by M lines "v0 v1 v2 region"
//   boundary K      followed by K lines "v0 v1 tag", tag in {D, N}
//
// Indices are 0-based and '#' starts a comment. The first vertex of a cell
// is opposite its refinement edge; clockwise cells are reoriented by
// swapping their last two vertices.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "mesh.hpp"

namespace poroflow {

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-empty line with comments stripped; throws at end of input.
  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw MeshError("mesh file: unexpected end of input while reading " + std::string(what));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError("mesh file line " + std::to_string(number_) + ": " + msg);
  }

  template <typename... T>
  void read(std::istringstream& s, const char* what, T&... out) {
    ((s >> out), ...);
    std::string extra;
    if (s.fail()) fail(std::string("malformed ") + what);
    if (s >> extra) fail(std::string("trailing tokens after ") + what);
  }

  int line() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

inline long read_count(LineReader& r, const char* keyword) {
  auto s = r.next(keyword);
  std::string kw;
  long n = -1;
  r.read(s, keyword, kw, n);
  if (kw != keyword) r.fail(std::string("expected '") + keyword + "', got '" + kw + "'");
  if (n < 0) r.fail(std::string("negative ") + keyword + " count");
  return n;
}

}  // namespace detail

inline TriMesh read_mesh(std::istream& in) {
  detail::LineReader r(in);
  {
    auto s = r.next("header");
    std::string magic;
    int version = 0;
    r.read(s, "header", magic, version);
    if (magic != "trimesh" || version != 1) r.fail("expected header 'trimesh 1'");
  }

  const long nv = detail::read_count(r, "vertices");
  std::vector<Vec2> x(nv);
  for (auto& p : x) {
    auto s = r.next("vertex");
    r.read(s, "vertex", p.x(), p.y());
  }

  const long nc = detail::read_count(r, "cells");
  std::vector<Cell> cells(nc);
  for (auto& c : cells) {
    auto s = r.next("cell");
    r.read(s, "cell", c.v[0], c.v[1], c.v[2], c.region);
    for (Index v : c.v)
      if (v < 0 || v >= nv) r.fail("cell vertex index " + std::to_string(v) + " out of range");
    if (c.v[0] == c.v[1] || c.v[1] == c.v[2] || c.v[0] == c.v[2]) r.fail("cell repeats a vertex");
    const double a = cross(x[c.v[1]] - x[c.v[0]], x[c.v[2]] - x[c.v[0]]);
    if (a == 0.0) r.fail("degenerate cell");
    if (a < 0.0) std::swap(c.v[1], c.v[2]);
  }

  const long nb = detail::read_count(r, "boundary");
  BoundaryMap boundary;
  for (long i = 0; i < nb; ++i) {
    auto s = r.next("boundary edge");
    Index a = 0, b = 0;
    std::string tag;
    r.read(s, "boundary edge", a, b, tag);
    if (a < 0 || a >= nv || b < 0 || b >= nv)
      r.fail("boundary vertex index out of range");
    BoundaryTag t;
    if (tag == "D")
      t = BoundaryTag::GammaD;
    else if (tag == "N")
      t = BoundaryTag::GammaN;
    else
      r.fail("boundary tag must be D or N, got '" + tag + "'");
    if (!boundary.emplace(edge_key(a, b), t).second) r.fail("duplicate boundary edge");
  }

  try {
    return TriMesh(std::move(x), std::move(cells), boundary);
  } catch (const MeshError& e) {
    throw MeshError(std::string("mesh file: ") + e.what());
  }
}

inline TriMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

inline void write_mesh(const TriMesh& mesh, std::ostream& out) {
  out << "trimesh 1\n";
  out << "vertices " << mesh.num_vertices() << '\n' << std::setprecision(17);
  for (const Vec2& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  out << "cells " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells())
    out << c.v[0] << ' ' << c.v[1] << ' ' << c.v[2] << ' ' << c.region << '\n';
  const BoundaryMap boundary = mesh.boundary_map();
  out << "boundary " << boundary.size() << '\n';
  for (const auto& [key, tag] : boundary)
    out << key.first << ' ' << key.second << ' ' << (tag == BoundaryTag::GammaD ? 'D' : 'N') << '\n';
}

inline void write_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  out.imbue(std::locale::classic());
  write_mesh(mesh, out);
  if (!out) throw IoError("failed writing mesh file '" + path + "'");
}

}  // namespace poroflow
