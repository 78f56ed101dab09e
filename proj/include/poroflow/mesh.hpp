#pragma once

// Conforming 2D triangulations with tagged boundaries.
//
// Cells are stored counter-clockwise. The refinement edge used by
// newest-vertex bisection is always the local edge opposite the first vertex
// of the cell; generators rotate the vertex order so that this is the
// longest edge. Local edge j of a cell is the edge opposite local vertex j.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace poroflow {

enum class BoundaryTag : std::uint8_t { Interior, GammaD, GammaN };

struct Cell {
  std::array<Index, 3> v{};
  int region = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Edge {
  std::array<Index, 2> v{};            // sorted, v[0] < v[1]
  std::array<Index, 2> cells{-1, -1};  // cells[0] < cells[1]; cells[1] = -1 on the boundary
  BoundaryTag tag = BoundaryTag::Interior;

  bool on_boundary() const { return cells[1] < 0; }
};

using EdgeKey = std::pair<Index, Index>;

inline EdgeKey edge_key(Index a, Index b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Boundary edges (sorted vertex pair) with their tags.
using BoundaryMap = std::map<EdgeKey, BoundaryTag>;

class TriMesh {
 public:
  TriMesh() = default;

  TriMesh(std::vector<Vec2> vertices, std::vector<Cell> cells, const BoundaryMap& boundary)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build(boundary);
  }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const Vec2& vertex(Index i) const { return vertices_[i]; }
  const Cell& cell(Index k) const { return cells_[k]; }
  const Edge& edge(Index e) const { return edges_[e]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Global edge ids of the cell, local edge j opposite local vertex j.
  const std::array<Index, 3>& cell_edges(Index k) const { return cell_edges_[k]; }

  /// +1 when the global edge normal is the outward normal of cell k.
  double edge_sign(Index k, int local_edge) const {
    return edges_[cell_edges_[k][local_edge]].cells[0] == k ? 1.0 : -1.0;
  }

  Vec2 cell_vertex(Index k, int j) const { return vertices_[cells_[k].v[j]]; }

  double area(Index k) const {
    const Vec2 a = cell_vertex(k, 0), b = cell_vertex(k, 1), c = cell_vertex(k, 2);
    return 0.5 * cross(b - a, c - a);
  }

  Vec2 centroid(Index k) const {
    return (cell_vertex(k, 0) + cell_vertex(k, 1) + cell_vertex(k, 2)) / 3.0;
  }

  /// Cell diameter (longest edge).
  double diameter(Index k) const {
    double d = 0.0;
    for (int j = 0; j < 3; ++j) d = std::max(d, edge_length(cell_edges_[k][j]));
    return d;
  }

  double edge_length(Index e) const {
    return (vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]]).norm();
  }

  Vec2 edge_midpoint(Index e) const {
    return 0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]);
  }

  /// Unit normal pointing out of edge.cells[0] (outward on the boundary).
  Vec2 edge_normal(Index e) const { return normals_[e]; }

  /// Tangent s = normal rotated by +90 degrees.
  Vec2 edge_tangent(Index e) const { return rotate_ccw(normals_[e]); }

  /// Mesh size h: the largest cell diameter.
  double mesh_size() const {
    double h = 0.0;
    for (Index k = 0; k < num_cells(); ++k) h = std::max(h, diameter(k));
    return h;
  }

  BoundaryMap boundary_map() const {
    BoundaryMap out;
    for (const Edge& e : edges_)
      if (e.on_boundary()) out.emplace(EdgeKey{e.v[0], e.v[1]}, e.tag);
    return out;
  }

  Index find_edge(Index a, Index b) const {
    const auto it = edge_index_.find(pack(edge_key(a, b)));
    return it == edge_index_.end() ? -1 : it->second;
  }

  friend bool operator==(const TriMesh& a, const TriMesh& b) {
    return a.vertices_ == b.vertices_ && a.cells_ == b.cells_ &&
           a.boundary_map() == b.boundary_map();
  }

 private:
  static std::uint64_t pack(const EdgeKey& k) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.first)) << 32) |
           static_cast<std::uint32_t>(k.second);
  }

  void build(const BoundaryMap& boundary) {
    const Index nv = num_vertices();
    cell_edges_.resize(cells_.size());
    edge_index_.reserve(cells_.size() * 2);
    for (Index k = 0; k < num_cells(); ++k) {
      const Cell& c = cells_[k];
      for (Index vi : c.v)
        if (vi < 0 || vi >= nv)
          throw MeshError("cell " + std::to_string(k) + " references vertex " +
                          std::to_string(vi) + " out of range");
      if (c.v[0] == c.v[1] || c.v[1] == c.v[2] || c.v[0] == c.v[2])
        throw MeshError("cell " + std::to_string(k) + " has repeated vertices");
      if (!(area(k) > 0.0))
        throw MeshError("cell " + std::to_string(k) + " is not counter-clockwise or is degenerate");
      for (int j = 0; j < 3; ++j) {
        const EdgeKey key = edge_key(c.v[(j + 1) % 3], c.v[(j + 2) % 3]);
        auto [it, inserted] = edge_index_.try_emplace(pack(key), num_edges());
        if (inserted) {
          Edge e;
          e.v = {key.first, key.second};
          e.cells = {k, -1};
          edges_.push_back(e);
        } else {
          Edge& e = edges_[it->second];
          if (e.cells[1] >= 0)
            throw MeshError("edge (" + std::to_string(key.first) + "," +
                            std::to_string(key.second) + ") has more than two cells");
          e.cells[1] = k;
        }
        cell_edges_[k][j] = it->second;
      }
    }

    for (Edge& e : edges_) {
      if (!e.on_boundary()) continue;
      const auto it = boundary.find({e.v[0], e.v[1]});
      if (it == boundary.end() || it->second == BoundaryTag::Interior)
        throw MeshError("boundary edge (" + std::to_string(e.v[0]) + "," +
                        std::to_string(e.v[1]) + ") carries no Dirichlet/Neumann tag");
      e.tag = it->second;
    }
    for (const auto& [key, tag] : boundary) {
      const Index e = find_edge(key.first, key.second);
      if (e < 0 || !edges_[e].on_boundary())
        throw MeshError("tagged edge (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ") is not a boundary edge");
    }

    normals_.resize(edges_.size());
    for (Index k = 0; k < num_cells(); ++k) {
      for (int j = 0; j < 3; ++j) {
        const Index e = cell_edges_[k][j];
        if (edges_[e].cells[0] != k) continue;
        const Vec2 t = cell_vertex(k, (j + 2) % 3) - cell_vertex(k, (j + 1) % 3);
        normals_[e] = Vec2(t.y(), -t.x()).normalized();
      }
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<std::array<Index, 3>> cell_edges_;
  std::vector<Vec2> normals_;
  std::unordered_map<std::uint64_t, Index> edge_index_;
};

namespace detail {

/// Rotates the vertex order so that local edge 0 is the longest edge.
inline Cell longest_edge_first(const std::vector<Vec2>& x, Cell c) {
  int best = 0;
  double best_len = -1.0;
  for (int j = 0; j < 3; ++j) {
    const double len = (x[c.v[(j + 1) % 3]] - x[c.v[(j + 2) % 3]]).squaredNorm();
    if (len > best_len * (1.0 + 1e-12)) {
      best_len = len;
      best = j;
    }
  }
  std::rotate(c.v.begin(), c.v.begin() + best, c.v.end());
  return c;
}

/// Tags every edge owned by exactly one cell via `classify(a, b)`.
inline BoundaryMap tag_boundary(const std::vector<Vec2>& x, const std::vector<Cell>& cells,
                                const std::function<BoundaryTag(const Vec2&, const Vec2&)>& classify) {
  std::map<EdgeKey, int> count;
  for (const Cell& c : cells)
    for (int j = 0; j < 3; ++j) ++count[edge_key(c.v[(j + 1) % 3], c.v[(j + 2) % 3])];
  BoundaryMap out;
  for (const auto& [key, n] : count)
    if (n == 1) out.emplace(key, classify(x[key.first], x[key.second]));
  return out;
}

/// Cells of the grid squares selected by `keep`, split along the (+1,+1) diagonal.
inline TriMesh structured_mesh(double x0, double y0, int nx, int ny, double step,
                               const std::function<bool(int, int)>& keep,
                               const std::function<BoundaryTag(const Vec2&, const Vec2&)>& classify) {
  std::vector<Index> id((nx + 1) * (ny + 1), -1);
  std::vector<Vec2> x;
  auto vid = [&](int i, int j) -> Index {
    Index& slot = id[j * (nx + 1) + i];
    if (slot < 0) {
      slot = static_cast<Index>(x.size());
      x.emplace_back(x0 + step * i, y0 + step * j);
    }
    return slot;
  };
  // Claim vertices in lexicographic (row-major) order for stable numbering.
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const bool used = (i < nx && j < ny && keep(i, j)) || (i > 0 && j < ny && keep(i - 1, j)) ||
                        (i < nx && j > 0 && keep(i, j - 1)) || (i > 0 && j > 0 && keep(i - 1, j - 1));
      if (used) vid(i, j);
    }
  std::vector<Cell> cells;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!keep(i, j)) continue;
      const Index a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      cells.push_back(longest_edge_first(x, Cell{{a, b, c}, 0}));
      cells.push_back(longest_edge_first(x, Cell{{a, c, d}, 0}));
    }
  BoundaryMap boundary = tag_boundary(x, cells, classify);
  return TriMesh(std::move(x), std::move(cells), boundary);
}

}  // namespace detail

/// Unit square split into 2n^2 triangles; {y=0} and {x=0} are Dirichlet, the rest Neumann.
inline TriMesh unit_square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("unit_square_mesh: n must be >= 1");
  const double tol = 1e-12;
  return detail::structured_mesh(
      0.0, 0.0, n, n, 1.0 / n, [](int, int) { return true; },
      [tol](const Vec2& a, const Vec2& b) {
        const bool bottom = std::abs(a.y()) < tol && std::abs(b.y()) < tol;
        const bool left = std::abs(a.x()) < tol && std::abs(b.x()) < tol;
        return bottom || left ? BoundaryTag::GammaD : BoundaryTag::GammaN;
      });
}

/// L-shaped domain (-1,1)^2 minus (-1,0]^2 with n cells per unit length.
/// Segments on x = +-1 and y = +-1 are Neumann, the reentrant edges Dirichlet.
inline TriMesh lshape_mesh(int n) {
  if (n < 1) throw std::invalid_argument("lshape_mesh: n must be >= 1");
  const double tol = 1e-12;
  return detail::structured_mesh(
      -1.0, -1.0, 2 * n, 2 * n, 1.0 / n, [n](int i, int j) { return i >= n || j >= n; },
      [tol](const Vec2& a, const Vec2& b) {
        auto on = [tol](double u, double w, double c) {
          return std::abs(u - c) < tol && std::abs(w - c) < tol;
        };
        const bool outer = on(a.x(), b.x(), 1.0) || on(a.x(), b.x(), -1.0) ||
                           on(a.y(), b.y(), 1.0) || on(a.y(), b.y(), -1.0);
        return outer ? BoundaryTag::GammaN : BoundaryTag::GammaD;
      });
}

/// Red refinement: every cell is split into four similar children.
inline TriMesh uniform_refine(const TriMesh& mesh) {
  std::vector<Vec2> x = mesh.vertices();
  const Index nv = mesh.num_vertices();
  for (Index e = 0; e < mesh.num_edges(); ++e) x.push_back(mesh.edge_midpoint(e));

  std::vector<Cell> cells;
  cells.reserve(4 * mesh.cells().size());
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    const auto& ce = mesh.cell_edges(k);
    const Index m0 = nv + ce[0], m1 = nv + ce[1], m2 = nv + ce[2];
    for (const auto& v : {std::array<Index, 3>{c.v[0], m2, m1}, std::array<Index, 3>{m2, c.v[1], m0},
                          std::array<Index, 3>{m1, m0, c.v[2]}, std::array<Index, 3>{m0, m1, m2}})
      cells.push_back(detail::longest_edge_first(x, Cell{v, c.region}));
  }

  BoundaryMap boundary;
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (!ed.on_boundary()) continue;
    boundary.emplace(edge_key(ed.v[0], nv + e), ed.tag);
    boundary.emplace(edge_key(nv + e, ed.v[1]), ed.tag);
  }
  return TriMesh(std::move(x), std::move(cells), boundary);
}

/// Single: each marked cell is bisected once. Bisec3: all three edges of a
/// marked cell are bisected, splitting it into four.
enum class BisectionRule { Single, Bisec3 };

/// Newest-vertex bisection of the marked cells with conforming closure.
///
/// Every marked cell has its refinement edge marked; the closure then marks
/// the refinement edge of any cell owning a marked edge until no change.
/// Each cell is bisected along its refinement edge and the children are
/// bisected again when their refinement edge (an edge of the parent) is marked.
inline TriMesh bisect_refine(const TriMesh& mesh, const std::vector<Index>& marked,
                             BisectionRule rule = BisectionRule::Single) {
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  for (Index k : marked) {
    if (k < 0 || k >= mesh.num_cells())
      throw std::invalid_argument("bisect_refine: marked cell out of range");
    const int n = rule == BisectionRule::Single ? 1 : 3;
    for (int j = 0; j < n; ++j) edge_marked[mesh.cell_edges(k)[j]] = 1;
  }
  if (marked.empty()) return mesh;

  // Closure sweep over a work list of cells touched by newly marked edges.
  std::vector<Index> queue;
  for (Index e = 0; e < mesh.num_edges(); ++e)
    if (edge_marked[e])
      for (Index c : mesh.edge(e).cells)
        if (c >= 0) queue.push_back(c);
  while (!queue.empty()) {
    const Index k = queue.back();
    queue.pop_back();
    const Index re = mesh.cell_edges(k)[0];
    if (edge_marked[re]) continue;
    edge_marked[re] = 1;
    for (Index c : mesh.edge(re).cells)
      if (c >= 0) queue.push_back(c);
  }

  std::vector<Vec2> x = mesh.vertices();
  std::vector<Index> midpoint(mesh.num_edges(), -1);
  for (Index e = 0; e < mesh.num_edges(); ++e)
    if (edge_marked[e]) {
      midpoint[e] = static_cast<Index>(x.size());
      x.push_back(mesh.edge_midpoint(e));
    }
  auto mid_of = [&](Index a, Index b) -> Index {
    const Index e = mesh.find_edge(a, b);
    return e >= 0 ? midpoint[e] : -1;
  };

  std::vector<Cell> cells;
  cells.reserve(mesh.cells().size() + 3 * marked.size());
  std::function<void(const Cell&, int)> split = [&](const Cell& c, int depth) {
    // Only edges of the original mesh can carry a midpoint.
    const Index m = depth < 2 ? mid_of(c.v[1], c.v[2]) : -1;
    if (m < 0) {
      cells.push_back(c);
      return;
    }
    split(Cell{{m, c.v[0], c.v[1]}, c.region}, depth + 1);
    split(Cell{{m, c.v[2], c.v[0]}, c.region}, depth + 1);
  };
  for (const Cell& c : mesh.cells()) split(c, 0);

  BoundaryMap boundary;
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (!ed.on_boundary()) continue;
    if (midpoint[e] < 0) {
      boundary.emplace(EdgeKey{ed.v[0], ed.v[1]}, ed.tag);
    } else {
      boundary.emplace(edge_key(ed.v[0], midpoint[e]), ed.tag);
      boundary.emplace(edge_key(midpoint[e], ed.v[1]), ed.tag);
    }
  }
  return TriMesh(std::move(x), std::move(cells), boundary);
}

/// Minimum interior angle over all cells, in radians.
inline double min_angle(const TriMesh& mesh) {
  double best = M_PI;
  for (Index k = 0; k < mesh.num_cells(); ++k)
    for (int j = 0; j < 3; ++j) {
      const Vec2 a = mesh.cell_vertex(k, j);
      const Vec2 u = mesh.cell_vertex(k, (j + 1) % 3) - a, w = mesh.cell_vertex(k, (j + 2) % 3) - a;
      best = std::min(best, std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0)));
    }
  return best;
}

/// Structural checks: CCW cells, conformity, boundary tagging and optionally
/// the Euler relation of a simply connected domain. Returns the violations.
inline std::vector<std::string> check_invariants(const TriMesh& mesh, bool simply_connected = true) {
  std::vector<std::string> problems;
  for (Index k = 0; k < mesh.num_cells(); ++k)
    if (!(mesh.area(k) > 0.0)) problems.push_back("cell " + std::to_string(k) + " not CCW");
  std::map<EdgeKey, int> count;
  for (const Cell& c : mesh.cells())
    for (int j = 0; j < 3; ++j) ++count[edge_key(c.v[(j + 1) % 3], c.v[(j + 2) % 3])];
  if (static_cast<Index>(count.size()) != mesh.num_edges()) problems.push_back("edge count mismatch");
  for (const Edge& e : mesh.edges()) {
    const int n = count[{e.v[0], e.v[1]}];
    if (e.on_boundary() != (n == 1) || n > 2) problems.push_back("edge incidence mismatch");
    if (e.on_boundary() && e.tag == BoundaryTag::Interior) problems.push_back("untagged boundary edge");
    if (!e.on_boundary() && e.tag != BoundaryTag::Interior) problems.push_back("tagged interior edge");
  }
  // A hanging vertex h on edge (a, b) shows up as boundary edges (a, b) and
  // (a, h) with h strictly inside the segment.
  std::multimap<Index, Index> boundary_nbrs;
  for (const Edge& e : mesh.edges())
    if (e.on_boundary()) {
      boundary_nbrs.emplace(e.v[0], e.v[1]);
      boundary_nbrs.emplace(e.v[1], e.v[0]);
    }
  for (const auto& [a, b] : boundary_nbrs) {
    const Vec2 pa = mesh.vertex(a), ab = mesh.vertex(b) - pa;
    const auto [lo, hi] = boundary_nbrs.equal_range(a);
    for (auto it = lo; it != hi; ++it) {
      if (it->second == b) continue;
      const Vec2 ah = mesh.vertex(it->second) - pa;
      const double t = ah.dot(ab) / ab.squaredNorm();
      if (std::abs(cross(ab, ah)) <= 1e-12 * ab.squaredNorm() && t > 1e-12 && t < 1.0 - 1e-12)
        problems.push_back("hanging vertex " + std::to_string(it->second));
    }
  }
  if (simply_connected &&
      mesh.num_vertices() - mesh.num_edges() + mesh.num_cells() + 1 != 2)
    problems.push_back("Euler relation V - E + C + 1 = 2 violated");
  return problems;
}

}  // namespace poroflow
