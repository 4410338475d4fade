#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgw/presentation.hpp"
#include "rgw/words.hpp"

namespace rgw {

// All metric quantities live in half-edge units (hu): 1 edge = 2 hu. With l
// even every quantity of interest (l/4, Bal, surgery endpoints) is integral.
using Hu = int;

struct DirEdge {
  int edge = -1;
  int dir = +1;  // +1 traverses tail->head reading the label, -1 the inverse
  bool operator==(const DirEdge&) const = default;
  auto operator<=>(const DirEdge&) const = default;
};

struct Traversal {
  int cell;
  int pos;
  int dir;
};

// Combinatorial 2-complex whose 2-cells are l-gons. Vertices are indices,
// edges carry an optional letter label, cells carry the word read along
// their boundary plus provenance metadata (relator id, rotation,
// orientation) when they come from a presentation.
class Complex2 {
 public:
  struct Edge {
    int u = -1, v = -1;
    int label = -1;  // encoded Letter, or -1 for unlabeled synthetic edges
  };

  struct Cell {
    int relator_id = -1;
    int rotation = 0;
    int orientation = +1;
    std::vector<DirEdge> boundary;   // length l
    std::vector<Letter> word;        // letters read along boundary
  };

  int l = 0;
  int m = 0;  // alphabet size for label arithmetic; 0 = unlabeled synthetic
  bool synthetic = false;

  int num_vertices = 0;
  std::vector<Edge> edges;
  std::vector<Cell> cells;

  // Gluing provenance: number of boundary subpaths identified while
  // assembling from disjoint cells, and their lengths.
  std::vector<int> gluing_lengths;

  Complex2() = default;
  Complex2(int l_, int m_) : l(l_), m(m_) {}

  int add_vertex() { invalidate(); return num_vertices++; }

  int add_edge(int u, int v, int label = -1) {
    invalidate();
    edges.push_back({u, v, label});
    return static_cast<int>(edges.size()) - 1;
  }

  int add_cell(Cell c) {
    if (static_cast<int>(c.boundary.size()) != l)
      throw std::invalid_argument("add_cell: boundary length must be l");
    invalidate();
    cells.push_back(std::move(c));
    return static_cast<int>(cells.size()) - 1;
  }

  int size() const { return static_cast<int>(cells.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  int edge_tail(DirEdge de) const { return de.dir > 0 ? edges[de.edge].u : edges[de.edge].v; }
  int edge_head(DirEdge de) const { return de.dir > 0 ? edges[de.edge].v : edges[de.edge].u; }

  // Letter read when traversing de; -1 if unlabeled.
  int read_label(DirEdge de) const {
    int lab = edges[de.edge].label;
    if (lab < 0) return -1;
    return de.dir > 0 ? lab : letter_inverse(static_cast<Letter>(lab), m);
  }

  const std::vector<Traversal>& cells_through(int edge) const {
    ensure_incidence();
    return incidence_[static_cast<std::size_t>(edge)];
  }

  int deg(int edge) const { return static_cast<int>(cells_through(edge).size()); }

  // Cancel(Y) = sum over edges of (deg(e) - 1), in edges.
  long long cancel() const {
    long long s = 0;
    for (int e = 0; e < num_edges(); ++e) {
      int d = deg(e);
      if (d > 0) s += d - 1;
    }
    return s;
  }

  // Bal(Y) = 1/4 (|Y|+1) l - Cancel(Y), returned in hu (integral for even l).
  Hu balance_hu() const {
    long long v = static_cast<long long>(size() + 1) * l / 2 - 2 * cancel();
    return static_cast<Hu>(v);
  }

  int gluing_count() const { return static_cast<int>(gluing_lengths.size()); }

  // ---- metric layer: BFS on the half-edge subdivision ----
  // Node ids: vertex v -> v, midpoint of edge e -> num_vertices + e.
  int midpoint_node(int edge) const { return num_vertices + edge; }
  int num_nodes() const { return num_vertices + num_edges(); }

  std::vector<Hu> hu_distances_from(int node, Hu cutoff = -1) const {
    ensure_adjacency();
    std::vector<Hu> dist(static_cast<std::size_t>(num_nodes()), -1);
    std::deque<int> q;
    dist[static_cast<std::size_t>(node)] = 0;
    q.push_back(node);
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      Hu dx = dist[static_cast<std::size_t>(x)];
      if (cutoff >= 0 && dx >= cutoff) continue;
      for (int y : adjacency_[static_cast<std::size_t>(x)]) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dx + 1;
          q.push_back(y);
        }
      }
    }
    return dist;
  }

  // Shortest path between edge midpoints in hu; -1 if unreachable.
  Hu midpoint_distance_hu(int e1, int e2) const {
    if (e1 == e2) return 0;
    auto dist = hu_distances_from(midpoint_node(e1));
    return dist[static_cast<std::size_t>(midpoint_node(e2))];
  }

  bool skeleton_connected() const {
    if (num_nodes() == 0) return true;
    auto dist = hu_distances_from(0);
    for (Hu d : dist)
      if (d < 0) return false;
    return true;
  }

  // Deterministic labelled-graph lookup: the unique edge leaving v that
  // reads `label`, if any. Subcomplexes of a Cayley complex have at most one.
  std::optional<DirEdge> out_edge(int v, int label) const {
    ensure_out_map();
    auto it = out_map_.find({v, label});
    if (it == out_map_.end()) return std::nullopt;
    return it->second;
  }

  bool deterministic_labels() const {
    std::set<std::pair<int, int>> seen;
    for (int e = 0; e < num_edges(); ++e) {
      for (int dir : {+1, -1}) {
        DirEdge de{e, dir};
        int lab = read_label(de);
        if (lab < 0) continue;
        if (!seen.insert({edge_tail(de), lab}).second) return false;
      }
    }
    return true;
  }

  void record_gluing(int len) { gluing_lengths.push_back(len); }

  void invalidate() const {
    incidence_valid_ = false;
    adjacency_valid_ = false;
    out_map_valid_ = false;
  }

 private:
  mutable bool incidence_valid_ = false;
  mutable std::vector<std::vector<Traversal>> incidence_;
  mutable bool adjacency_valid_ = false;
  mutable std::vector<std::vector<int>> adjacency_;
  mutable bool out_map_valid_ = false;
  mutable std::map<std::pair<int, int>, DirEdge> out_map_;

  void ensure_incidence() const {
    if (incidence_valid_) return;
    incidence_.assign(static_cast<std::size_t>(num_edges()), {});
    for (int c = 0; c < size(); ++c) {
      const Cell& cell = cells[static_cast<std::size_t>(c)];
      for (int p = 0; p < static_cast<int>(cell.boundary.size()); ++p) {
        DirEdge de = cell.boundary[static_cast<std::size_t>(p)];
        incidence_[static_cast<std::size_t>(de.edge)].push_back({c, p, de.dir});
      }
    }
    incidence_valid_ = true;
  }

  void ensure_adjacency() const {
    if (adjacency_valid_) return;
    adjacency_.assign(static_cast<std::size_t>(num_nodes()), {});
    for (int e = 0; e < num_edges(); ++e) {
      int mnode = midpoint_node(e);
      adjacency_[static_cast<std::size_t>(mnode)].push_back(edges[static_cast<std::size_t>(e)].u);
      adjacency_[static_cast<std::size_t>(mnode)].push_back(edges[static_cast<std::size_t>(e)].v);
      adjacency_[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].u)].push_back(mnode);
      adjacency_[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].v)].push_back(mnode);
    }
    adjacency_valid_ = true;
  }

  void ensure_out_map() const {
    if (out_map_valid_) return;
    out_map_.clear();
    for (int e = 0; e < num_edges(); ++e) {
      for (int dir : {+1, -1}) {
        DirEdge de{e, dir};
        int lab = read_label(de);
        if (lab < 0) continue;
        out_map_[{edge_tail(de), lab}] = de;
      }
    }
    out_map_valid_ = true;
  }
};

// ---- builders ----

// A single embedded l-gon reading w around its boundary.
inline Complex2 make_polygon(const Word& w, int m, int relator_id = -1,
                             int rotation = 0, int orientation = +1) {
  Complex2 cx(w.size(), m);
  for (int i = 0; i < w.size(); ++i) cx.add_vertex();
  Complex2::Cell cell;
  cell.relator_id = relator_id;
  cell.rotation = rotation;
  cell.orientation = orientation;
  for (int i = 0; i < w.size(); ++i) {
    int e = cx.add_edge(i, (i + 1) % w.size(), w[i]);
    cell.boundary.push_back({e, +1});
    cell.word.push_back(w[i]);
  }
  cx.add_cell(std::move(cell));
  return cx;
}

// Attach a fresh l-gon reading w to Y, identifying positions
// [pos0, pos0 + path.size()) of its boundary with the directed path `path`
// in Y. Labels along the path must match. Returns the new cell index.
inline int attach_polygon(Complex2& Y, const Word& w, int relator_id,
                          const std::vector<DirEdge>& path, int pos0,
                          int rotation = 0, int orientation = +1) {
  const int l = Y.l;
  if (w.size() != l) throw std::invalid_argument("attach_polygon: word length != l");
  const int k = static_cast<int>(path.size());
  if (k > l) throw std::invalid_argument("attach_polygon: path longer than boundary");
  for (int i = 0; i + 1 < k; ++i)
    if (Y.edge_head(path[static_cast<std::size_t>(i)]) !=
        Y.edge_tail(path[static_cast<std::size_t>(i + 1)]))
      throw std::invalid_argument("attach_polygon: path not contiguous");
  for (int i = 0; i < k; ++i) {
    int lab = Y.read_label(path[static_cast<std::size_t>(i)]);
    if (lab >= 0 && lab != w[(pos0 + i) % l])
      throw std::invalid_argument("attach_polygon: label mismatch along gluing path");
  }

  // Vertices of the new cell boundary: reuse path vertices, create the rest.
  std::vector<int> verts(static_cast<std::size_t>(l), -1);
  for (int i = 0; i < k; ++i) {
    verts[static_cast<std::size_t>((pos0 + i) % l)] = Y.edge_tail(path[static_cast<std::size_t>(i)]);
    verts[static_cast<std::size_t>((pos0 + i + 1) % l)] = Y.edge_head(path[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < l; ++i)
    if (verts[static_cast<std::size_t>(i)] < 0) verts[static_cast<std::size_t>(i)] = Y.add_vertex();

  Complex2::Cell cell;
  cell.relator_id = relator_id;
  cell.rotation = rotation;
  cell.orientation = orientation;
  cell.boundary.assign(static_cast<std::size_t>(l), DirEdge{});
  cell.word.assign(w.letters.begin(), w.letters.end());
  for (int i = 0; i < k; ++i)
    cell.boundary[static_cast<std::size_t>((pos0 + i) % l)] = path[static_cast<std::size_t>(i)];
  for (int i = 0; i < l; ++i) {
    int p = (pos0 + k + i) % l;
    if (i >= l - k) break;
    int e = Y.add_edge(verts[static_cast<std::size_t>(p)],
                       verts[static_cast<std::size_t>((p + 1) % l)], w[p]);
    cell.boundary[static_cast<std::size_t>(p)] = {e, +1};
  }
  if (k > 0) Y.record_gluing(k);
  return Y.add_cell(std::move(cell));
}

// ---- checkers ----

// True iff the induced labelling is consistent and the map to the
// presentation complex is locally injective around edges: no two traversals
// of one edge read the same relator side in the same direction.
inline bool check_fulfilled(const Complex2& Y) {
  for (int c = 0; c < Y.size(); ++c) {
    const auto& cell = Y.cells[static_cast<std::size_t>(c)];
    for (int p = 0; p < Y.l; ++p) {
      int lab = Y.read_label(cell.boundary[static_cast<std::size_t>(p)]);
      if (lab >= 0 && lab != cell.word[static_cast<std::size_t>(p)]) return false;
      if (Y.edge_head(cell.boundary[static_cast<std::size_t>(p)]) !=
          Y.edge_tail(cell.boundary[static_cast<std::size_t>((p + 1) % Y.l)]))
        return false;
    }
  }
  for (int e = 0; e < Y.num_edges(); ++e) {
    std::set<std::tuple<int, int, int>> sides;  // (relator-or-cell key, std position, direction)
    for (const Traversal& t : Y.cells_through(e)) {
      const auto& cell = Y.cells[static_cast<std::size_t>(t.cell)];
      int key = cell.relator_id >= 0 ? cell.relator_id : -1 - t.cell;
      int stdpos = cell.relator_id >= 0 ? (t.pos + cell.rotation) % Y.l : t.pos;
      if (!sides.insert({key, stdpos, t.dir * cell.orientation}).second) return false;
    }
  }
  return true;
}

// Cancel(Y) > (d + eps) |Y| l, compared exactly.
inline bool isoperimetric_violation(const Complex2& Y, const Rational& d, const Rational& eps) {
  Rational lhs(Y.cancel());
  Rational rhs = (d + eps) * Rational(static_cast<long long>(Y.size()) * Y.l);
  return rhs < lhs;
}

// |Y| <= K and assembled from its cells by <= K' boundary-subpath gluings.
inline bool is_kk_bounded(const Complex2& Y, int K, int Kp) {
  return Y.size() <= K && Y.gluing_count() <= Kp;
}

// ---- exports ----

inline std::string to_dot(const Complex2& Y,
                          const std::vector<std::pair<int, int>>* diagonals = nullptr) {
  std::ostringstream os;
  os << "graph complex {\n  node [shape=point];\n";
  for (int v = 0; v < Y.num_vertices; ++v) os << "  v" << v << ";\n";
  for (int e = 0; e < Y.num_edges(); ++e) {
    os << "  m" << e << " [shape=circle, width=0.05, label=\"\"];\n";
    std::string lab = Y.edges[static_cast<std::size_t>(e)].label >= 0 && Y.m > 0
        ? std::string(1, letter_char(static_cast<Letter>(Y.edges[static_cast<std::size_t>(e)].label), Y.m))
        : std::string("");
    os << "  v" << Y.edges[static_cast<std::size_t>(e)].u << " -- m" << e
       << " [label=\"" << lab << "\"];\n";
    os << "  m" << e << " -- v" << Y.edges[static_cast<std::size_t>(e)].v << ";\n";
  }
  if (diagonals) {
    for (auto [e1, e2] : *diagonals)
      os << "  m" << e1 << " -- m" << e2 << " [style=dashed, color=red];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace rgw
