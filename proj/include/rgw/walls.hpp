#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rgw/patch.hpp"
#include "rgw/tilewalls.hpp"

namespace rgw {

// ---------------------------------------------------------------------------
// Wall structure on a patch: every 2-cell of the patch inherits the midpoint
// pairing of its relator's tile, transported along the rotation recorded in
// the cell metadata. The wall classes are the equivalence classes of edge
// midpoints generated by the per-cell pairings.
// ---------------------------------------------------------------------------

struct WallStructureOnPatch {
  std::vector<Pairing> pairings;        // per patch cell
  std::vector<bool> cell_ok;            // pairing pulled back successfully
  std::vector<std::vector<int>> walls;  // class -> midpoint edge ids
  std::vector<int> wall_of_edge;        // edge id -> wall index
  std::vector<std::string> diagnoses;
  bool ok() const { return diagnoses.empty(); }
};

// A diagonal of a cell: the chord joining the midpoints of the boundary
// edges at positions p < q (paired positions of the cell's pairing).
struct WallDiag {
  int cell = 0;
  int p = 0, q = 0;    // boundary positions, p < q
  int e1 = 0, e2 = 0;  // midpoint edge ids at p and q
};

namespace detail {

inline int mod_l(int x, int l) { return (x % l + l) % l; }

// Position q of a patch cell with rotation rot_patch reads the same relator
// edge as position (q + rot_patch - rot_tile) mod l of the tile cell.
inline Pairing pull_back_pairing(const Pairing& tile_pr, int l, int rot_tile, int rot_patch) {
  Pairing out(static_cast<std::size_t>(l));
  for (int q = 0; q < l; ++q) {
    int p = mod_l(q + rot_patch - rot_tile, l);
    out[static_cast<std::size_t>(q)] =
        mod_l(tile_pr[static_cast<std::size_t>(p)] + rot_tile - rot_patch, l);
  }
  return out;
}

// The pairing expressed on relator edge indices instead of boundary positions.
inline Pairing relator_frame(const Pairing& pr, int l, int rotation) {
  return pull_back_pairing(pr, l, rotation, 0);
}

// Index of the (unique) cell of the tile complex carrying `relator`; -1 if
// absent, -2 if duplicated.
inline int tile_cell_of_relator(const Tile& t, int relator) {
  int found = -1;
  for (int c = 0; c < t.cx.size(); ++c)
    if (t.cx.cells[static_cast<std::size_t>(c)].relator_id == relator) {
      if (found >= 0) return -2;
      found = c;
    }
  return found;
}

inline bool involution_ok(const Pairing& pr, int l) {
  for (int p = 0; p < l; ++p) {
    int q = pr[static_cast<std::size_t>(p)];
    if (q < 0 || q >= l || q == p || pr[static_cast<std::size_t>(q)] != p) return false;
  }
  return true;
}

}  // namespace detail

inline std::vector<WallDiag> pairing_diagonals(const Complex2& cx,
                                               const std::vector<Pairing>& prs) {
  std::vector<WallDiag> out;
  for (int c = 0; c < cx.size(); ++c) {
    const auto& bd = cx.cells[static_cast<std::size_t>(c)].boundary;
    const Pairing& pr = prs[static_cast<std::size_t>(c)];
    for (int p = 0; p < cx.l; ++p) {
      int q = pr[static_cast<std::size_t>(p)];
      if (q <= p) continue;
      out.push_back({c, p, q, bd[static_cast<std::size_t>(p)].edge,
                     bd[static_cast<std::size_t>(q)].edge});
    }
  }
  return out;
}

// Partition the edge midpoints into wall classes generated by the pairings.
inline void group_wall_classes(const Complex2& cx, const std::vector<Pairing>& prs,
                               std::vector<std::vector<int>>& walls,
                               std::vector<int>& wall_of_edge) {
  std::vector<int> parent(static_cast<std::size_t>(cx.num_edges()));
  for (int e = 0; e < cx.num_edges(); ++e) parent[static_cast<std::size_t>(e)] = e;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const WallDiag& d : pairing_diagonals(cx, prs))
    parent[static_cast<std::size_t>(find(d.e1))] = find(d.e2);
  std::map<int, int> index;
  wall_of_edge.assign(static_cast<std::size_t>(cx.num_edges()), -1);
  walls.clear();
  for (int e = 0; e < cx.num_edges(); ++e) {
    int r = find(e);
    auto [it, fresh] = index.try_emplace(r, static_cast<int>(walls.size()));
    if (fresh) walls.push_back({});
    wall_of_edge[static_cast<std::size_t>(e)] = it->second;
    walls[static_cast<std::size_t>(it->second)].push_back(e);
  }
}

inline WallStructureOnPatch instantiate_walls(const CayleyPatch& patch,
                                              const TileAssignment& A,
                                              const std::map<int, TileWallStructure>& S) {
  const Complex2& cx = patch.cx;
  const int l = cx.l;
  WallStructureOnPatch W;
  W.pairings.assign(static_cast<std::size_t>(cx.size()), antipodal_pairing(l));
  W.cell_ok.assign(static_cast<std::size_t>(cx.size()), true);

  auto fail = [&](int c, const std::string& msg) {
    W.cell_ok[static_cast<std::size_t>(c)] = false;
    W.diagnoses.push_back("cell " + std::to_string(c) + ": " + msg);
  };

  for (int c = 0; c < cx.size(); ++c) {
    const auto& cell = cx.cells[static_cast<std::size_t>(c)];
    int r = cell.relator_id;
    if (r < 0 || r >= static_cast<int>(A.tile_of_relator.size())) {
      fail(c, "no tile assignment for relator " + std::to_string(r));
      continue;
    }
    int t = A.tile_of_relator[static_cast<std::size_t>(r)];
    auto it = S.find(t);
    if (it == S.end()) {
      fail(c, "missing structure for tile " + std::to_string(t));
      continue;
    }
    if (!it->second.ok()) {
      fail(c, "tile " + std::to_string(t) + " structure is degenerate");
      continue;
    }
    const Tile& T = A.tiles[static_cast<std::size_t>(t)];
    int tc = detail::tile_cell_of_relator(T, r);
    if (tc < 0) {
      fail(c, "relator " + std::to_string(r) + " not uniquely realized in its tile");
      continue;
    }
    const auto& tcell = T.cx.cells[static_cast<std::size_t>(tc)];
    if (tcell.orientation != +1 || cell.orientation != +1) {
      fail(c, "unsupported cell orientation");
      continue;
    }
    W.pairings[static_cast<std::size_t>(c)] = detail::pull_back_pairing(
        it->second.pairings[static_cast<std::size_t>(tc)], l, tcell.rotation, cell.rotation);
    if (!detail::involution_ok(W.pairings[static_cast<std::size_t>(c)], l))
      fail(c, "pulled-back pairing is not a fixed-point-free involution");
  }

  // Pull-back consistency: a core cell borrowed from another orbit carries
  // the same pairing in the borrowing tile as in its own orbit's tile.
  for (const auto& [t, St] : S) {
    if (!St.ok()) continue;
    const Tile& T = A.tiles[static_cast<std::size_t>(t)];
    for (int c2 = 0; c2 < T.cx.size(); ++c2) {
      int r2 = T.cx.cells[static_cast<std::size_t>(c2)].relator_id;
      if (r2 < 0 || r2 >= static_cast<int>(A.tile_of_relator.size())) continue;
      int own = A.tile_of_relator[static_cast<std::size_t>(r2)];
      if (own == t) continue;
      auto it2 = S.find(own);
      if (it2 == S.end() || !it2->second.ok()) continue;
      int tc2 = detail::tile_cell_of_relator(A.tiles[static_cast<std::size_t>(own)], r2);
      if (tc2 < 0) continue;
      Pairing a = detail::relator_frame(
          St.pairings[static_cast<std::size_t>(c2)], l,
          T.cx.cells[static_cast<std::size_t>(c2)].rotation);
      Pairing b = detail::relator_frame(
          it2->second.pairings[static_cast<std::size_t>(tc2)], l,
          A.tiles[static_cast<std::size_t>(own)].cx.cells[static_cast<std::size_t>(tc2)].rotation);
      if (a != b)
        W.diagnoses.push_back("pull-back inconsistency: relator " + std::to_string(r2) +
                              " differs between tiles " + std::to_string(t) + " and " +
                              std::to_string(own));
    }
  }

  group_wall_classes(cx, W.pairings, W.walls, W.wall_of_edge);
  return W;
}

// ---------------------------------------------------------------------------
// Tracing: grow the wall component through a starting midpoint by crossing
// every incident cell via its pairing.
// ---------------------------------------------------------------------------

struct TracedComponent {
  int start_edge = -1;
  std::vector<int> midpoints;  // edge ids, BFS order from the start
  std::vector<WallDiag> diagonals;
  bool truncated_budget = false;    // stopped by the cell budget
  bool truncated_frontier = false;  // touches a vertex whose star may be incomplete
};

inline TracedComponent trace(const Complex2& cx, const std::vector<Pairing>& prs,
                             const std::vector<bool>* vertex_complete, int start_edge,
                             int max_cells = 1000000) {
  TracedComponent out;
  out.start_edge = start_edge;
  auto at_frontier = [&](int e) {
    if (!vertex_complete) return false;
    const auto& ed = cx.edges[static_cast<std::size_t>(e)];
    return !(*vertex_complete)[static_cast<std::size_t>(ed.u)] ||
           !(*vertex_complete)[static_cast<std::size_t>(ed.v)];
  };
  std::set<int> seen_mid{start_edge}, seen_cells;
  std::set<std::tuple<int, int, int>> seen_diag;
  std::deque<int> q{start_edge};
  while (!q.empty()) {
    int e = q.front();
    q.pop_front();
    out.midpoints.push_back(e);
    if (at_frontier(e)) out.truncated_frontier = true;
    for (const Traversal& t : cx.cells_through(e)) {
      if (!seen_cells.count(t.cell)) {
        if (static_cast<int>(seen_cells.size()) >= max_cells) {
          out.truncated_budget = true;
          continue;
        }
        seen_cells.insert(t.cell);
      }
      int p = t.pos;
      int pq = prs[static_cast<std::size_t>(t.cell)][static_cast<std::size_t>(p)];
      const auto& bd = cx.cells[static_cast<std::size_t>(t.cell)].boundary;
      int e2 = bd[static_cast<std::size_t>(pq)].edge;
      int lo = std::min(p, pq), hi = std::max(p, pq);
      if (seen_diag.insert({t.cell, lo, hi}).second)
        out.diagonals.push_back({t.cell, lo, hi, bd[static_cast<std::size_t>(lo)].edge,
                                 bd[static_cast<std::size_t>(hi)].edge});
      if (seen_mid.insert(e2).second) q.push_back(e2);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embeddedness: a wall is an embedded tree iff its diagonal graph is a tree
// and no two of its diagonals cross inside one cell (interleaved chords).
// ---------------------------------------------------------------------------

// Chords (p1,q1) and (p2,q2) of an l-gon cross iff exactly one endpoint of
// the second lies strictly between the endpoints of the first.
inline bool chords_cross(int p1, int q1, int p2, int q2) {
  auto inside = [&](int x) { return p1 < x && x < q1; };
  if (p2 == p1 || p2 == q1 || q2 == p1 || q2 == q1) return false;
  return inside(p2) != inside(q2);
}

struct WallFinding {
  int wall = -1;
  bool interior = true;
  bool cycle = false;
  bool crossing = false;
  bool cell_revisit = false;
};

struct EmbeddingReport {
  int components = 0;
  int interior_components = 0;
  int truncated_components = 0;
  int tree_violations = 0;      // cycles in the diagonal graph
  int crossing_violations = 0;  // interleaved chords in one cell
  int cell_revisits = 0;        // a wall passing twice through one cell
  int interior_self_intersections = 0;  // interior walls with cycle or crossing
  std::vector<WallFinding> violations;
};

inline EmbeddingReport check_embedded_trees(const Complex2& cx,
                                            const std::vector<Pairing>& prs,
                                            const std::vector<bool>* vertex_complete) {
  std::vector<std::vector<int>> walls;
  std::vector<int> wall_of_edge;
  group_wall_classes(cx, prs, walls, wall_of_edge);
  std::vector<std::vector<WallDiag>> per_wall(walls.size());
  for (const WallDiag& d : pairing_diagonals(cx, prs))
    per_wall[static_cast<std::size_t>(wall_of_edge[static_cast<std::size_t>(d.e1)])].push_back(d);

  EmbeddingReport rep;
  auto at_frontier = [&](int e) {
    if (!vertex_complete) return false;
    const auto& ed = cx.edges[static_cast<std::size_t>(e)];
    return !(*vertex_complete)[static_cast<std::size_t>(ed.u)] ||
           !(*vertex_complete)[static_cast<std::size_t>(ed.v)];
  };
  for (std::size_t w = 0; w < walls.size(); ++w) {
    ++rep.components;
    WallFinding f;
    f.wall = static_cast<int>(w);
    for (int e : walls[w])
      if (at_frontier(e)) f.interior = false;
    if (f.interior)
      ++rep.interior_components;
    else
      ++rep.truncated_components;
    // The diagonal graph on the wall's midpoints is connected by
    // construction, so it is a tree iff #diagonals = #midpoints - 1.
    f.cycle = static_cast<int>(per_wall[w].size()) >
              static_cast<int>(walls[w].size()) - 1;
    std::map<int, std::vector<std::pair<int, int>>> by_cell;
    for (const WallDiag& d : per_wall[w]) by_cell[d.cell].push_back({d.p, d.q});
    for (const auto& [cell, chords] : by_cell) {
      if (chords.size() >= 2) f.cell_revisit = true;
      for (std::size_t i = 0; i < chords.size(); ++i)
        for (std::size_t j = i + 1; j < chords.size(); ++j)
          if (chords_cross(chords[i].first, chords[i].second, chords[j].first,
                           chords[j].second))
            f.crossing = true;
    }
    if (f.cycle) ++rep.tree_violations;
    if (f.crossing) ++rep.crossing_violations;
    if (f.cell_revisit) ++rep.cell_revisits;
    if (f.interior && (f.cycle || f.crossing)) ++rep.interior_self_intersections;
    if (f.cycle || f.crossing || f.cell_revisit) rep.violations.push_back(f);
  }
  return rep;
}

inline EmbeddingReport check_embedded_trees(const CayleyPatch& patch,
                                            const WallStructureOnPatch& W) {
  return check_embedded_trees(patch.cx, W.pairings, &patch.complete);
}

// ---------------------------------------------------------------------------
// Segments: simple paths in a wall's diagonal graph.
// ---------------------------------------------------------------------------

struct SegmentStep {
  int cell = -1;
  int p_in = -1, p_out = -1;  // boundary positions of the entry/exit midpoints
  int e_in = -1, e_out = -1;  // midpoint edge ids
};

struct HypergraphSegment {
  std::vector<SegmentStep> steps;  // consecutive steps share a midpoint
  int x0 = -1, xn = -1;            // endpoint midpoints (edge ids)
  bool truncated = false;
};

// Leaf-to-leaf paths of a tree component (empty when the component is not a
// tree or has no diagonal). Deterministic: leaves ordered by edge id.
inline std::vector<HypergraphSegment> extract_segments(const TracedComponent& comp,
                                                       int max_segments = 64) {
  std::vector<HypergraphSegment> out;
  if (comp.diagonals.empty()) return out;
  if (static_cast<int>(comp.diagonals.size()) !=
      static_cast<int>(comp.midpoints.size()) - 1)
    return out;  // not a tree
  std::map<int, std::vector<int>> adj;  // midpoint -> incident diagonal indices
  for (std::size_t i = 0; i < comp.diagonals.size(); ++i) {
    adj[comp.diagonals[i].e1].push_back(static_cast<int>(i));
    adj[comp.diagonals[i].e2].push_back(static_cast<int>(i));
  }
  std::vector<int> leaves;
  for (const auto& [e, ds] : adj)
    if (ds.size() == 1) leaves.push_back(e);
  auto make_step = [&](const WallDiag& d, int enter_edge) {
    SegmentStep s;
    s.cell = d.cell;
    if (d.e1 == enter_edge) {
      s.p_in = d.p; s.p_out = d.q; s.e_in = d.e1; s.e_out = d.e2;
    } else {
      s.p_in = d.q; s.p_out = d.p; s.e_in = d.e2; s.e_out = d.e1;
    }
    return s;
  };
  for (std::size_t a = 0; a < leaves.size(); ++a) {
    for (std::size_t b = a + 1; b < leaves.size(); ++b) {
      if (static_cast<int>(out.size()) >= max_segments) return out;
      // BFS path from leaves[a] to leaves[b].
      std::map<int, std::pair<int, int>> prev;  // midpoint -> (parent, diag idx)
      std::deque<int> q{leaves[a]};
      prev[leaves[a]] = {leaves[a], -1};
      while (!q.empty() && !prev.count(leaves[b])) {
        int x = q.front();
        q.pop_front();
        for (int di : adj[x]) {
          const WallDiag& d = comp.diagonals[static_cast<std::size_t>(di)];
          int y = d.e1 == x ? d.e2 : d.e1;
          if (!prev.count(y)) {
            prev[y] = {x, di};
            q.push_back(y);
          }
        }
      }
      if (!prev.count(leaves[b])) continue;
      std::vector<int> diag_path;
      for (int at = leaves[b]; at != leaves[a]; at = prev[at].first)
        diag_path.push_back(prev[at].second);
      std::reverse(diag_path.begin(), diag_path.end());
      HypergraphSegment seg;
      seg.x0 = leaves[a];
      seg.xn = leaves[b];
      seg.truncated = comp.truncated_budget || comp.truncated_frontier;
      int enter = leaves[a];
      for (int di : diag_path) {
        SegmentStep s = make_step(comp.diagonals[static_cast<std::size_t>(di)], enter);
        enter = s.e_out;
        seg.steps.push_back(s);
      }
      out.push_back(std::move(seg));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tile instances in the patch: the unique label-respecting realization of a
// tile complex grown from one cell (check_fulfilled guarantees that each
// directed relator side traverses a given edge at most once, so the
// extension across a shared edge is deterministic).
// ---------------------------------------------------------------------------

struct InstanceRealization {
  int tile = -1;
  std::map<int, int> cell_map;  // tile cell -> patch cell
  std::set<int> patch_cells;
  std::set<int> patch_edges;
  bool complete = true;    // every tile cell realized
  bool consistent = true;  // no conflicting identifications
};

inline InstanceRealization realize_instance(const Complex2& px, const Tile& T,
                                            int tile_index, int tc0, int pc0) {
  const int l = px.l;
  InstanceRealization I;
  I.tile = tile_index;
  std::map<int, int> edge_map;  // tile edge -> patch edge

  auto map_cell = [&](int tc, int pc) {
    I.cell_map[tc] = pc;
    I.patch_cells.insert(pc);
    const auto& tcell = T.cx.cells[static_cast<std::size_t>(tc)];
    const auto& pcell = px.cells[static_cast<std::size_t>(pc)];
    for (int p = 0; p < l; ++p) {
      int q = detail::mod_l(p + tcell.rotation - pcell.rotation, l);
      int te = tcell.boundary[static_cast<std::size_t>(p)].edge;
      int pe = pcell.boundary[static_cast<std::size_t>(q)].edge;
      auto [it, fresh] = edge_map.try_emplace(te, pe);
      if (!fresh && it->second != pe) I.consistent = false;
      I.patch_edges.insert(pe);
    }
  };

  map_cell(tc0, pc0);
  std::deque<int> q{tc0};
  while (!q.empty()) {
    int tc = q.front();
    q.pop_front();
    const auto& tcell = T.cx.cells[static_cast<std::size_t>(tc)];
    for (int p = 0; p < l; ++p) {
      int te = tcell.boundary[static_cast<std::size_t>(p)].edge;
      for (const Traversal& tt : T.cx.cells_through(te)) {
        if (I.cell_map.count(tt.cell)) continue;
        const auto& ncell = T.cx.cells[static_cast<std::size_t>(tt.cell)];
        if (ncell.orientation != +1) { I.consistent = false; continue; }
        int pe = edge_map.at(te);
        int want_std = detail::mod_l(tt.pos + ncell.rotation, l);
        int found = -1;
        for (const Traversal& pt : px.cells_through(pe)) {
          const auto& pcell = px.cells[static_cast<std::size_t>(pt.cell)];
          if (pcell.relator_id != ncell.relator_id) continue;
          if (detail::mod_l(pt.pos + pcell.rotation, l) != want_std) continue;
          if (pt.dir * pcell.orientation != tt.dir * ncell.orientation) continue;
          found = pt.cell;
          break;
        }
        if (found < 0) {
          I.complete = false;
          continue;
        }
        map_cell(tt.cell, found);
        q.push_back(tt.cell);
      }
    }
  }
  if (static_cast<int>(I.cell_map.size()) != T.cx.size()) I.complete = false;
  return I;
}

// ---------------------------------------------------------------------------
// Decomposition of a segment: consecutive diagonals lying in one full-tile
// instance form one factor; a diagonal whose in-tile wall misses the tile
// core stands alone with its single cell as the augmented tile.
// ---------------------------------------------------------------------------

struct Factor {
  int first = 0, last = 0;  // step index range, inclusive
  int tile = -1;            // orbit tile index
  Augmented kind = Augmented::SingleCell;
  std::vector<int> cells;  // patch cells of the augmented tile, sorted
  bool realized = true;    // instance fully present in the patch
};

struct Decomposition {
  std::vector<Factor> factors;
  bool unique_ok = true;  // every factor's witness tile was determined uniquely
  std::vector<std::string> notes;
  int length() const { return static_cast<int>(factors.size()); }
};

inline Decomposition decompose(const HypergraphSegment& seg, const Complex2& px,
                               const TileAssignment& A,
                               const std::map<int, TileWallStructure>& S) {
  const int l = px.l;
  Decomposition dec;
  for (std::size_t i = 0; i < seg.steps.size(); ++i) {
    const SegmentStep& st = seg.steps[i];
    const auto& pcell = px.cells[static_cast<std::size_t>(st.cell)];
    int r = pcell.relator_id;
    Factor f;
    f.first = f.last = static_cast<int>(i);
    if (r < 0 || r >= static_cast<int>(A.tile_of_relator.size())) {
      dec.unique_ok = false;
      dec.notes.push_back("step " + std::to_string(i) + ": cell has no relator");
      f.cells = {st.cell};
      dec.factors.push_back(std::move(f));
      continue;
    }
    f.tile = A.tile_of_relator[static_cast<std::size_t>(r)];
    const Tile& T = A.tiles[static_cast<std::size_t>(f.tile)];
    int tc = detail::tile_cell_of_relator(T, r);
    auto sit = S.find(f.tile);
    if (tc < 0 || sit == S.end() || !sit->second.ok()) {
      dec.unique_ok = false;
      dec.notes.push_back("step " + std::to_string(i) + ": tile structure unavailable");
      f.cells = {st.cell};
      dec.factors.push_back(std::move(f));
      continue;
    }
    const auto& tcell = T.cx.cells[static_cast<std::size_t>(tc)];
    int p_in_t = detail::mod_l(st.p_in + pcell.rotation - tcell.rotation, l);
    int p_out_t = detail::mod_l(st.p_out + pcell.rotation - tcell.rotation, l);
    int te_in = tcell.boundary[static_cast<std::size_t>(p_in_t)].edge;
    int te_out = tcell.boundary[static_cast<std::size_t>(p_out_t)].edge;
    int w_in = sit->second.wall_of_edge[static_cast<std::size_t>(te_in)];
    int w_out = sit->second.wall_of_edge[static_cast<std::size_t>(te_out)];
    if (w_in != w_out) {
      dec.unique_ok = false;
      dec.notes.push_back("step " + std::to_string(i) +
                          ": diagonal endpoints lie on different tile walls");
    }
    f.kind = augmented_tile(T.cx, sit->second, T.core_cells, w_in);
    if (f.kind == Augmented::SingleCell || T.size() == 1) {
      f.cells = {st.cell};
    } else {
      InstanceRealization I = realize_instance(px, T, f.tile, tc, st.cell);
      if (!I.consistent) {
        dec.unique_ok = false;
        dec.notes.push_back("step " + std::to_string(i) +
                            ": inconsistent tile realization");
      }
      f.realized = I.complete && I.consistent;
      f.cells.assign(I.patch_cells.begin(), I.patch_cells.end());
    }
    // Merge with the previous factor when both lie in the same instance.
    if (!dec.factors.empty()) {
      Factor& prev = dec.factors.back();
      if (prev.kind == Augmented::FullTile && f.kind == Augmented::FullTile &&
          prev.tile == f.tile && prev.cells == f.cells) {
        prev.last = static_cast<int>(i);
        continue;
      }
    }
    dec.factors.push_back(std::move(f));
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Tightening: merge nested factors; a pair of non-adjacent factors sharing a
// cell witnesses a returning subsegment; adjacent factors may only share
// cells in the single-diagonal-off-the-core pattern.
// ---------------------------------------------------------------------------

struct TightenResult {
  enum Kind { Tight, Returning } kind = Tight;
  Decomposition dec;
  int ret_first = -1, ret_last = -1;  // factor range of the returning part
  bool fully_tight = true;  // adjacent-sharing condition verified
  std::vector<std::string> notes;
};

namespace detail {

inline bool cells_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool cells_intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) ++i; else ++j;
  }
  return false;
}

}  // namespace detail

inline TightenResult tighten(Decomposition dec, const HypergraphSegment& seg,
                             const Complex2& px) {
  TightenResult res;
  auto& fs = dec.factors;
  // Merge adjacent factors when one augmented tile contains the other.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
      bool fwd = detail::cells_subset(fs[i + 1].cells, fs[i].cells);
      bool bwd = detail::cells_subset(fs[i].cells, fs[i + 1].cells);
      if (!fwd && !bwd) continue;
      Factor merged = fwd ? fs[i] : fs[i + 1];
      merged.first = fs[i].first;
      merged.last = fs[i + 1].last;
      fs[static_cast<std::size_t>(i)] = std::move(merged);
      fs.erase(fs.begin() + static_cast<long>(i) + 1);
      changed = true;
      break;
    }
  }
  // Non-adjacent factors sharing a cell: returning subsegment.
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 2; j < fs.size(); ++j)
      if (detail::cells_intersect(fs[i].cells, fs[j].cells)) {
        res.kind = TightenResult::Returning;
        res.ret_first = static_cast<int>(i);
        res.ret_last = static_cast<int>(j);
        res.dec = std::move(dec);
        return res;
      }
  // Adjacent sharing: allowed only when the later factor is one diagonal
  // entering through the shared region and leaving it immediately.
  for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
    if (!detail::cells_intersect(fs[i].cells, fs[i + 1].cells)) continue;
    std::vector<int> shared;
    std::set_intersection(fs[i].cells.begin(), fs[i].cells.end(),
                          fs[i + 1].cells.begin(), fs[i + 1].cells.end(),
                          std::back_inserter(shared));
    auto edge_in_shared = [&](int e) {
      for (int c : shared)
        for (const DirEdge& de : px.cells[static_cast<std::size_t>(c)].boundary)
          if (de.edge == e) return true;
      return false;
    };
    const SegmentStep& first_step = seg.steps[static_cast<std::size_t>(fs[i + 1].first)];
    bool pattern = fs[i + 1].first == fs[i + 1].last &&
                   edge_in_shared(first_step.e_in) && !edge_in_shared(first_step.e_out);
    if (!pattern) {
      res.fully_tight = false;
      res.notes.push_back("adjacent factors " + std::to_string(i) + "," +
                          std::to_string(i + 1) +
                          " share cells outside the tight pattern");
    }
  }
  res.dec = std::move(dec);
  return res;
}

// ---------------------------------------------------------------------------
// Returning decompositions.
// ---------------------------------------------------------------------------

struct ReturningReport {
  enum Kind { SelfIntersection, Decomposed } kind = Decomposed;
  int wall = -1;
  HypergraphSegment segment;  // for Decomposed
  int n = 0;                  // decomposition length
  std::string detail;
};

struct ReturningSearch {
  std::vector<ReturningReport> found;
  int components = 0;
  int interior_components = 0;
  int segments_checked = 0;
  bool budget_exhausted = false;
};

namespace detail {

// Does some tile instance (grown from a cell through x0) contain both
// endpoint midpoints?
inline bool endpoints_share_tile(const Complex2& px, const TileAssignment& A, int x0,
                                 int xn) {
  for (const Traversal& t : px.cells_through(x0)) {
    const auto& pcell = px.cells[static_cast<std::size_t>(t.cell)];
    int r = pcell.relator_id;
    if (r < 0 || r >= static_cast<int>(A.tile_of_relator.size())) continue;
    int ti = A.tile_of_relator[static_cast<std::size_t>(r)];
    const Tile& T = A.tiles[static_cast<std::size_t>(ti)];
    int tc = tile_cell_of_relator(T, r);
    if (tc < 0) continue;
    InstanceRealization I = realize_instance(px, T, ti, tc, t.cell);
    if (I.patch_edges.count(xn)) return true;
  }
  return false;
}

}  // namespace detail

// Search every interior wall for returning decompositions of length <= N.
// A wall that self-intersects counts directly (a segment revisiting a cell
// always closes up into a returning decomposition), so the two detectors
// agree by construction.
inline ReturningSearch find_returning(const Complex2& px,
                                      const std::vector<Pairing>& prs,
                                      const std::vector<bool>* vertex_complete,
                                      const TileAssignment* A,
                                      const std::map<int, TileWallStructure>* S,
                                      int N = 8, int max_pairs = 20000) {
  ReturningSearch out;
  std::vector<std::vector<int>> walls;
  std::vector<int> wall_of_edge;
  group_wall_classes(px, prs, walls, wall_of_edge);
  std::vector<std::vector<WallDiag>> per_wall(walls.size());
  for (const WallDiag& d : pairing_diagonals(px, prs))
    per_wall[static_cast<std::size_t>(wall_of_edge[static_cast<std::size_t>(d.e1)])].push_back(d);
  auto at_frontier = [&](int e) {
    if (!vertex_complete) return false;
    const auto& ed = px.edges[static_cast<std::size_t>(e)];
    return !(*vertex_complete)[static_cast<std::size_t>(ed.u)] ||
           !(*vertex_complete)[static_cast<std::size_t>(ed.v)];
  };

  for (std::size_t w = 0; w < walls.size(); ++w) {
    ++out.components;
    bool interior = true;
    for (int e : walls[w])
      if (at_frontier(e)) interior = false;
    if (!interior) continue;
    ++out.interior_components;
    const auto& diags = per_wall[w];
    if (diags.empty()) continue;

    bool cycle =
        static_cast<int>(diags.size()) > static_cast<int>(walls[w].size()) - 1;
    bool crossing = false;
    std::map<int, std::vector<std::pair<int, int>>> by_cell;
    for (const WallDiag& d : diags) by_cell[d.cell].push_back({d.p, d.q});
    for (const auto& [cell, chords] : by_cell)
      for (std::size_t i = 0; i < chords.size() && !crossing; ++i)
        for (std::size_t j = i + 1; j < chords.size(); ++j)
          if (chords_cross(chords[i].first, chords[i].second, chords[j].first,
                           chords[j].second)) {
            crossing = true;
            break;
          }
    if (cycle || crossing) {
      ReturningReport r;
      r.kind = ReturningReport::SelfIntersection;
      r.wall = static_cast<int>(w);
      r.detail = cycle ? "cycle in the diagonal graph" : "crossing diagonals in a cell";
      out.found.push_back(std::move(r));
      continue;
    }
    if (!A || !S) continue;

    // Tree component: enumerate midpoint pairs within 4N diagonals (a factor
    // spans at most the tile size, at most 4 cells) and test each path.
    std::map<int, std::vector<int>> adj;
    for (std::size_t i = 0; i < diags.size(); ++i) {
      adj[diags[i].e1].push_back(static_cast<int>(i));
      adj[diags[i].e2].push_back(static_cast<int>(i));
    }
    const int depth_cap = 4 * N;
    for (int a : walls[w]) {
      std::map<int, std::pair<int, int>> prev;  // midpoint -> (parent, diag)
      std::map<int, int> depth;
      std::deque<int> q{a};
      prev[a] = {a, -1};
      depth[a] = 0;
      while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        if (depth[x] >= depth_cap) continue;
        for (int di : adj[x]) {
          const WallDiag& d = diags[static_cast<std::size_t>(di)];
          int y = d.e1 == x ? d.e2 : d.e1;
          if (prev.count(y)) continue;
          prev[y] = {x, di};
          depth[y] = depth[x] + 1;
          q.push_back(y);
        }
      }
      for (const auto& [b, pb] : prev) {
        if (b <= a) continue;
        if (out.segments_checked >= max_pairs) {
          out.budget_exhausted = true;
          break;
        }
        ++out.segments_checked;
        std::vector<int> diag_path;
        for (int at = b; at != a; at = prev[at].first)
          diag_path.push_back(prev[at].second);
        std::reverse(diag_path.begin(), diag_path.end());
        HypergraphSegment seg;
        seg.x0 = a;
        seg.xn = b;
        int enter = a;
        for (int di : diag_path) {
          const WallDiag& d = diags[static_cast<std::size_t>(di)];
          SegmentStep s;
          s.cell = d.cell;
          if (d.e1 == enter) {
            s.p_in = d.p; s.p_out = d.q; s.e_in = d.e1; s.e_out = d.e2;
          } else {
            s.p_in = d.q; s.p_out = d.p; s.e_in = d.e2; s.e_out = d.e1;
          }
          enter = s.e_out;
          seg.steps.push_back(s);
        }
        Decomposition dec = decompose(seg, px, *A, *S);
        if (dec.length() > N || dec.length() < 2) continue;
        // No factor may contain the union of all augmented tiles.
        std::vector<int> all;
        for (const Factor& f : dec.factors)
          all.insert(all.end(), f.cells.begin(), f.cells.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        bool dominated = false;
        for (const Factor& f : dec.factors)
          if (detail::cells_subset(all, f.cells)) dominated = true;
        if (dominated) continue;
        if (!detail::endpoints_share_tile(px, *A, seg.x0, seg.xn)) continue;
        ReturningReport r;
        r.kind = ReturningReport::Decomposed;
        r.wall = static_cast<int>(w);
        r.segment = std::move(seg);
        r.n = dec.length();
        out.found.push_back(std::move(r));
      }
      if (out.budget_exhausted) break;
    }
  }
  return out;
}

inline ReturningSearch find_returning(const CayleyPatch& patch,
                                      const WallStructureOnPatch& W,
                                      const TileAssignment& A,
                                      const std::map<int, TileWallStructure>& S,
                                      int N = 8, int max_pairs = 20000) {
  return find_returning(patch.cx, W.pairings, &patch.complete, &A, &S, N, max_pairs);
}

// ---------------------------------------------------------------------------
// Local quasi-isometry bound: a segment through n cells has length n * l/2
// edges, and its endpoint distance in the 1-skeleton must be at least
// (1 - 4d) * (n * l/2) - c*l edges, compared exactly in half-edge units.
// ---------------------------------------------------------------------------

struct QiRecord {
  int n = 0;                      // number of diagonals
  Hu endpoint_distance_hu = -1;
  Rational bound_hu;
  bool pass = true;
};

inline QiRecord qi_check(const HypergraphSegment& seg, const Complex2& px,
                         const Rational& d, int c = 1) {
  QiRecord rec;
  rec.n = static_cast<int>(seg.steps.size());
  rec.endpoint_distance_hu = px.midpoint_distance_hu(seg.x0, seg.xn);
  rec.bound_hu = (Rational(1) - Rational(4) * d) *
                     Rational(static_cast<long long>(rec.n) * px.l) -
                 Rational(2LL * c * px.l);
  rec.pass = rec.endpoint_distance_hu >= 0 &&
             !(Rational(rec.endpoint_distance_hu) < rec.bound_hu);
  return rec;
}

// ---------------------------------------------------------------------------
// Relators exchanging the halves of a wall: a letter occurring at two
// antipodal positions with the same direction, in a relator whose cell forms
// a tile on its own (so its pairing is the antipodal one).
// ---------------------------------------------------------------------------

struct WallExchangeWitness {
  int relator = -1;
  int position = -1;  // r[position] == r[position + l/2]
};

// Condition on the word alone.
inline std::optional<int> antipodal_letter_position(const Word& r) {
  const int l = r.size();
  for (int i = 0; i < l / 2; ++i)
    if (r[i] == r[(i + l / 2) % l]) return i;
  return std::nullopt;
}

inline int count_antipodal_letter_relators(const Presentation& P) {
  int c = 0;
  for (const Word& r : P.relators)
    if (antipodal_letter_position(r)) ++c;
  return c;
}

inline std::optional<WallExchangeWitness> find_wall_exchanging_relator(
    const Presentation& P, const TileAssignment& A) {
  for (std::size_t r = 0; r < P.relators.size(); ++r) {
    int t = A.tile_of_relator[r];
    if (A.tiles[static_cast<std::size_t>(t)].size() != 1) continue;
    if (auto pos = antipodal_letter_position(P.relators[r]))
      return WallExchangeWitness{static_cast<int>(r), *pos};
  }
  return std::nullopt;
}

// ---- exports ----

inline std::string walls_to_dot(const Complex2& cx, const std::vector<Pairing>& prs) {
  std::vector<std::pair<int, int>> pairs;
  for (const WallDiag& d : pairing_diagonals(cx, prs)) pairs.push_back({d.e1, d.e2});
  return to_dot(cx, &pairs);
}

}  // namespace rgw
