#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgw/tiles.hpp"

namespace rgw {

// Per-cell pairing of the l boundary-edge midpoints: a fixed-point-free
// involution on boundary positions 0..l-1.
using Pairing = std::vector<int>;

inline Pairing antipodal_pairing(int l) {
  Pairing p(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) p[static_cast<std::size_t>(i)] = (i + l / 2) % l;
  return p;
}

// An edge-path along a cell's boundary circle, in half-edge units: the circle
// has length 2l hu, vertices at even and midpoints at odd coordinates.
// Arcs always have even endpoints (they are spans of edge-paths).
struct CellArc {
  int lo_hu = 0;
  int len_hu = 0;
};

inline CellArc sub_arc(const CellArc& a, bool from_lo, int k_edges, int l) {
  if (from_lo) return {a.lo_hu, 2 * k_edges};
  return {((a.lo_hu + a.len_hu - 2 * k_edges) % (2 * l) + 2 * l) % (2 * l), 2 * k_edges};
}

// Replace every midpoint z in the interior of the arc by s(z), where s is the
// symmetry of the arc exchanging its endpoints; pairs not touching the
// interior are unchanged. Keeps the pairing a fixed-point-free involution.
inline void apply_arc_surgery(Pairing& pr, int l, const CellArc& arc) {
  const int L2 = 2 * l;
  auto off_of = [&](int pos) { return ((2 * pos + 1 - arc.lo_hu) % L2 + L2) % L2; };
  auto in_interior = [&](int pos) {
    int off = off_of(pos);
    return off > 0 && off < arc.len_hu;
  };
  auto s = [&](int pos) {
    int hu = (arc.lo_hu + arc.len_hu - off_of(pos)) % L2;
    return ((hu - 1) / 2 % l + l) % l;
  };
  Pairing np(static_cast<std::size_t>(l), -1);
  for (int p = 0; p < l; ++p) {
    int q = pr[static_cast<std::size_t>(p)];
    if (q < p) continue;
    int pp = in_interior(p) ? s(p) : p;
    int qq = in_interior(q) ? s(q) : q;
    np[static_cast<std::size_t>(pp)] = qq;
    np[static_cast<std::size_t>(qq)] = pp;
  }
  pr = np;
}

// The contiguous run of boundary positions of cell `c` whose edges also lie
// in the cells `others`. Returns nullopt when empty or not a single arc.
inline std::optional<CellArc> boundary_arc(const Complex2& cx, int c,
                                           const std::vector<int>& others) {
  std::set<int> shared;
  for (int o : others)
    for (const DirEdge& de : cx.cells[static_cast<std::size_t>(o)].boundary)
      shared.insert(de.edge);
  const auto& bd = cx.cells[static_cast<std::size_t>(c)].boundary;
  const int l = cx.l;
  std::vector<bool> in(static_cast<std::size_t>(l));
  int count = 0;
  for (int p = 0; p < l; ++p)
    if ((in[static_cast<std::size_t>(p)] = shared.count(bd[static_cast<std::size_t>(p)].edge) > 0))
      ++count;
  if (count == 0) return std::nullopt;
  if (count == l) return CellArc{0, 2 * l};
  int start = -1;
  for (int p = 0; p < l; ++p)
    if (in[static_cast<std::size_t>(p)] && !in[static_cast<std::size_t>((p + l - 1) % l)]) {
      if (start >= 0) return std::nullopt;  // more than one run
      start = p;
    }
  for (int t = 0; t < count; ++t)
    if (!in[static_cast<std::size_t>((start + t) % l)]) return std::nullopt;
  return CellArc{2 * start, 2 * count};
}

// Vertices at the two ends of an arc on a cell's boundary.
inline int arc_end_vertex(const Complex2& cx, int c, const CellArc& arc, bool lo_end) {
  const auto& bd = cx.cells[static_cast<std::size_t>(c)].boundary;
  const int l = cx.l;
  if (lo_end) return cx.edge_tail(bd[static_cast<std::size_t>(arc.lo_hu / 2)]);
  int last = (((arc.lo_hu + arc.len_hu) / 2 - 1) % l + l) % l;
  return cx.edge_head(bd[static_cast<std::size_t>(last)]);
}

struct TileWallStructure {
  std::vector<Pairing> pairings;        // per cell of the complex
  std::vector<std::vector<int>> walls;  // per class: midpoint edge ids
  std::vector<int> wall_of_edge;        // edge id -> wall index
  std::vector<std::string> diagnoses;
  bool ok() const { return diagnoses.empty(); }
};

struct Diagonal {
  int cell = 0;
  int e1 = 0, e2 = 0;  // midpoint edge ids joined by the diagonal
};

inline std::vector<Diagonal> structure_diagonals(const Complex2& cx,
                                                 const TileWallStructure& S) {
  std::vector<Diagonal> out;
  for (int c = 0; c < cx.size(); ++c) {
    const auto& bd = cx.cells[static_cast<std::size_t>(c)].boundary;
    const Pairing& pr = S.pairings[static_cast<std::size_t>(c)];
    for (int p = 0; p < cx.l; ++p) {
      int q = pr[static_cast<std::size_t>(p)];
      if (q <= p) continue;
      out.push_back({c, bd[static_cast<std::size_t>(p)].edge, bd[static_cast<std::size_t>(q)].edge});
    }
  }
  return out;
}

// Group midpoints into walls and check the tree requirement per hypergraph.
inline void finalize_structure(const Complex2& cx, TileWallStructure& S) {
  const int l = cx.l;
  for (int c = 0; c < cx.size(); ++c) {
    const Pairing& pr = S.pairings[static_cast<std::size_t>(c)];
    for (int p = 0; p < l; ++p) {
      int q = pr[static_cast<std::size_t>(p)];
      if (q < 0 || q >= l || q == p || pr[static_cast<std::size_t>(q)] != p) {
        S.diagnoses.push_back("cell " + std::to_string(c) +
                              ": pairing is not a fixed-point-free involution");
        return;
      }
    }
  }
  auto diags = structure_diagonals(cx, S);
  std::vector<int> parent(static_cast<std::size_t>(cx.num_edges()));
  for (int e = 0; e < cx.num_edges(); ++e) parent[static_cast<std::size_t>(e)] = e;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& d : diags) parent[static_cast<std::size_t>(find(d.e1))] = find(d.e2);
  std::map<int, int> index;
  S.wall_of_edge.assign(static_cast<std::size_t>(cx.num_edges()), -1);
  S.walls.clear();
  for (int e = 0; e < cx.num_edges(); ++e) {
    int r = find(e);
    if (!index.count(r)) {
      index[r] = static_cast<int>(S.walls.size());
      S.walls.push_back({});
    }
    S.wall_of_edge[static_cast<std::size_t>(e)] = index[r];
    S.walls[static_cast<std::size_t>(index[r])].push_back(e);
  }
  std::vector<int> diag_count(S.walls.size(), 0);
  for (const auto& d : diags) ++diag_count[static_cast<std::size_t>(S.wall_of_edge[static_cast<std::size_t>(d.e1)])];
  for (std::size_t w = 0; w < S.walls.size(); ++w)
    if (diag_count[w] != static_cast<int>(S.walls[w].size()) - 1)
      S.diagnoses.push_back("wall " + std::to_string(w) + ": hypergraph is not a tree");
}

// Surgery near both ends of the gluing path: the antipodal relation on
// `target_cell` is modified on subpaths of length ceil(|A| - l/4) at the two
// ends of A = target ∩ rest.
inline void surger_both_ends(TileWallStructure& S, const Complex2& cx, int target_cell,
                             const CellArc& A) {
  const int l = cx.l;
  const int edgesA = A.len_hu / 2;
  int k = (4 * edgesA - l + 3) / 4;
  if (k <= 0) return;
  if (2 * k > edgesA) {
    S.diagnoses.push_back("cell " + std::to_string(target_cell) +
                          ": end subpaths overlap (|A| out of range)");
    return;
  }
  apply_arc_surgery(S.pairings[static_cast<std::size_t>(target_cell)], l, sub_arc(A, true, k, l));
  apply_arc_surgery(S.pairings[static_cast<std::size_t>(target_cell)], l, sub_arc(A, false, k, l));
}

// Build the tile-wall structure of a tile by replaying its gluing history.
inline TileWallStructure build_tile_structure(const Tile& t) {
  const Complex2& cx = t.cx;
  const int l = cx.l;
  TileWallStructure S;
  S.pairings.assign(static_cast<std::size_t>(cx.size()), antipodal_pairing(l));

  auto vertex_set = [&](const std::vector<int>& cells) {
    std::set<int> vs;
    for (int c : cells)
      for (const DirEdge& de : cx.cells[static_cast<std::size_t>(c)].boundary) {
        vs.insert(cx.edges[static_cast<std::size_t>(de.edge)].u);
        vs.insert(cx.edges[static_cast<std::size_t>(de.edge)].v);
      }
    return vs;
  };

  int attach_count = 0;
  for (const TileEvent& ev : t.history) {
    if (ev.kind == TileEvent::Merge) {
      const auto& L = ev.left_cells;
      const auto& R = ev.right_cells;
      bool left_single = L.size() == 1, right_single = R.size() == 1;
      if (left_single || right_single) {
        // A single cell glued to a tile along one arc: surger the cell.
        int c = right_single ? R[0] : L[0];
        const auto& other = right_single ? L : R;
        auto A = boundary_arc(cx, c, other);
        if (!A) {
          S.diagnoses.push_back("merge: gluing path of cell " + std::to_string(c) +
                                " is not a single arc");
          continue;
        }
        if (2 * A->len_hu <= l || A->len_hu >= l) {
          S.diagnoses.push_back("merge: |A| outside (l/4, l/2) at cell " + std::to_string(c));
          continue;
        }
        surger_both_ends(S, cx, c, *A);
      } else if (L.size() == 2 && R.size() == 2) {
        // Two 2-cell tiles meeting in a (possibly degenerate) tripod: the
        // newer tile's cells are modified on the spans of the complements of
        // the l/4-neighbourhoods of the far endpoints.
        std::optional<CellArc> arcs[2];
        int far[2] = {-1, -1};
        bool bad = false;
        for (int j = 0; j < 2 && !bad; ++j) {
          arcs[j] = boundary_arc(cx, R[static_cast<std::size_t>(j)], L);
          if (arcs[j] && arcs[j]->len_hu > l) {
            S.diagnoses.push_back("merge: tripod leg exceeds l/4 at cell " +
                                  std::to_string(R[static_cast<std::size_t>(j)]));
            bad = true;
          }
        }
        if (bad) continue;
        // Far endpoints: the end of each leg not on the other leg.
        for (int j = 0; j < 2; ++j) {
          if (!arcs[j]) continue;
          int other = 1 - j;
          std::set<int> ov;
          if (arcs[other]) {
            const auto& bd = cx.cells[static_cast<std::size_t>(R[static_cast<std::size_t>(other)])].boundary;
            for (int thu = 0; thu <= arcs[other]->len_hu; thu += 2) {
              int pos = ((arcs[other]->lo_hu + thu) / 2) % l;
              ov.insert(thu < arcs[other]->len_hu
                            ? cx.edge_tail(bd[static_cast<std::size_t>(pos)])
                            : cx.edge_head(bd[static_cast<std::size_t>((pos + l - 1) % l)]));
            }
          }
          int vlo = arc_end_vertex(cx, R[static_cast<std::size_t>(j)], *arcs[j], true);
          int vhi = arc_end_vertex(cx, R[static_cast<std::size_t>(j)], *arcs[j], false);
          bool lo_far = !ov.count(vlo), hi_far = !ov.count(vhi);
          if (lo_far == hi_far && arcs[other]) {
            S.diagnoses.push_back("merge: tripod legs do not share exactly one endpoint");
            bad = true;
            break;
          }
          far[j] = lo_far ? 0 : 1;  // 0: lo end is the far endpoint
        }
        if (bad) continue;
        // Legs measured in hu; the l/4-edge neighbourhood has radius l/2 hu.
        int a0 = arcs[0] ? arcs[0]->len_hu : 0;
        int a1 = arcs[1] ? arcs[1]->len_hu : 0;
        int h = a0 + a1 - l / 2;  // hu length of the complement
        if (h > 0) {
          int k = (h + 1) / 2;
          for (int j = 0; j < 2; ++j) {
            if (!arcs[j] || arcs[j]->len_hu == 0) continue;
            if (2 * k > arcs[j]->len_hu) {
              S.diagnoses.push_back("merge: tripod span leaves its leg at cell " +
                                    std::to_string(R[static_cast<std::size_t>(j)]));
              continue;
            }
            apply_arc_surgery(S.pairings[static_cast<std::size_t>(R[static_cast<std::size_t>(j)])], l,
                              sub_arc(*arcs[j], far[j] == 0, k, l));
          }
        }
      } else {
        S.diagnoses.push_back("merge: unsupported size pattern " + std::to_string(L.size()) +
                              "+" + std::to_string(R.size()));
      }
    } else {  // Attach
      ++attach_count;
      if (attach_count == 1) continue;  // first attached cell stays antipodal
      // Second attachment: surger the new cell on the subpath of A containing
      // the endpoint that lies in the original 2-cell tile.
      int cp = ev.right_cells[0];
      auto A = boundary_arc(cx, cp, ev.left_cells);
      if (!A) {
        S.diagnoses.push_back("attach: gluing path of cell " + std::to_string(cp) +
                              " is not a single arc");
        continue;
      }
      const int edgesA = A->len_hu / 2;
      int k = (4 * edgesA - l + 3) / 4;
      if (k <= 0 || A->len_hu >= l) {
        S.diagnoses.push_back("attach: |A| outside (l/4, l/2) at cell " + std::to_string(cp));
        continue;
      }
      auto core_vs = vertex_set(t.core_cells);
      bool lo_in_core = core_vs.count(arc_end_vertex(cx, cp, *A, true)) > 0;
      bool hi_in_core = core_vs.count(arc_end_vertex(cx, cp, *A, false)) > 0;
      if (lo_in_core == hi_in_core) {
        S.diagnoses.push_back("attach: ends of A not split between tile and cell");
        continue;
      }
      apply_arc_surgery(S.pairings[static_cast<std::size_t>(cp)], l, sub_arc(*A, lo_in_core, k, l));
    }
  }
  finalize_structure(t.cx, S);
  return S;
}

// Standalone form for a two-cell complex: antipodal on the other cell,
// end-subpath surgery on `target_cell`. Requires l/4 < |A| < l/2.
inline TileWallStructure two_cell_surgery(const Complex2& cx, int target_cell) {
  if (cx.size() != 2) throw std::invalid_argument("two_cell_surgery: need exactly 2 cells");
  auto A = boundary_arc(cx, target_cell, {1 - target_cell});
  if (!A) throw std::invalid_argument("two_cell_surgery: cells share no single arc");
  if (2 * A->len_hu <= cx.l || A->len_hu >= cx.l)
    throw std::invalid_argument("two_cell_surgery: |A| outside (l/4, l/2)");
  TileWallStructure S;
  S.pairings.assign(2, antipodal_pairing(cx.l));
  surger_both_ends(S, cx, target_cell, *A);
  finalize_structure(cx, S);
  return S;
}

// ---- verification ----

struct BalanceViolation {
  int wall = 0;
  int x = 0, xp = 0;  // midpoint edge ids
  Hu dist = 0, bound = 0;
};

// Exhaustive check that every related pair whose hypergraph segment traverses
// `cell` is at distance >= Bal in the 1-skeleton (hu).
inline std::vector<BalanceViolation> verify_balanced(const Complex2& cx,
                                                     const TileWallStructure& S, int cell) {
  std::vector<BalanceViolation> out;
  const Hu bal = cx.balance_hu();
  auto diags = structure_diagonals(cx, S);
  for (std::size_t w = 0; w < S.walls.size(); ++w) {
    const auto& nodes = S.walls[w];
    if (nodes.size() < 2) continue;
    std::map<int, std::vector<std::pair<int, int>>> adj;  // edge -> (edge, cell)
    for (const auto& d : diags)
      if (S.wall_of_edge[static_cast<std::size_t>(d.e1)] == static_cast<int>(w)) {
        adj[d.e1].push_back({d.e2, d.cell});
        adj[d.e2].push_back({d.e1, d.cell});
      }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        // Path in the tree from nodes[i] to nodes[j]; does it use `cell`?
        std::map<int, std::pair<int, int>> prev;  // node -> (parent, via cell)
        std::deque<int> q{nodes[i]};
        prev[nodes[i]] = {nodes[i], -1};
        while (!q.empty() && !prev.count(nodes[j])) {
          int x = q.front();
          q.pop_front();
          for (auto [y, c] : adj[x])
            if (!prev.count(y)) {
              prev[y] = {x, c};
              q.push_back(y);
            }
        }
        if (!prev.count(nodes[j])) continue;
        bool crosses = false;
        for (int at = nodes[j]; at != nodes[i]; at = prev[at].first)
          if (prev[at].second == cell) crosses = true;
        if (!crosses) continue;
        Hu dist = cx.midpoint_distance_hu(nodes[i], nodes[j]);
        if (dist < bal)
          out.push_back({static_cast<int>(w), nodes[i], nodes[j], dist, bal});
      }
  }
  return out;
}

// Smallest distance among related pairs crossing any cell (for the tightness
// check: some pair should come within 2 hu of the balance bound).
inline Hu min_crossing_distance_hu(const Complex2& cx, const TileWallStructure& S) {
  Hu best = -1;
  for (const auto& d : structure_diagonals(cx, S)) {
    Hu dist = cx.midpoint_distance_hu(d.e1, d.e2);
    if (best < 0 || dist < best) best = dist;
  }
  return best;
}

inline bool edge_in_cells(const Complex2& cx, int e, const std::vector<int>& cells) {
  for (int c : cells)
    for (const DirEdge& de : cx.cells[static_cast<std::size_t>(c)].boundary)
      if (de.edge == e) return true;
  return false;
}

enum class Augmented { FullTile, SingleCell };

// The augmented tile of (cell, wall): the full tile if the wall meets the
// core, otherwise just the cell.
inline Augmented augmented_tile(const Complex2& cx, const TileWallStructure& S,
                                const std::vector<int>& core_cells, int wall) {
  for (int e : S.walls[static_cast<std::size_t>(wall)])
    if (edge_in_cells(cx, e, core_cells)) return Augmented::FullTile;
  return Augmented::SingleCell;
}

// Structural assertions for tiles with a proper core:
//  (i)   the structure restricts to the core tile's own structure,
//  (ii)  non-antipodal pairs in cells outside the core have one endpoint in
//        the core, with the antipode of the other endpoint also in the core,
//  (iii) a wall with two midpoints in an outer cell and one in the core keeps
//        one of the two in the core and the other in no other cell,
//  plus: walls missing the core meet each outer cell in an antipodal pair.
inline std::vector<std::string> verify_assertions(const TileAssignment& A,
                                                  const std::map<int, TileWallStructure>& S,
                                                  int tile_index) {
  std::vector<std::string> out;
  const Tile& t = A.tiles[static_cast<std::size_t>(tile_index)];
  const Complex2& cx = t.cx;
  const int l = cx.l;
  const TileWallStructure& st = S.at(tile_index);
  if (static_cast<int>(t.core_cells.size()) == cx.size()) return out;  // coreless: vacuous

  // (i) against the core tile's own structure.
  int r0 = cx.cells[static_cast<std::size_t>(t.core_cells[0])].relator_id;
  int tc = A.tile_of_relator[static_cast<std::size_t>(r0)];
  auto it = S.find(tc);
  if (it == S.end() || A.tiles[static_cast<std::size_t>(tc)].size() !=
                           static_cast<int>(t.core_cells.size())) {
    out.push_back("core tile structure unavailable");
  } else {
    for (std::size_t c = 0; c < t.core_cells.size(); ++c)
      if (st.pairings[static_cast<std::size_t>(t.core_cells[c])] != it->second.pairings[c])
        out.push_back("(i): pairing of core cell " + std::to_string(t.core_cells[c]) +
                      " differs from the core tile's");
  }

  std::set<int> core(t.core_cells.begin(), t.core_cells.end());
  std::vector<int> all_cells;
  for (int c = 0; c < cx.size(); ++c) all_cells.push_back(c);
  auto in_core = [&](int e) { return edge_in_cells(cx, e, t.core_cells); };

  for (int c = 0; c < cx.size(); ++c) {
    if (core.count(c)) continue;
    const auto& bd = cx.cells[static_cast<std::size_t>(c)].boundary;
    const Pairing& pr = st.pairings[static_cast<std::size_t>(c)];
    // (ii)
    for (int p = 0; p < l; ++p) {
      int q = pr[static_cast<std::size_t>(p)];
      if (q <= p || q == (p + l / 2) % l) continue;
      auto holds = [&](int y, int x) {
        int xa = (x + l / 2) % l;
        return in_core(bd[static_cast<std::size_t>(y)].edge) &&
               in_core(bd[static_cast<std::size_t>(xa)].edge);
      };
      if (!holds(p, q) && !holds(q, p))
        out.push_back("(ii): cell " + std::to_string(c) + " pair (" + std::to_string(p) +
                      "," + std::to_string(q) + ") fails the core condition");
    }
    // (iii) and the antipodality of core-missing walls.
    for (std::size_t w = 0; w < st.walls.size(); ++w) {
      std::vector<int> on_c;
      for (int p = 0; p < l; ++p)
        if (st.wall_of_edge[static_cast<std::size_t>(bd[static_cast<std::size_t>(p)].edge)] ==
            static_cast<int>(w))
          on_c.push_back(p);
      if (on_c.size() != 2) continue;
      bool meets_core = augmented_tile(cx, st, t.core_cells, static_cast<int>(w)) ==
                        Augmented::FullTile;
      int e0 = bd[static_cast<std::size_t>(on_c[0])].edge;
      int e1 = bd[static_cast<std::size_t>(on_c[1])].edge;
      if (meets_core) {
        auto only_in_c = [&](int e) {
          for (int oc : all_cells)
            if (oc != c && edge_in_cells(cx, e, {oc})) return false;
          return true;
        };
        if (!((in_core(e0) && only_in_c(e1)) || (in_core(e1) && only_in_c(e0))))
          out.push_back("(iii): cell " + std::to_string(c) + " wall " + std::to_string(w) +
                        " fails the core/exclusivity condition");
      } else if (on_c[1] != (on_c[0] + l / 2) % l) {
        out.push_back("core-missing wall " + std::to_string(w) + " not antipodal in cell " +
                      std::to_string(c));
      }
    }
  }
  return out;
}

// Cells of the complex of tile `tile_index` that the assignment maps to it.
inline std::vector<int> assigned_cells(const TileAssignment& A, int tile_index) {
  std::vector<int> out;
  const Tile& t = A.tiles[static_cast<std::size_t>(tile_index)];
  for (int c = 0; c < t.cx.size(); ++c) {
    int r = t.cx.cells[static_cast<std::size_t>(c)].relator_id;
    if (A.tile_of_relator[static_cast<std::size_t>(r)] == tile_index) out.push_back(c);
  }
  return out;
}

inline std::map<int, TileWallStructure> build_structures(const TileAssignment& A) {
  std::map<int, TileWallStructure> out;
  std::set<int> active(A.tile_of_relator.begin(), A.tile_of_relator.end());
  for (int t : active) out.emplace(t, build_tile_structure(A.tiles[static_cast<std::size_t>(t)]));
  return out;
}

}  // namespace rgw
