#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rgw/complex.hpp"
#include "rgw/presentation.hpp"
#include "rgw/words.hpp"

namespace rgw {

// ---- maximal common subwords between cyclic words ----

struct WordOverlap {
  int a = 0;            // start position in wa
  int b = 0;            // start position in wb (o=+1) or in wb^-1 (o=-1)
  int orientation = 1;  // +1: match against wb; -1: against wb^-1
  int len = 0;          // edges
};

// All maximal cyclic common-subword runs wa[a+t] == s[b+t], s = wb or wb^-1.
// With include_identity=false the full-circle run at offset 0 between equal
// words is still reported (callers decide); only zero-length runs are dropped.
inline std::vector<WordOverlap> maximal_word_overlaps(const Word& wa, const Word& wb, int m) {
  std::vector<WordOverlap> out;
  const int la = wa.size(), lb = wb.size();
  if (la == 0 || lb == 0) return out;
  for (int o : {+1, -1}) {
    Word s = o > 0 ? wb : word_inverse(wb, m);
    // For each relative offset, scan maximal runs of agreement on the cyclic
    // index set of length L = lcm-free simple scan: positions (a, b) with
    // b - a ≡ delta (mod structure) — since lengths may differ, scan all
    // (a0, b0) anchors where a run could start.
    std::vector<char> match(static_cast<std::size_t>(la) * static_cast<std::size_t>(lb));
    auto at = [&](int i, int j) -> char& {
      return match[static_cast<std::size_t>(i) * static_cast<std::size_t>(lb) +
                   static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < lb; ++j) at(i, j) = (wa[i] == s[j]);
    // A run through (i, j) extends diagonally (cyclically in both words).
    // Enumerate run starts: (i, j) matches but (i-1, j-1) does not, or the
    // full diagonal matches (report once per diagonal).
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < lb; ++j) {
        if (!at(i, j)) continue;
        int pi = (i + la - 1) % la, pj = (j + lb - 1) % lb;
        if (at(pi, pj)) continue;  // not a run start
        int len = 0;
        int ci = i, cj = j;
        while (at(ci, cj) && len < la * lb) {
          ++len;
          ci = (ci + 1) % la;
          cj = (cj + 1) % lb;
          if (ci == i && cj == j) break;
        }
        out.push_back({i, j, o, len});
      }
    // Full diagonals (no start point): wa is a rotation of s.
    if (la == lb) {
      for (int delta = 0; delta < lb; ++delta) {
        bool full = true;
        for (int i = 0; i < la && full; ++i) full = at(i, (i + delta) % lb);
        if (full) out.push_back({0, delta, o, la});
      }
    }
  }
  return out;
}

// Spec-facing overlap record between two relators of a presentation.
struct Overlap {
  int r1 = 0, r2 = 0;
  WordOverlap where;
};

// All maximal common subwords between cyclic translates/inverses of relator
// pairs (r1 <= r2), including nontrivial self-overlaps; the identity
// self-overlap (r, r, o=+1, full diagonal at offset 0) is excluded.
inline std::vector<Overlap> find_cell_overlaps(const Presentation& P) {
  std::vector<Overlap> out;
  const int R = static_cast<int>(P.relators.size());
  for (int i = 0; i < R; ++i)
    for (int j = i; j < R; ++j) {
      auto ws = maximal_word_overlaps(P.relators[static_cast<std::size_t>(i)],
                                      P.relators[static_cast<std::size_t>(j)], P.m);
      for (const auto& w : ws) {
        if (i == j && w.orientation == 1 && w.len == P.l && w.a == ((w.b + 0) % P.l) &&
            w.a == w.b)
          continue;  // identity
        out.push_back({i, j, w});
      }
    }
  return out;
}

// ---- deterministic closure merge ----
//
// Both complexes have deterministic edge labels (at most one edge per
// (vertex, letter)), so identifying one directed edge pair forces a unique
// maximal identification, computed by BFS propagation. The merge fails when
// it would identify two vertices within one side (a fold) — such a gluing
// does not embed and the candidate is rejected.

struct MergeResult {
  Complex2 merged;
  int shared_edges = 0;
  std::vector<int> shared_edge_ids;             // edge ids in `merged` (= A ids)
  std::vector<std::pair<int, int>> edge_pairs;  // (A edge, B edge) identified
  std::vector<int> b_cell_index;                // merged index of each B cell
  std::vector<int> b_vertex_map;                // B vertex -> merged vertex
  std::vector<int> b_edge_map;                  // B edge -> merged edge
};

// Closure phase only: the forced vertex/edge identification, without
// constructing the merged complex. Cheap enough to run for every candidate
// seed; callers materialize only the gluings they keep.
struct MergeClosure {
  std::vector<int> vmap;  // B vertex -> A vertex (or -1)
  std::vector<int> emap;  // B edge -> A edge (or -1)
  int shared_edges = 0;
  std::vector<std::pair<int, int>> edge_pairs;  // (A edge, B edge) identified
};

inline std::optional<MergeClosure> merge_closure(const Complex2& A, const Complex2& B,
                                                 DirEdge eA, DirEdge eB) {
  if (A.read_label(eA) < 0 || A.read_label(eA) != B.read_label(eB)) return std::nullopt;

  std::vector<int> vmap(static_cast<std::size_t>(B.num_vertices), -1);  // B vtx -> A vtx
  std::vector<int> rmap(static_cast<std::size_t>(A.num_vertices), -1);  // A vtx -> B vtx
  std::vector<int> emap(static_cast<std::size_t>(B.num_edges()), -1);   // B edge -> A edge

  auto map_vertex = [&](int bv, int av) -> bool {
    if (vmap[static_cast<std::size_t>(bv)] >= 0) return vmap[static_cast<std::size_t>(bv)] == av;
    if (rmap[static_cast<std::size_t>(av)] >= 0) return false;  // two B vertices onto one A vertex
    vmap[static_cast<std::size_t>(bv)] = av;
    rmap[static_cast<std::size_t>(av)] = bv;
    return true;
  };

  std::deque<int> work;  // B vertices whose neighbourhood must be propagated
  if (!map_vertex(B.edge_tail(eB), A.edge_tail(eA))) return std::nullopt;
  if (!map_vertex(B.edge_head(eB), A.edge_head(eA))) return std::nullopt;
  emap[static_cast<std::size_t>(eB.edge)] = eA.edge;
  work.push_back(B.edge_tail(eB));
  work.push_back(B.edge_head(eB));

  // Incidence of B edges per vertex.
  std::vector<std::vector<DirEdge>> bout(static_cast<std::size_t>(B.num_vertices));
  for (int e = 0; e < B.num_edges(); ++e)
    for (int dir : {+1, -1}) bout[static_cast<std::size_t>(B.edge_tail({e, dir}))].push_back({e, dir});

  while (!work.empty()) {
    int bv = work.front();
    work.pop_front();
    int av = vmap[static_cast<std::size_t>(bv)];
    for (DirEdge bde : bout[static_cast<std::size_t>(bv)]) {
      int lab = B.read_label(bde);
      if (lab < 0) return std::nullopt;
      auto ade = A.out_edge(av, lab);
      if (!ade) continue;
      int prev = emap[static_cast<std::size_t>(bde.edge)];
      if (prev >= 0) {
        if (prev != ade->edge) return std::nullopt;
      } else {
        emap[static_cast<std::size_t>(bde.edge)] = ade->edge;
      }
      int bh = B.edge_head(bde), ah = A.edge_head(*ade);
      bool fresh = vmap[static_cast<std::size_t>(bh)] < 0;
      if (!map_vertex(bh, ah)) return std::nullopt;
      if (fresh) work.push_back(bh);
    }
  }

  MergeClosure cl;
  cl.vmap = std::move(vmap);
  cl.emap = std::move(emap);
  for (int e = 0; e < B.num_edges(); ++e)
    if (cl.emap[static_cast<std::size_t>(e)] >= 0) {
      ++cl.shared_edges;
      cl.edge_pairs.push_back({cl.emap[static_cast<std::size_t>(e)], e});
    }
  return cl;
}

inline MergeResult materialize_merge(const Complex2& A, const Complex2& B,
                                     const MergeClosure& cl) {
  MergeResult out;
  out.merged = A;
  out.merged.invalidate();
  out.b_vertex_map.assign(static_cast<std::size_t>(B.num_vertices), -1);
  out.b_edge_map.assign(static_cast<std::size_t>(B.num_edges()), -1);
  for (int v = 0; v < B.num_vertices; ++v)
    out.b_vertex_map[static_cast<std::size_t>(v)] =
        cl.vmap[static_cast<std::size_t>(v)] >= 0 ? cl.vmap[static_cast<std::size_t>(v)]
                                                  : out.merged.add_vertex();
  for (int e = 0; e < B.num_edges(); ++e) {
    int ae = cl.emap[static_cast<std::size_t>(e)];
    if (ae >= 0) {
      out.b_edge_map[static_cast<std::size_t>(e)] = ae;
      ++out.shared_edges;
      out.shared_edge_ids.push_back(ae);
      out.edge_pairs.push_back({ae, e});
    } else {
      out.b_edge_map[static_cast<std::size_t>(e)] = out.merged.add_edge(
          out.b_vertex_map[static_cast<std::size_t>(B.edges[static_cast<std::size_t>(e)].u)],
          out.b_vertex_map[static_cast<std::size_t>(B.edges[static_cast<std::size_t>(e)].v)],
          B.edges[static_cast<std::size_t>(e)].label);
    }
  }
  for (const auto& cell : B.cells) {
    Complex2::Cell nc = cell;
    for (auto& de : nc.boundary) de.edge = out.b_edge_map[static_cast<std::size_t>(de.edge)];
    out.b_cell_index.push_back(out.merged.add_cell(std::move(nc)));
  }
  // One recorded gluing per connected component of the shared edge set.
  if (out.shared_edges > 0) {
    std::map<int, int> comp;  // A vertex -> component id (over shared edges)
    int ncomp = 0;
    std::map<int, std::vector<int>> adj;
    for (int ae : out.shared_edge_ids) {
      adj[A.edges[static_cast<std::size_t>(ae)].u].push_back(A.edges[static_cast<std::size_t>(ae)].v);
      adj[A.edges[static_cast<std::size_t>(ae)].v].push_back(A.edges[static_cast<std::size_t>(ae)].u);
    }
    for (auto& [v, nbrs] : adj) {
      (void)nbrs;
      if (comp.count(v)) continue;
      int id = ncomp++;
      std::deque<int> q{v};
      comp[v] = id;
      int edges_in_comp = 0;
      while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        for (int y : adj[x])
          if (!comp.count(y)) {
            comp[y] = id;
            q.push_back(y);
          }
      }
      for (int ae : out.shared_edge_ids)
        if (comp[A.edges[static_cast<std::size_t>(ae)].u] == id) ++edges_in_comp;
      out.merged.record_gluing(edges_in_comp);
    }
  }
  return out;
}

inline std::optional<MergeResult> merge_deterministic(const Complex2& A, const Complex2& B,
                                                      DirEdge eA, DirEdge eB) {
  auto cl = merge_closure(A, B, eA, eB);
  if (!cl) return std::nullopt;
  return materialize_merge(A, B, *cl);
}

// ---- tile recognition ----

// Induced subcomplex spanned by a subset of cells (with their boundary).
inline Complex2 subcomplex_of_cells(const Complex2& Y, const std::vector<int>& cells) {
  Complex2 out(Y.l, Y.m);
  out.synthetic = Y.synthetic;
  std::map<int, int> vmap, emap;
  for (int c : cells) {
    const auto& cell = Y.cells[static_cast<std::size_t>(c)];
    Complex2::Cell nc = cell;
    for (auto& de : nc.boundary) {
      int u = Y.edges[static_cast<std::size_t>(de.edge)].u;
      int v = Y.edges[static_cast<std::size_t>(de.edge)].v;
      if (!vmap.count(u)) vmap[u] = out.add_vertex();
      if (!vmap.count(v)) vmap[v] = out.add_vertex();
      if (!emap.count(de.edge))
        emap[de.edge] = out.add_edge(vmap[u], vmap[v], Y.edges[static_cast<std::size_t>(de.edge)].label);
      de.edge = emap[de.edge];
    }
    out.add_cell(std::move(nc));
  }
  return out;
}

// T is a tile iff it is a single cell, or Cancel(T) > 1/4 (|T|-1) l and T is
// the union of two tiles sharing no 2-cell. Search over bipartitions (|T| is
// tiny).
inline bool is_tile(const Complex2& T) {
  const int n = T.size();
  if (n == 0) return false;
  if (n == 1) return true;
  if (4 * T.cancel() <= static_cast<long long>(n - 1) * T.l) return false;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    if (!(mask & 1)) continue;  // fix cell 0 on the left: halves the search
    std::vector<int> left, right;
    for (int c = 0; c < n; ++c)
      (mask >> c & 1 ? left : right).push_back(c);
    if (is_tile(subcomplex_of_cells(T, left)) && is_tile(subcomplex_of_cells(T, right)))
      return true;
  }
  return false;
}

// ---- intersections of instantiated tiles ----

struct IntersectionReport {
  int shared_cells = 0;
  int edges = 0;      // |T ∩ T'| in edges (1-cells of the intersection)
  int vertices = 0;
  bool connected = false;
  bool tree = false;
  bool size_ok = false;  // edges < l/2 (for pairs sharing no cells)
  bool pass() const { return shared_cells > 0 || (connected && tree && size_ok); }
};

inline IntersectionReport intersect_cell_sets(const Complex2& Y, const std::vector<int>& cellsA,
                                              const std::vector<int>& cellsB) {
  IntersectionReport rep;
  std::set<int> ca(cellsA.begin(), cellsA.end()), cb(cellsB.begin(), cellsB.end());
  for (int c : cellsA)
    if (cb.count(c)) ++rep.shared_cells;

  auto closure = [&](const std::set<int>& cs, std::set<int>& verts, std::set<int>& edges) {
    for (int c : cs)
      for (const DirEdge& de : Y.cells[static_cast<std::size_t>(c)].boundary) {
        edges.insert(de.edge);
        verts.insert(Y.edges[static_cast<std::size_t>(de.edge)].u);
        verts.insert(Y.edges[static_cast<std::size_t>(de.edge)].v);
      }
  };
  std::set<int> va, ea, vb, eb;
  closure(ca, va, ea);
  closure(cb, vb, eb);
  std::set<int> ve, ee;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(),
                        std::inserter(ve, ve.begin()));
  std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                        std::inserter(ee, ee.begin()));
  rep.edges = static_cast<int>(ee.size());
  rep.vertices = static_cast<int>(ve.size());
  if (ve.empty()) {
    rep.connected = rep.tree = false;
    rep.size_ok = true;
    return rep;
  }
  // Connectivity of the intersection graph (shared vertices + shared edges).
  std::map<int, std::vector<int>> adj;
  for (int e : ee) {
    adj[Y.edges[static_cast<std::size_t>(e)].u].push_back(Y.edges[static_cast<std::size_t>(e)].v);
    adj[Y.edges[static_cast<std::size_t>(e)].v].push_back(Y.edges[static_cast<std::size_t>(e)].u);
  }
  std::set<int> seen;
  std::deque<int> q{*ve.begin()};
  seen.insert(*ve.begin());
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    for (int y : adj[x])
      if (seen.insert(y).second) q.push_back(y);
  }
  rep.connected = seen.size() == ve.size();
  rep.tree = rep.connected && rep.vertices == rep.edges + 1;
  rep.size_ok = 2 * rep.edges < Y.l;
  return rep;
}

// ---- tiles and the assignment ----

struct TileEvent {
  enum Kind { Merge, Attach } kind = Merge;
  std::vector<int> left_cells;   // cell indices in the tile's complex
  std::vector<int> right_cells;
};

struct Tile {
  Complex2 cx;
  std::vector<int> core_cells;  // cells of the core sub-tile
  std::vector<TileEvent> history;

  int size() const { return cx.size(); }
  std::vector<int> relators() const {
    std::vector<int> out;
    for (const auto& c : cx.cells) out.push_back(c.relator_id);
    return out;
  }
};

struct TileAssignment {
  std::vector<Tile> tiles;
  std::vector<int> tile_of_relator;  // relator orbit -> index into tiles
  std::vector<std::string> degeneracies;
  int step1_merges = 0;
  int step2_attachments = 0;
  bool degenerate() const { return !degeneracies.empty(); }
};

inline Tile singleton_tile(const Presentation& P, int relator_id) {
  Tile t;
  t.cx = make_polygon(P.relators[static_cast<std::size_t>(relator_id)], P.m, relator_id);
  t.core_cells = {0};
  return t;
}

namespace detail {

struct GluingCandidate {
  int ta = -1, tb = -1;  // tile indices (tb may equal ta: same-orbit copies)
  MergeResult mr;
  bool identity = false;  // full identification matching edge ids pointwise
  std::vector<std::pair<int, int>> fingerprint;
};

// All distinct maximal gluings between two tile complexes, found by seeding
// the deterministic closure at every maximal common subword occurrence
// between cell boundary words. Candidates sharing fewer than min_shared
// edges are dropped before the merged complex is built.
inline std::vector<GluingCandidate> tile_gluings(const Complex2& A, const Complex2& B, int m,
                                                 int min_shared = 1) {
  std::vector<GluingCandidate> out;
  std::set<std::vector<std::pair<int, int>>> seen;
  for (int ca = 0; ca < A.size(); ++ca) {
    const auto& cellA = A.cells[static_cast<std::size_t>(ca)];
    for (int cb = 0; cb < B.size(); ++cb) {
      const auto& cellB = B.cells[static_cast<std::size_t>(cb)];
      Word wa(cellA.word), wb(cellB.word);
      for (const auto& ov : maximal_word_overlaps(wa, wb, m)) {
        if (ov.len == 0) continue;
        // Between two single polygons the closure identifies exactly the
        // seeded maximal run (labels block extension on both sides), so the
        // threshold can be applied before running the closure.
        if (A.size() == 1 && B.size() == 1 && ov.len < min_shared && ov.len < wa.size())
          continue;
        DirEdge eA = cellA.boundary[static_cast<std::size_t>(ov.a)];
        DirEdge eB;
        if (ov.orientation > 0) {
          eB = cellB.boundary[static_cast<std::size_t>(ov.b)];
        } else {
          // wa[a] == wb^-1[b]: edge at position l-1-b of B traversed backwards.
          DirEdge de = cellB.boundary[static_cast<std::size_t>(wb.size() - 1 - ov.b)];
          eB = {de.edge, -de.dir};
        }
        auto cl = merge_closure(A, B, eA, eB);
        if (!cl) continue;
        if (cl->shared_edges < min_shared) continue;
        GluingCandidate gc;
        gc.fingerprint = cl->edge_pairs;
        std::sort(gc.fingerprint.begin(), gc.fingerprint.end());
        if (!seen.insert(gc.fingerprint).second) continue;
        gc.identity = cl->shared_edges == B.num_edges() && cl->shared_edges == A.num_edges();
        if (gc.identity)
          for (auto [ae, be] : gc.fingerprint)
            if (ae != be) gc.identity = false;
        gc.mr = materialize_merge(A, B, *cl);
        out.push_back(std::move(gc));
      }
    }
  }
  return out;
}

}  // namespace detail

// Construction of the tile assignment: Step 1 merges pairs of assigned tiles
// with |T| + |T'| <= 4 and |T ∩ T'| > 1/4 l (largest |T| + |T'| first), then
// Step 2 grows size-2 tiles T by cells C with T ∪ C a tile (largest |C ∩ T|
// first), with the C' sub-case. Same-orbit collisions are flagged as
// degeneracies instead of merged.
inline TileAssignment build_tile_assignment(const Presentation& P) {
  TileAssignment A;
  const int R = static_cast<int>(P.relators.size());
  const int l = P.l;
  for (int i = 0; i < R; ++i) {
    A.tiles.push_back(singleton_tile(P, i));
    A.tile_of_relator.push_back(i);
  }
  // Active tiles = those referenced by tile_of_relator.
  auto active = [&]() {
    std::set<int> s(A.tile_of_relator.begin(), A.tile_of_relator.end());
    return std::vector<int>(s.begin(), s.end());
  };

  // Record each degeneracy message once, however often the scan re-meets it.
  std::set<std::string> degen_seen;
  auto push_degen = [&](std::string msg) {
    if (degen_seen.insert(msg).second) A.degeneracies.push_back(std::move(msg));
  };

  // ---- Step 1 ----
  // Candidate gluings are computed once per unordered pair of tiles and kept
  // in a pool; a merge only invalidates candidates touching the merged pair
  // and adds candidates of the new tile against the surviving tiles.
  struct Cand {
    int sum = -1, shared = -1, ta = -1, tb = -1;
    MergeResult mr;
    std::vector<std::pair<int, int>> fp;
  };
  std::vector<Cand> pool;
  auto add_pair_candidates = [&](int ta, int tb) {
    int sum = A.tiles[static_cast<std::size_t>(ta)].size() +
              A.tiles[static_cast<std::size_t>(tb)].size();
    if (sum > 4) return;
    auto gls = detail::tile_gluings(A.tiles[static_cast<std::size_t>(ta)].cx,
                                    A.tiles[static_cast<std::size_t>(tb)].cx, P.m, l / 4 + 1);
    for (auto& g : gls) {
      if (4 * g.mr.shared_edges <= l) continue;
      bool full = g.mr.shared_edges == A.tiles[static_cast<std::size_t>(tb)].cx.num_edges() &&
                  g.mr.shared_edges == A.tiles[static_cast<std::size_t>(ta)].cx.num_edges();
      if (ta == tb) {
        // A full identification of two copies of one orbit tile is the
        // same instance (rotations and reversals of a cell coincide in
        // the ambient complex); partial strong overlap is the genuine
        // orbit-collision degeneracy.
        if (full) continue;
        push_degen("step1: same-orbit tile overlap > l/4 at tile " + std::to_string(ta));
        continue;
      }
      if (2 * g.mr.shared_edges >= l) {
        // Tile intersections must stay below l/2; duplicate or
        // near-duplicate relators land here.
        push_degen("step1: overlap >= l/2 between tiles " + std::to_string(ta) + " and " +
                   std::to_string(tb));
        continue;
      }
      pool.push_back({sum, g.mr.shared_edges, ta, tb, std::move(g.mr), std::move(g.fingerprint)});
    }
  };
  {
    auto act = active();
    for (std::size_t ia = 0; ia < act.size(); ++ia)
      for (std::size_t ib = ia; ib < act.size(); ++ib)
        add_pair_candidates(act[ia], act[ib]);
  }
  for (int guard = 0; guard <= R + 1; ++guard) {
    if (guard == R + 1) {
      A.degeneracies.push_back("step1: iteration guard exceeded");
      break;
    }
    const Cand* bestp = nullptr;
    for (const Cand& c : pool) {
      bool better = bestp == nullptr || c.sum > bestp->sum ||
                    (c.sum == bestp->sum && c.shared > bestp->shared) ||
                    (c.sum == bestp->sum && c.shared == bestp->shared &&
                     std::tie(c.ta, c.tb, c.fp) < std::tie(bestp->ta, bestp->tb, bestp->fp));
      if (better) bestp = &c;
    }
    if (bestp == nullptr) break;
    Cand best = *bestp;

    Tile merged;
    merged.cx = std::move(best.mr.merged);
    const Tile& L = A.tiles[static_cast<std::size_t>(best.ta)];
    const Tile& Rt = A.tiles[static_cast<std::size_t>(best.tb)];
    TileEvent ev;
    ev.kind = TileEvent::Merge;
    for (int c = 0; c < L.size(); ++c) ev.left_cells.push_back(c);
    for (int c = 0; c < Rt.size(); ++c)
      ev.right_cells.push_back(best.mr.b_cell_index[static_cast<std::size_t>(c)]);
    merged.history = L.history;
    for (TileEvent h : Rt.history) {
      for (int& c : h.left_cells) c = best.mr.b_cell_index[static_cast<std::size_t>(c)];
      for (int& c : h.right_cells) c = best.mr.b_cell_index[static_cast<std::size_t>(c)];
      merged.history.push_back(std::move(h));
    }
    merged.history.push_back(std::move(ev));
    for (int c = 0; c < merged.size(); ++c) merged.core_cells.push_back(c);
    if (!is_tile(merged.cx)) {
      A.degeneracies.push_back("step1: merged union is not a tile");
      break;
    }
    int nid = static_cast<int>(A.tiles.size());
    A.tiles.push_back(std::move(merged));
    for (int r = 0; r < R; ++r)
      if (A.tile_of_relator[static_cast<std::size_t>(r)] == best.ta ||
          A.tile_of_relator[static_cast<std::size_t>(r)] == best.tb)
        A.tile_of_relator[static_cast<std::size_t>(r)] = nid;
    ++A.step1_merges;
    std::erase_if(pool, [&](const Cand& c) {
      return c.ta == best.ta || c.ta == best.tb || c.tb == best.ta || c.tb == best.tb;
    });
    for (int t : active())
      add_pair_candidates(std::min(t, nid), std::max(t, nid));
  }

  // ---- Step 2 ----
  for (int guard = 0; guard <= R + 1; ++guard) {
    if (guard == R + 1) {
      A.degeneracies.push_back("step2: iteration guard exceeded");
      break;
    }
    struct Best {
      int shared = -1, tt = -1, corbit = -1;
      MergeResult mr;
      std::vector<std::pair<int, int>> fp;
    } best;
    bool found = false;
    auto act = active();
    std::vector<int> singletons;
    for (int r = 0; r < R; ++r)
      if (A.tiles[static_cast<std::size_t>(A.tile_of_relator[static_cast<std::size_t>(r)])].size() == 1)
        singletons.push_back(r);
    for (int tt : act) {
      if (A.tiles[static_cast<std::size_t>(tt)].size() != 2) continue;
      long long cancel_T = A.tiles[static_cast<std::size_t>(tt)].cx.cancel();
      for (int r : singletons) {
        Complex2 poly = make_polygon(P.relators[static_cast<std::size_t>(r)], P.m, r);
        auto gls = detail::tile_gluings(A.tiles[static_cast<std::size_t>(tt)].cx, poly, P.m);
        for (auto& g : gls) {
          if (4 * g.mr.shared_edges > l) {
            push_degen("step2: leftover overlap > l/4 between tile " +
                                     std::to_string(tt) + " and cell " + std::to_string(r));
            continue;
          }
          // T ∪ C is a tile iff Cancel(T ∪ C) = Cancel(T) + |C ∩ T| > l/2.
          if (2 * (cancel_T + g.mr.shared_edges) <= l) continue;
          bool better = !found || g.mr.shared_edges > best.shared ||
                        (g.mr.shared_edges == best.shared &&
                         std::tie(tt, r, g.fingerprint) < std::tie(best.tt, best.corbit, best.fp));
          if (better) {
            best = {g.mr.shared_edges, tt, r, std::move(g.mr), std::move(g.fingerprint)};
            found = true;
          }
        }
      }
    }
    if (!found) break;

    const Tile& T = A.tiles[static_cast<std::size_t>(best.tt)];
    Tile tp;  // T' = T ∪ C
    tp.cx = std::move(best.mr.merged);
    tp.core_cells = T.core_cells;
    tp.history = T.history;
    TileEvent ev;
    ev.kind = TileEvent::Attach;
    for (int c = 0; c < T.size(); ++c) ev.left_cells.push_back(c);
    ev.right_cells.push_back(best.mr.b_cell_index[0]);
    tp.history.push_back(std::move(ev));
    if (!is_tile(tp.cx)) {
      A.degeneracies.push_back("step2: T ∪ C is not a tile");
      break;
    }

    // C' sub-case: another singleton cell with |C' ∩ T'| > 1/4 l.
    struct BestP {
      int shared = -1, corbit = -1;
      MergeResult mr;
      std::vector<std::pair<int, int>> fp;
    } bp;
    bool foundp = false;
    for (int r : singletons) {
      Complex2 poly = make_polygon(P.relators[static_cast<std::size_t>(r)], P.m, r);
      auto gls = detail::tile_gluings(tp.cx, poly, P.m, l / 4 + 1);
      for (auto& g : gls) {
        if (4 * g.mr.shared_edges <= l) continue;
        if (r == best.corbit) {
          // A polygon landing fully on the C cell is the same instance; a
          // partial strong overlap is the Step 2 same-orbit degeneracy.
          if (g.mr.shared_edges != P.l)
            push_degen("step2: same-orbit C' collision at cell " +
                                     std::to_string(r));
          continue;
        }
        if (2 * g.mr.shared_edges >= l) {
          push_degen("step2: overlap >= l/2 between T' and cell " +
                                   std::to_string(r));
          continue;
        }
        bool better = !foundp || g.mr.shared_edges > bp.shared ||
                      (g.mr.shared_edges == bp.shared &&
                       std::tie(r, g.fingerprint) < std::tie(bp.corbit, bp.fp));
        if (better) {
          bp = {g.mr.shared_edges, r, std::move(g.mr), std::move(g.fingerprint)};
          foundp = true;
        }
      }
    }

    if (foundp) {
      Tile big;  // T' ∪ C'
      big.cx = std::move(bp.mr.merged);
      big.core_cells = tp.core_cells;
      big.history = tp.history;
      TileEvent ev2;
      ev2.kind = TileEvent::Attach;
      for (int c = 0; c < tp.size(); ++c) ev2.left_cells.push_back(c);
      ev2.right_cells.push_back(bp.mr.b_cell_index[0]);
      big.history.push_back(std::move(ev2));
      if (!is_tile(big.cx)) {
        A.degeneracies.push_back("step2: T' ∪ C' is not a tile");
        break;
      }
      int nid = static_cast<int>(A.tiles.size());
      A.tiles.push_back(std::move(big));
      A.tile_of_relator[static_cast<std::size_t>(best.corbit)] = nid;
      A.tile_of_relator[static_cast<std::size_t>(bp.corbit)] = nid;
    } else {
      int nid = static_cast<int>(A.tiles.size());
      A.tiles.push_back(std::move(tp));
      A.tile_of_relator[static_cast<std::size_t>(best.corbit)] = nid;
    }
    ++A.step2_attachments;
  }

  // Remark-style size bound: flag (never assert) tiles above 5 cells.
  for (int t : active())
    if (A.tiles[static_cast<std::size_t>(t)].size() > 5)
      A.degeneracies.push_back("tile size exceeds 5 at tile " + std::to_string(t));
  return A;
}

// Pairwise intersection discipline for instantiated tiles in a common
// complex: pairs sharing no cells must intersect in a tree with < l/2 edges.
struct TileIntersectionViolation {
  int a = 0, b = 0;
  IntersectionReport rep;
};

inline std::vector<TileIntersectionViolation> check_tile_intersections(
    const Complex2& Y, const std::vector<std::vector<int>>& tile_cells) {
  std::vector<TileIntersectionViolation> out;
  for (std::size_t i = 0; i < tile_cells.size(); ++i)
    for (std::size_t j = i + 1; j < tile_cells.size(); ++j) {
      IntersectionReport rep = intersect_cell_sets(Y, tile_cells[i], tile_cells[j]);
      if (rep.shared_cells > 0) continue;
      if (rep.vertices == 0) continue;
      if (!rep.pass())
        out.push_back({static_cast<int>(i), static_cast<int>(j), rep});
    }
  return out;
}

}  // namespace rgw
