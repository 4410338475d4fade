#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rgw/diagrams.hpp"

namespace rgw {

struct PatchBudget {
  long long max_steps = 50000000;  // attachment walk steps
  int max_oracle_calls = 50;       // multi-cell diagram searches (0 = lookups only)
  int oracle_scope_extra = 2;      // oracle pass covers |witness| <= radius - l + this
  SearchBudget oracle{2, 20000, true};  // per-search budget
};

// A finite neighbourhood of the identity in the Cayley complex: the union of
// all 2-cells through vertices within radius - l of the base, folded so that
// each vertex has at most one outgoing edge per directed letter. Vertices
// whose identification could not be decided stay split (the patch maps onto
// the true complex, possibly non-injectively), so wall tracing can miss
// intersections but never invent them.
struct CayleyPatch {
  Complex2 cx;
  int base = 0;
  int radius = 0;
  std::vector<Word> witness;    // per vertex: a word from the base, length <= radius
  std::vector<bool> complete;   // per vertex: all incident cells attached
  std::vector<bool> flagged;    // per vertex: an identification returned Unknown
  std::vector<int> frontier;    // incomplete vertices (their star may miss cells)
  bool budget_exhausted = false;
  int oracle_equal = 0, oracle_distinct = 0, oracle_unknown = 0;
  int oracle_distinct_searched = 0;  // Distinct verdicts that needed a search
  int oracle_skipped = 0;            // pairs left unqueried by the call cap
  std::vector<DiscDiagram> equal_witnesses;  // audit trail for merges
};

inline std::vector<Traversal> cells_through_edge(const CayleyPatch& patch, int edge) {
  return patch.cx.cells_through(edge);
}

namespace detail {

// Mutable folded labelled graph with coincidence processing.
struct BallBuilder {
  int m = 0;
  std::vector<int> parent;              // union-find
  std::vector<std::vector<int>> out;    // per vertex: 2m slots, -1 = absent
  std::vector<Word> wit;
  std::deque<std::pair<int, int>> pending;
  long long steps = 0;

  explicit BallBuilder(int m_) : m(m_) {}

  int find(int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }

  int new_vertex(Word w) {
    parent.push_back(static_cast<int>(parent.size()));
    out.push_back(std::vector<int>(static_cast<std::size_t>(2 * m), -1));
    wit.push_back(std::move(w));
    return static_cast<int>(parent.size()) - 1;
  }

  Word extend(const Word& w, Letter a) const {
    Word r = w;
    if (!r.empty() && r.letters.back() == letter_inverse(a, m))
      r.letters.pop_back();
    else
      r.letters.push_back(a);
    return r;
  }

  // Set out[u][a] = v (and the mirror entry), queueing coincidences.
  void set_entry(int u, Letter a, int v) {
    u = find(u);
    v = find(v);
    int& slot = out[static_cast<std::size_t>(u)][a];
    if (slot == -1) {
      slot = v;
      Letter ia = letter_inverse(a, m);
      int& back = out[static_cast<std::size_t>(v)][ia];
      if (back == -1)
        back = u;
      else if (find(back) != u)
        pending.push_back({find(back), u});
    } else if (find(slot) != v) {
      pending.push_back({find(slot), v});
    }
  }

  void process_coincidences() {
    while (!pending.empty()) {
      auto [x, y] = pending.front();
      pending.pop_front();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      // Keep the vertex with the shorter witness (then the older one).
      if (std::make_pair(wit[static_cast<std::size_t>(y)].size(), y) <
          std::make_pair(wit[static_cast<std::size_t>(x)].size(), x))
        std::swap(x, y);
      parent[static_cast<std::size_t>(y)] = x;
      for (int a = 0; a < 2 * m; ++a) {
        int t = out[static_cast<std::size_t>(y)][static_cast<std::size_t>(a)];
        if (t >= 0) {
          out[static_cast<std::size_t>(y)][static_cast<std::size_t>(a)] = -1;
          set_entry(x, static_cast<Letter>(a), find(t));
        }
      }
    }
  }

  // Replace witnesses by breadth-first shortest words from `root` over the
  // folded graph (letter order breaks ties, so the result is deterministic).
  // Creation-order witnesses need not be geodesic: a vertex first reached
  // near the end of a relator walk carries a long witness until recomputed.
  void recompute_witnesses(int root) {
    root = find(root);
    std::vector<char> seen(parent.size(), 0);
    std::deque<int> q;
    wit[static_cast<std::size_t>(root)] = Word{};
    seen[static_cast<std::size_t>(root)] = 1;
    q.push_back(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int a = 0; a < 2 * m; ++a) {
        int t = out[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)];
        if (t < 0) continue;
        t = find(t);
        if (seen[static_cast<std::size_t>(t)]) continue;
        seen[static_cast<std::size_t>(t)] = 1;
        Word w = wit[static_cast<std::size_t>(v)];
        w.letters.push_back(static_cast<Letter>(a));
        wit[static_cast<std::size_t>(t)] = std::move(w);
        q.push_back(t);
      }
    }
  }

  // Trace the closed word `rot` from v, creating what is missing; returns
  // true when anything changed.
  bool attach(int v, const Word& rot) {
    bool changed = false;
    int cur = find(v);
    const int l = rot.size();
    for (int i = 0; i < l; ++i) {
      ++steps;
      Letter a = rot[i];
      int nxt = out[static_cast<std::size_t>(cur)][a];
      if (nxt == -1) {
        if (i == l - 1) {
          set_entry(cur, a, find(v));
        } else {
          int w = new_vertex(extend(wit[static_cast<std::size_t>(cur)], a));
          set_entry(cur, a, w);
          cur = w;
        }
        changed = true;
      } else {
        cur = find(nxt);
        if (i == l - 1 && cur != find(v)) {
          pending.push_back({cur, find(v)});
          changed = true;
        }
      }
      process_coincidences();
      cur = i == l - 1 ? find(v) : find(cur);
    }
    return changed;
  }
};

}  // namespace detail

inline CayleyPatch build_ball(const Presentation& P, int radius, const Rational& d,
                              const Rational& eps, PatchBudget budget = {}) {
  const int l = P.l, m = P.m;
  detail::BallBuilder B(m);
  int base0 = B.new_vertex(Word{});
  CayleyPatch patch;
  patch.radius = radius;

  // Default oracle cell budget from the isoperimetric bound at boundary
  // length l.
  budget.oracle.max_cells =
      std::max(budget.oracle.max_cells, isoperimetric_cell_bound(std::max(l, 1), l, d, eps));

  std::set<std::tuple<int, int, int>> recorded;  // (relator, rotation, anchor id)
  std::vector<std::tuple<int, int, int>> cells_todo;
  std::set<int> flagged_ids;
  bool exhausted = false;
  std::vector<int> final_attach_set;

  auto attach_sweeps = [&]() {
    bool changed = true;
    while (changed && !exhausted) {
      changed = false;
      B.recompute_witnesses(base0);
      std::vector<int> roots;
      for (int v = 0; v < static_cast<int>(B.parent.size()); ++v)
        if (B.find(v) == v && B.wit[static_cast<std::size_t>(v)].size() <= radius - l)
          roots.push_back(v);
      final_attach_set = roots;
      for (int v : roots) {
        for (int r = 0; r < static_cast<int>(P.relators.size()); ++r) {
          for (int rot = 0; rot < l; ++rot) {
            if (B.steps > budget.max_steps) {
              exhausted = true;
              return;
            }
            int anchor = B.find(v);
            if (B.wit[static_cast<std::size_t>(anchor)].size() > radius - l) continue;
            bool did = B.attach(anchor, rotate(P.relators[static_cast<std::size_t>(r)], rot));
            changed = changed || did;
            if (recorded.insert({r, rot, B.find(anchor)}).second)
              cells_todo.push_back({r, rot, B.find(anchor)});
          }
        }
      }
    }
  };

  // Cyclic canonical forms of all relators and their inverses: a pair whose
  // cell bound is 1 is Equal iff the product is conjugate to one of these, so
  // it is decided by lookup without a diagram search.
  std::set<Word> relator_canon;
  for (const Word& r : P.relators) {
    relator_canon.insert(cyclic_canonical(r, m));
    relator_canon.insert(cyclic_canonical(word_inverse(r, m), m));
  }

  auto oracle_pass = [&]() {
    if (exhausted) return false;
    bool merged_any = false;
    std::vector<int> scope;
    int limit = radius - l + budget.oracle_scope_extra;
    for (int v = 0; v < static_cast<int>(B.parent.size()); ++v)
      if (B.find(v) == v && B.wit[static_cast<std::size_t>(v)].size() <= limit)
        scope.push_back(v);
    int calls = patch.oracle_equal + patch.oracle_distinct_searched + patch.oracle_unknown;
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j) {
        int u = B.find(scope[i]), w = B.find(scope[j]);
        if (u == w || B.find(scope[i]) != scope[i] || B.find(scope[j]) != scope[j]) continue;
        const Word &wu = B.wit[static_cast<std::size_t>(u)], &ww = B.wit[static_cast<std::size_t>(w)];
        Word prod = reduce(concat(wu, word_inverse(ww, m)), m);
        if (prod.size() > l) continue;
        int bound = isoperimetric_cell_bound(prod.size(), l, d, eps);
        if (bound == 1 && !relator_canon.count(cyclic_canonical(
                              detail::strip_cyclic(prod, m).first, m))) {
          ++patch.oracle_distinct;  // certified: no one-cell diagram exists
          continue;
        }
        // A one-cell-bound pair whose product is conjugate to a relator is
        // Equal; the search below is then a cheap witness construction.
        // Multi-cell searches are the expensive case and are capped.
        if (bound > 1 && calls >= budget.max_oracle_calls) {
          ++patch.oracle_skipped;  // undecided but unqueried: stays split
          continue;
        }
        WordVerdict v = word_problem(wu, ww, P, d, eps, budget.oracle);
        if (bound > 1) ++calls;
        if (v.kind == WordVerdictKind::Equal) {
          ++patch.oracle_equal;
          if (v.witness) patch.equal_witnesses.push_back(std::move(*v.witness));
          B.pending.push_back({u, w});
          B.process_coincidences();
          merged_any = true;
        } else if (v.kind == WordVerdictKind::Unknown) {
          ++patch.oracle_unknown;
          flagged_ids.insert(u);
          flagged_ids.insert(w);
        } else {
          ++patch.oracle_distinct;
          ++patch.oracle_distinct_searched;
        }
      }
    return merged_any;
  };

  if (radius >= l) {
    attach_sweeps();
    while (oracle_pass()) attach_sweeps();
    B.recompute_witnesses(base0);
  }
  patch.budget_exhausted = exhausted;

  // ---- freeze into a Complex2 ----
  Complex2 cx(l, m);
  std::vector<int> index(B.parent.size(), -1);
  for (int v = 0; v < static_cast<int>(B.parent.size()); ++v)
    if (B.find(v) == v) {
      index[static_cast<std::size_t>(v)] = cx.add_vertex();
      patch.witness.push_back(B.wit[static_cast<std::size_t>(v)]);
    }
  std::set<int> attach_roots;
  for (int v : final_attach_set) attach_roots.insert(B.find(v));
  patch.complete.assign(static_cast<std::size_t>(cx.num_vertices), false);
  patch.flagged.assign(static_cast<std::size_t>(cx.num_vertices), false);
  for (int v = 0; v < static_cast<int>(B.parent.size()); ++v) {
    int r = B.find(v);
    if (index[static_cast<std::size_t>(r)] >= 0 && attach_roots.count(r) && !exhausted)
      patch.complete[static_cast<std::size_t>(index[static_cast<std::size_t>(r)])] = true;
  }
  for (int v : flagged_ids)
    patch.flagged[static_cast<std::size_t>(index[static_cast<std::size_t>(B.find(v))])] = true;
  for (int v = 0; v < cx.num_vertices; ++v)
    if (!patch.complete[static_cast<std::size_t>(v)]) patch.frontier.push_back(v);
  patch.base = index[static_cast<std::size_t>(B.find(base0))];

  // Edges: one per positive-letter slot.
  std::map<std::pair<int, int>, int> edge_id;  // (root, positive letter) -> edge
  for (int v = 0; v < static_cast<int>(B.parent.size()); ++v) {
    if (B.find(v) != v) continue;
    for (int a = 0; a < m; ++a) {
      int t = B.out[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)];
      if (t < 0) continue;
      edge_id[{v, a}] = cx.add_edge(index[static_cast<std::size_t>(v)],
                                    index[static_cast<std::size_t>(B.find(t))], a);
    }
  }

  // Cells: resolve recorded attachments, deduplicate by canonical boundary.
  std::set<std::vector<std::pair<int, int>>> seen;
  for (auto [r, rot, anchor] : cells_todo) {
    int cur = B.find(anchor);
    Word w = rotate(P.relators[static_cast<std::size_t>(r)], rot);
    std::vector<DirEdge> bd;
    bool ok = true;
    for (int i = 0; i < l && ok; ++i) {
      Letter a = w[i];
      int nxt = B.out[static_cast<std::size_t>(cur)][a];
      if (nxt < 0) {
        ok = false;  // budget cut the walk short
        break;
      }
      nxt = B.find(nxt);
      if (a < m) {
        auto it = edge_id.find({cur, a});
        if (it == edge_id.end()) { ok = false; break; }
        bd.push_back({it->second, +1});
      } else {
        auto it = edge_id.find({nxt, letter_inverse(a, m)});
        if (it == edge_id.end() ||
            cx.edges[static_cast<std::size_t>(it->second)].v != index[static_cast<std::size_t>(cur)]) {
          ok = false;
          break;
        }
        bd.push_back({it->second, -1});
      }
      cur = nxt;
    }
    if (!ok || cur != B.find(anchor)) continue;
    // Canonical form over rotations and orientation reversal.
    std::vector<std::pair<int, int>> seq, best;
    for (const DirEdge& de : bd) seq.push_back({de.edge, de.dir});
    for (int flip = 0; flip < 2; ++flip) {
      for (int s = 0; s < l; ++s) {
        std::vector<std::pair<int, int>> cand;
        for (int i = 0; i < l; ++i) cand.push_back(seq[static_cast<std::size_t>((s + i) % l)]);
        if (best.empty() || cand < best) best = cand;
      }
      std::reverse(seq.begin(), seq.end());
      for (auto& p : seq) p.second = -p.second;
    }
    if (!seen.insert(best).second) continue;
    Complex2::Cell cell;
    cell.relator_id = r;
    cell.rotation = rot;
    cell.orientation = +1;
    cell.boundary = bd;
    cell.word.assign(w.letters.begin(), w.letters.end());
    cx.add_cell(std::move(cell));
  }
  patch.cx = std::move(cx);
  return patch;
}

}  // namespace rgw
