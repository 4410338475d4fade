#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgw/patch.hpp"
#include "rgw/presentation.hpp"
#include "rgw/rng.hpp"
#include "rgw/tiles.hpp"
#include "rgw/tilewalls.hpp"
#include "rgw/walls.hpp"

namespace rgw {

// chi = 1 - m + number of relators; positive chi certifies infinitely-ended
// behaviour in the regime the experiments probe.
inline long long euler_characteristic(int m, const Rational& d, int l) {
  return 1 - m + relator_count(m, d, l);
}

// ---- configuration ----

struct SuiteSelection {
  bool verify = true;         // balance + structure assertions per tile
  bool short_loops = true;    // embedded cycles shorter than l
  bool embedded_trees = true; // wall components are embedded trees
  bool returning = true;      // bounded-length returning decompositions
  bool qi = true;             // local lower distance bound along segments
  bool wall_exchange = false; // antipodal-letter relator statistics (m = 2)
};

inline SuiteSelection parse_suites(const std::string& csv) {
  SuiteSelection s{false, false, false, false, false, false};
  std::stringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok == "verify") s.verify = true;
    else if (tok == "short_loops") s.short_loops = true;
    else if (tok == "embedded_trees") s.embedded_trees = true;
    else if (tok == "returning") s.returning = true;
    else if (tok == "qi") s.qi = true;
    else if (tok == "wall_exchange") s.wall_exchange = true;
    else if (tok == "all") s = SuiteSelection{};
    else throw std::invalid_argument("unknown suite: " + tok);
  }
  return s;
}

struct ExperimentConfig {
  int m = 3;
  Rational d{1, 5};
  int l_min = 8;
  int l_max = 16;  // inclusive; only even l are run
  int trials = 50;
  std::uint64_t seed = 1;
  Rational eps{1, 100};
  int radius_extra = 2;    // patch radius = l + radius_extra
  int returning_bound = 8; // N
  int qi_c = 1;            // additive constant c in the distance bound
  int max_pairs = 20000;   // returning-search pair budget per component
  PatchBudget patch_budget = [] {
    PatchBudget b;
    b.max_oracle_calls = 0;  // folding only: keeps Monte Carlo runs fast
    return b;
  }();
  SuiteSelection suites;
};

// ---- per-trial observations ----

struct TrialReport {
  int l = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int relators = 0;
  bool degenerate = false;
  int degeneracy_count = 0;

  int patch_vertices = 0, patch_edges = 0, patch_cells = 0;
  bool patch_budget_exhausted = false;

  int structures = 0;
  int structure_diagnoses = 0;
  int balance_violations = 0;
  int assertion_failures = 0;

  int wall_diagnoses = 0;
  int walls = 0;

  bool short_loop_event = false;
  int short_cycle_length = -1;  // -1: none found

  int components = 0, interior_components = 0;
  int tree_violations = 0, crossing_violations = 0, cell_revisits = 0;
  int interior_self_intersections = 0;
  bool self_intersection_event = false;

  int returning_count = 0;
  bool returning_event = false;
  bool returning_budget_exhausted = false;

  int segments_untruncated = 0;
  int qi_checked = 0;
  int qi_violations = 0;

  int antipodal_letter_relators = 0;
  bool wall_exchange_witness = false;
  int witness_relator = -1, witness_position = -1;

  std::vector<std::string> failure_witnesses;
};

struct LengthAggregate {
  int l = 0;
  int trials = 0;
  int degenerate_trials = 0;
  int short_loop_events = 0;
  int self_intersection_events = 0;
  int returning_events = 0;
  int balance_violations = 0;
  int assertion_failures = 0;
  int structure_diagnoses = 0;
  int qi_checked = 0;
  int qi_violations = 0;
  int wall_diagnoses = 0;
  int antipodal_letter_relators = 0;
  int relators_total = 0;
  int wall_exchange_witnesses = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialReport> trials;
  std::vector<LengthAggregate> per_l;
  double seconds = 0;  // excluded from the deterministic serialization
};

// ---- short-embedded-loop event on a patch ----
//
// The ambient complex is vertex-transitive, so it contains an embedded cycle
// shorter than l iff it contains one through the base vertex; such a cycle
// lies inside the patch. A breadth-first search from the base to depth
// floor((l-1)/2) finds a non-tree edge closing a cycle of length < l exactly
// when one exists through the base (folding is conservative: undecided vertex
// identifications can only hide cycles, never invent them). Non-embedded cell
// boundaries are a second, global source of short cycles and are scanned
// directly.
inline int patch_short_cycle_length(const CayleyPatch& patch) {
  const Complex2& cx = patch.cx;
  const int l = cx.l;
  for (int c = 0; c < cx.size(); ++c) {
    std::set<int> verts;
    for (const DirEdge& de : cx.cells[static_cast<std::size_t>(c)].boundary)
      verts.insert(cx.edge_tail(de));
    if (static_cast<int>(verts.size()) < l) return static_cast<int>(verts.size());
  }
  std::vector<std::vector<std::pair<int, int>>> adj(
      static_cast<std::size_t>(cx.num_vertices));  // (neighbour, edge)
  for (int e = 0; e < cx.num_edges(); ++e) {
    const auto& ed = cx.edges[static_cast<std::size_t>(e)];
    if (ed.u == ed.v) return 1;
    adj[static_cast<std::size_t>(ed.u)].push_back({ed.v, e});
    adj[static_cast<std::size_t>(ed.v)].push_back({ed.u, e});
  }
  const int depth_cap = (l - 1) / 2;
  std::vector<int> dist(static_cast<std::size_t>(cx.num_vertices), -1);
  std::vector<int> via(static_cast<std::size_t>(cx.num_vertices), -1);  // entry edge
  std::deque<int> q;
  dist[static_cast<std::size_t>(patch.base)] = 0;
  q.push_back(patch.base);
  int best = -1;
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    if (dist[static_cast<std::size_t>(x)] >= depth_cap) continue;
    for (auto [y, e] : adj[static_cast<std::size_t>(x)]) {
      if (dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
        via[static_cast<std::size_t>(y)] = e;
        q.push_back(y);
      } else if (via[static_cast<std::size_t>(x)] != e && via[static_cast<std::size_t>(y)] != e) {
        int len = dist[static_cast<std::size_t>(x)] + dist[static_cast<std::size_t>(y)] + 1;
        if (len < l && (best < 0 || len < best)) best = len;
      }
    }
  }
  return best;
}

// ---- trial execution ----

inline TrialReport run_trial(const ExperimentConfig& cfg, int l, int trial) {
  TrialReport tr;
  tr.l = l;
  tr.trial = trial;
  tr.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(l) * 1000003ULL +
                                      static_cast<std::uint64_t>(trial));
  Presentation p = sample_presentation(cfg.m, cfg.d, l, tr.seed);
  tr.relators = static_cast<int>(p.relators.size());

  TileAssignment A = build_tile_assignment(p);
  tr.degenerate = A.degenerate();
  tr.degeneracy_count = static_cast<int>(A.degeneracies.size());
  auto S = build_structures(A);
  tr.structures = static_cast<int>(S.size());

  if (cfg.suites.verify) {
    for (const auto& [t, st] : S) {
      if (!st.ok()) {
        // The build met a gluing pattern outside the analyzed cases (e.g. a
        // disconnected tile intersection); connectedness holds only with
        // overwhelming probability, so this is a sample degeneracy, not an
        // implementation failure. Reported, excluded from categorical counts.
        tr.structure_diagnoses += static_cast<int>(st.diagnoses.size());
        for (const auto& d : st.diagnoses)
          tr.failure_witnesses.push_back("degenerate structure at tile " + std::to_string(t) +
                                         ": " + d);
        continue;
      }
      const Tile& T = A.tiles[static_cast<std::size_t>(t)];
      if (T.size() < 2) continue;
      for (int c = 0; c < T.cx.size(); ++c) {
        // Balancedness is claimed exactly for the cells assigned to this
        // tile; cells of a step-2 core are verified in the core's own
        // structure, where distances are measured in the core 1-skeleton.
        int r = T.cx.cells[static_cast<std::size_t>(c)].relator_id;
        if (A.tile_of_relator[static_cast<std::size_t>(r)] != t) continue;
        auto viol = verify_balanced(T.cx, st, c);
        tr.balance_violations += static_cast<int>(viol.size());
        for (const auto& v : viol)
          tr.failure_witnesses.push_back("balance violation: tile " + std::to_string(t) +
                                         " wall " + std::to_string(v.wall) + " dist " +
                                         std::to_string(v.dist) + " < " +
                                         std::to_string(v.bound));
      }
      auto fails = verify_assertions(A, S, t);
      tr.assertion_failures += static_cast<int>(fails.size());
      for (const auto& f : fails)
        tr.failure_witnesses.push_back("assertion: tile " + std::to_string(t) + ": " + f);
    }
  }

  bool need_patch = cfg.suites.short_loops || cfg.suites.embedded_trees ||
                    cfg.suites.returning || cfg.suites.qi;
  if (need_patch) {
    CayleyPatch patch = build_ball(p, l + cfg.radius_extra, cfg.d, cfg.eps, cfg.patch_budget);
    tr.patch_vertices = patch.cx.num_vertices;
    tr.patch_edges = patch.cx.num_edges();
    tr.patch_cells = patch.cx.size();
    tr.patch_budget_exhausted = patch.budget_exhausted;

    if (cfg.suites.short_loops) {
      tr.short_cycle_length = patch_short_cycle_length(patch);
      tr.short_loop_event = tr.short_cycle_length >= 0;
    }

    if (cfg.suites.embedded_trees || cfg.suites.returning || cfg.suites.qi) {
      WallStructureOnPatch W = instantiate_walls(patch, A, S);
      tr.wall_diagnoses = static_cast<int>(W.diagnoses.size());
      tr.walls = static_cast<int>(W.walls.size());

      if (cfg.suites.embedded_trees) {
        EmbeddingReport rep = check_embedded_trees(patch, W);
        tr.components = rep.components;
        tr.interior_components = rep.interior_components;
        tr.tree_violations = rep.tree_violations;
        tr.crossing_violations = rep.crossing_violations;
        tr.cell_revisits = rep.cell_revisits;
        tr.interior_self_intersections = rep.interior_self_intersections;
        tr.self_intersection_event = rep.interior_self_intersections > 0;
        for (const auto& v : rep.violations)
          if (v.interior && (v.cycle || v.crossing))
            tr.failure_witnesses.push_back(
                "interior self-intersection: wall " + std::to_string(v.wall) +
                (v.cycle ? " cycle" : "") + (v.crossing ? " crossing" : ""));
      }

      if (cfg.suites.returning) {
        ReturningSearch rs =
            find_returning(patch, W, A, S, cfg.returning_bound, cfg.max_pairs);
        tr.returning_count = static_cast<int>(rs.found.size());
        tr.returning_event = !rs.found.empty();
        tr.returning_budget_exhausted = rs.budget_exhausted;
      }

      if (cfg.suites.qi) {
        for (std::size_t w = 0; w < W.walls.size(); ++w) {
          if (W.walls[w].empty()) continue;
          TracedComponent comp = trace(patch.cx, W.pairings, &patch.complete, W.walls[w][0]);
          for (const HypergraphSegment& seg : extract_segments(comp)) {
            if (seg.truncated) continue;
            ++tr.segments_untruncated;
            QiRecord rec = qi_check(seg, patch.cx, cfg.d, cfg.qi_c);
            ++tr.qi_checked;
            if (!rec.pass) {
              ++tr.qi_violations;
              tr.failure_witnesses.push_back(
                  "distance bound violated: wall " + std::to_string(w) + " n=" +
                  std::to_string(rec.n) + " dist_hu=" + std::to_string(rec.endpoint_distance_hu));
            }
          }
        }
      }
    }
  }

  if (cfg.suites.wall_exchange) {
    tr.antipodal_letter_relators = count_antipodal_letter_relators(p);
    auto wit = find_wall_exchanging_relator(p, A);
    tr.wall_exchange_witness = wit.has_value();
    if (wit) {
      tr.witness_relator = wit->relator;
      tr.witness_position = wit->position;
    }
  }
  return tr;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  for (int l = cfg.l_min; l <= cfg.l_max; ++l) {
    if (l % 2 != 0) continue;
    LengthAggregate agg;
    agg.l = l;
    for (int t = 0; t < cfg.trials; ++t) {
      TrialReport tr = run_trial(cfg, l, t);
      ++agg.trials;
      if (tr.degenerate) ++agg.degenerate_trials;
      if (tr.short_loop_event) ++agg.short_loop_events;
      if (tr.self_intersection_event) ++agg.self_intersection_events;
      if (tr.returning_event) ++agg.returning_events;
      agg.balance_violations += tr.balance_violations;
      agg.assertion_failures += tr.assertion_failures;
      agg.structure_diagnoses += tr.structure_diagnoses;
      agg.qi_checked += tr.qi_checked;
      agg.qi_violations += tr.qi_violations;
      agg.wall_diagnoses += tr.wall_diagnoses;
      agg.antipodal_letter_relators += tr.antipodal_letter_relators;
      agg.relators_total += tr.relators;
      if (tr.wall_exchange_witness) ++agg.wall_exchange_witnesses;
      rep.trials.push_back(std::move(tr));
    }
    rep.per_l.push_back(agg);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---- serialization ----

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["m"] = c.m;
  j["d"] = {{"num", c.d.num}, {"den", c.d.den}};
  j["l_min"] = c.l_min;
  j["l_max"] = c.l_max;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["epsilon"] = {{"num", c.eps.num}, {"den", c.eps.den}};
  j["radius_extra"] = c.radius_extra;
  j["returning_bound"] = c.returning_bound;
  j["qi_c"] = c.qi_c;
  j["max_pairs"] = c.max_pairs;
  j["suites"] = nlohmann::ordered_json{{"verify", c.suites.verify},
                                       {"short_loops", c.suites.short_loops},
                                       {"embedded_trees", c.suites.embedded_trees},
                                       {"returning", c.suites.returning},
                                       {"qi", c.suites.qi},
                                       {"wall_exchange", c.suites.wall_exchange}};
  return j;
}

inline nlohmann::ordered_json trial_to_json(const TrialReport& t) {
  nlohmann::ordered_json j;
  j["l"] = t.l;
  j["trial"] = t.trial;
  j["seed"] = t.seed;
  j["relators"] = t.relators;
  j["degenerate"] = t.degenerate;
  j["degeneracy_count"] = t.degeneracy_count;
  j["patch"] = {{"vertices", t.patch_vertices},
                {"edges", t.patch_edges},
                {"cells", t.patch_cells},
                {"budget_exhausted", t.patch_budget_exhausted}};
  j["structures"] = t.structures;
  j["structure_diagnoses"] = t.structure_diagnoses;
  j["balance_violations"] = t.balance_violations;
  j["assertion_failures"] = t.assertion_failures;
  j["wall_diagnoses"] = t.wall_diagnoses;
  j["walls"] = t.walls;
  j["short_loop_event"] = t.short_loop_event;
  j["short_cycle_length"] = t.short_cycle_length;
  j["components"] = t.components;
  j["interior_components"] = t.interior_components;
  j["tree_violations"] = t.tree_violations;
  j["crossing_violations"] = t.crossing_violations;
  j["cell_revisits"] = t.cell_revisits;
  j["interior_self_intersections"] = t.interior_self_intersections;
  j["returning_count"] = t.returning_count;
  j["returning_budget_exhausted"] = t.returning_budget_exhausted;
  j["segments_untruncated"] = t.segments_untruncated;
  j["qi_checked"] = t.qi_checked;
  j["qi_violations"] = t.qi_violations;
  j["antipodal_letter_relators"] = t.antipodal_letter_relators;
  j["wall_exchange_witness"] = t.wall_exchange_witness;
  j["witness_relator"] = t.witness_relator;
  j["witness_position"] = t.witness_position;
  j["failure_witnesses"] = t.failure_witnesses;
  return j;
}

// Deterministic given the config: wall-clock timing is deliberately omitted.
inline std::string report_to_json(const ExperimentReport& rep) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(rep.config);
  j["per_l"] = nlohmann::ordered_json::array();
  for (const auto& a : rep.per_l) {
    nlohmann::ordered_json ja;
    ja["l"] = a.l;
    ja["trials"] = a.trials;
    ja["degenerate_trials"] = a.degenerate_trials;
    ja["short_loop_events"] = a.short_loop_events;
    ja["self_intersection_events"] = a.self_intersection_events;
    ja["returning_events"] = a.returning_events;
    ja["balance_violations"] = a.balance_violations;
    ja["assertion_failures"] = a.assertion_failures;
    ja["structure_diagnoses"] = a.structure_diagnoses;
    ja["qi_checked"] = a.qi_checked;
    ja["qi_violations"] = a.qi_violations;
    ja["wall_diagnoses"] = a.wall_diagnoses;
    ja["antipodal_letter_relators"] = a.antipodal_letter_relators;
    ja["relators_total"] = a.relators_total;
    ja["wall_exchange_witnesses"] = a.wall_exchange_witnesses;
    j["per_l"].push_back(std::move(ja));
  }
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : rep.trials) j["trials"].push_back(trial_to_json(t));
  return j.dump(2) + "\n";
}

inline std::string report_to_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "l,trials,degenerate_trials,short_loop_events,self_intersection_events,"
         "returning_events,balance_violations,assertion_failures,structure_diagnoses,qi_checked,qi_violations,"
         "wall_diagnoses,antipodal_letter_relators,relators_total,wall_exchange_witnesses\n";
  for (const auto& a : rep.per_l)
    out << a.l << ',' << a.trials << ',' << a.degenerate_trials << ',' << a.short_loop_events
        << ',' << a.self_intersection_events << ',' << a.returning_events << ','
        << a.balance_violations << ',' << a.assertion_failures << ',' << a.structure_diagnoses
        << ',' << a.qi_checked << ','
        << a.qi_violations << ',' << a.wall_diagnoses << ',' << a.antipodal_letter_relators
        << ',' << a.relators_total << ',' << a.wall_exchange_witnesses << '\n';
  return out.str();
}

}  // namespace rgw
