// Acceptance sweep: one pass/fail line per criterion, nonzero exit on any
// failure. Deterministic invariant suites must pass categorically; Monte
// Carlo suites must show the predicted trend with binomial slack.
#include <rgw/harness.hpp>

#include <cmath>
#include <cstdio>
#include <deque>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace rgw;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

long long cancel_oracle(const Complex2& Y) {
  std::vector<int> deg(static_cast<std::size_t>(Y.num_edges()), 0);
  for (const auto& cell : Y.cells)
    for (const DirEdge& de : cell.boundary) ++deg[static_cast<std::size_t>(de.edge)];
  long long s = 0;
  for (int d : deg)
    if (d > 0) s += d - 1;
  return s;
}

// ---- criterion 1: cancellation vs independent degree counting ----
void criterion1() {
  Rng rng(20240824);
  int checked = 0, mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2;
    const int l = 2 * (3 + rng.below_int(4));  // 6, 8, 10, 12
    Word w = sample_relator(m, l, rng);
    Complex2 cx = make_polygon(w, m, 0);
    int extra = 1 + rng.below_int(5);  // up to 6 cells
    for (int a = 0; a < extra; ++a) {
      int c = rng.below_int(cx.size());
      int k = 1 + rng.below_int(l / 2 - 1);
      int start = rng.below_int(l);
      std::vector<DirEdge> path;
      for (int i = 0; i < k; ++i)
        path.push_back(
            cx.cells[static_cast<std::size_t>(c)].boundary[static_cast<std::size_t>((start + i) % l)]);
      attach_polygon(cx, Word(cx.cells[static_cast<std::size_t>(c)].word),
                     cx.cells[static_cast<std::size_t>(c)].relator_id, path, start);
    }
    ++checked;
    if (cx.cancel() != cancel_oracle(cx)) ++mismatches;
  }
  // Disc diagrams: internal-edge count agrees with the degree oracle.
  Presentation p;
  p.m = 3;
  p.l = 4;
  for (const char* s : {"acbC", "bABC", "abab", "caca"})
    p.relators.push_back(word_from_string(s, 3));
  SearchBudget budget;
  budget.max_cells = 2;
  int diagram_checked = 0;
  for (const char* s : {"acbC", "abAC", "abab"}) {
    auto res = find_disc_diagram(word_from_string(s, 3), p, budget);
    if (!res.diagram) continue;
    ++diagram_checked;
    if (res.diagram->internal_edges() != cancel_oracle(res.diagram->cx)) ++mismatches;
    if (res.diagram->cx.cancel() != res.diagram->internal_edges()) ++mismatches;
  }
  report(1, "cancellation equals independent edge-degree counting",
         mismatches == 0 && checked == 500 && diagram_checked >= 2,
         std::to_string(checked) + " complexes, " + std::to_string(diagram_checked) +
             " disc diagrams, " + std::to_string(mismatches) + " mismatches");
}

// Two cells sharing exactly the first k boundary edges.
Complex2 glued_pair_random(int l, int k, Rng& rng) {
  Word w = sample_relator(2, l, rng);
  Complex2 cx = make_polygon(w, 2, 0);
  std::vector<DirEdge> path;
  for (int i = 0; i < k; ++i) path.push_back(cx.cells[0].boundary[static_cast<std::size_t>(i)]);
  attach_polygon(cx, w, 1, path, 0);
  return cx;
}

// ---- criteria 2 and 4: balance formula and its tightness under surgery ----
void criteria2and4() {
  Rng rng(7);
  int checked = 0, formula_bad = 0, bound_bad = 0;
  int surgery_checked = 0, tight_bad = 0, low_bad = 0;
  for (int l : {8, 12, 16}) {
    for (int k = l / 4 + 1; 2 * k < l; ++k) {
      for (int rep = 0; rep < 5; ++rep) {
        Complex2 cx = glued_pair_random(l, k, rng);
        ++checked;
        Hu bal = cx.balance_hu();
        if (bal != 3 * l / 2 - 2 * k) ++formula_bad;   // (3/4 l - k) edges in hu
        if (!(bal > l / 2 && bal <= l)) ++bound_bad;   // 1/4 l < Bal <= 1/2 l
        TileWallStructure S = two_cell_surgery(cx, 1);
        if (!S.ok()) continue;
        if (!verify_balanced(cx, S, 0).empty() || !verify_balanced(cx, S, 1).empty()) {
          ++low_bad;
          continue;
        }
        ++surgery_checked;
        Hu mn = min_crossing_distance_hu(cx, S);
        if (mn > bal + 2) ++tight_bad;
      }
    }
  }
  report(2, "two-cell balance formula Bal = 3/4 l - |A| with 1/4 l < Bal <= 1/2 l",
         formula_bad == 0 && bound_bad == 0 && checked > 0,
         std::to_string(checked) + " tiles, " + std::to_string(formula_bad + bound_bad) +
             " failures");
  report(4, "surgered two-cell tiles: some crossing pair within Bal + 2 hu",
         surgery_checked == checked && tight_bad == 0 && low_bad == 0,
         std::to_string(surgery_checked) + "/" + std::to_string(checked) +
             " surgered and balanced, " + std::to_string(tight_bad) + " not tight");
}

// ---- criterion 3: categorical balancedness on sampled presentations ----
void criterion3() {
  int presentations = 0;
  long long balance = 0, assertions = 0, degenerate_structures = 0;
  for (int l : {12, 16}) {
    ExperimentConfig cfg;
    cfg.l_min = cfg.l_max = l;
    cfg.trials = 50;
    cfg.seed = 3;
    cfg.suites = SuiteSelection{true, false, false, false, false, false};
    ExperimentReport rep = run_experiment(cfg);
    presentations += rep.per_l[0].trials;
    balance += rep.per_l[0].balance_violations;
    assertions += rep.per_l[0].assertion_failures;
    degenerate_structures += rep.per_l[0].structure_diagnoses;
  }
  report(3, "tile-wall structures verify balancedness and structure assertions",
         presentations == 100 && balance == 0 && assertions == 0,
         std::to_string(presentations) + " presentations, " + std::to_string(balance) +
             " balance violations, " + std::to_string(assertions) + " assertion failures, " +
             std::to_string(degenerate_structures) + " degenerate structures excluded");
}

// ---- criterion 5: tree symmetry inequality against brute force ----
void criterion5() {
  Rng rng(55);
  long long triples = 0, bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int edges = 1 + rng.below_int(30);
    int n = edges + 1;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int v = 1; v < n; ++v) {
      int u = rng.below_int(v);
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
    auto bfs = [&](int from) {
      std::vector<int> dist(static_cast<std::size_t>(n), -1);
      std::deque<int> q{from};
      dist[static_cast<std::size_t>(from)] = 0;
      while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        for (int y : adj[static_cast<std::size_t>(x)])
          if (dist[static_cast<std::size_t>(y)] < 0) {
            dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
            q.push_back(y);
          }
      }
      return dist;
    };
    std::vector<std::vector<int>> dist;
    dist.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) dist.push_back(bfs(v));
    // The path alpha between two random vertices, recovered from distances.
    int a = rng.below_int(n), b = rng.below_int(n);
    std::vector<int> alpha;
    for (int v = 0; v < n; ++v)
      if (dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] +
              dist[static_cast<std::size_t>(v)][static_cast<std::size_t>(b)] ==
          dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)])
        alpha.push_back(v);
    std::sort(alpha.begin(), alpha.end(), [&](int u, int v) {
      return dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(u)] <
             dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)];
    });
    int alen = static_cast<int>(alpha.size()) - 1;  // |alpha| in edges
    // Smallest q with A inside the q-neighbourhood of alpha.
    int q = 0;
    for (int v = 0; v < n; ++v) {
      int dv = n;
      for (int u : alpha)
        dv = std::min(dv, dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]);
      q = std::max(q, dv);
    }
    int rhs = edges + std::max(alen, q);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      int y = alpha[i];
      int sy = alpha[alpha.size() - 1 - i];  // symmetry exchanging endpoints
      for (int z = 0; z < n; ++z)
        for (int zp = 0; zp < n; ++zp) {
          ++triples;
          if (dist[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] +
                  dist[static_cast<std::size_t>(sy)][static_cast<std::size_t>(zp)] >
              rhs)
            ++bad;
        }
    }
  }
  report(5, "tree symmetry inequality |y,z| + |s(y),z'| <= |A| + max{|alpha|, q}", bad == 0,
         std::to_string(triples) + " triples, " + std::to_string(bad) + " violations");
}

// ---- criterion 6: planted negative control for the self-intersection detector ----
void criterion6() {
  const int m = 2, l = 10;
  Word w = word_from_string("ababababab", m);
  Complex2 cx = make_polygon(w, m, 0);
  std::vector<DirEdge> shared;
  for (int i = 0; i < 4; ++i) shared.push_back(cx.cells[0].boundary[static_cast<std::size_t>(i)]);
  attach_polygon(cx, w, 1, shared, 0);
  const auto& b0 = cx.cells[0].boundary;
  const auto& b1 = cx.cells[1].boundary;
  std::vector<DirEdge> path{b0[8], b0[9], {b1[9].edge, -b1[9].dir}, {b1[8].edge, -b1[8].dir}};
  attach_polygon(cx, word_from_string("abBAbababa", m), 2, path, 0);

  std::vector<Pairing> antipodal(3, antipodal_pairing(l));
  EmbeddingReport bad = check_embedded_trees(cx, antipodal, nullptr);

  Pairing pr1 = antipodal_pairing(l);
  CellArc A{0, 8};
  apply_arc_surgery(pr1, l, sub_arc(A, true, 2, l));
  apply_arc_surgery(pr1, l, sub_arc(A, false, 2, l));
  std::vector<Pairing> surgered{antipodal_pairing(l), pr1, antipodal_pairing(l)};
  EmbeddingReport good = check_embedded_trees(cx, surgered, nullptr);

  report(6, "planted sharp-turn configuration fires the detector, surgered version is clean",
         bad.crossing_violations >= 1 && good.crossing_violations == 0 &&
             good.tree_violations == 0,
         "antipodal: " + std::to_string(bad.crossing_violations) + " crossings; surgered: " +
             std::to_string(good.crossing_violations + good.tree_violations) + " violations");
}

// Frequencies non-increasing in l, allowing at most one adjacent increase and
// only within two binomial standard errors.
bool trend_ok(const std::vector<int>& events, int n, std::string& detail) {
  int inversions = 0;
  bool slack_ok = true;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    double p0 = static_cast<double>(events[i]) / n;
    double p1 = static_cast<double>(events[i + 1]) / n;
    if (p1 <= p0) continue;
    ++inversions;
    double sigma = std::sqrt(p0 * (1 - p0) / n + p1 * (1 - p1) / n);
    if (p1 - p0 > 2 * sigma) slack_ok = false;
  }
  std::ostringstream os;
  os << "events:";
  for (int e : events) os << ' ' << e;
  os << "/" << n << ", " << inversions << " inversions";
  detail = os.str();
  return inversions <= 1 && slack_ok;
}

// ---- criteria 7, 8, 10: the reference Monte Carlo run ----
void criteria7_8_10() {
  ExperimentConfig cfg;
  cfg.l_min = 8;
  cfg.l_max = 16;
  cfg.trials = 50;
  cfg.seed = 1;
  cfg.suites = SuiteSelection{false, true, true, true, true, false};
  ExperimentReport rep = run_experiment(cfg);

  std::vector<int> loops, selfints, returns;
  long long qi_checked = 0, qi_bad = 0;
  int last_selfint = -1, last_return = -1;
  for (const auto& a : rep.per_l) {
    loops.push_back(a.short_loop_events);
    selfints.push_back(a.self_intersection_events);
    returns.push_back(a.returning_events);
    qi_checked += a.qi_checked;
    qi_bad += a.qi_violations;
    last_selfint = a.self_intersection_events;
    last_return = a.returning_events;
  }
  std::string d7a, d7b, d7c;
  bool ok_a = trend_ok(loops, cfg.trials, d7a);
  bool ok_b = trend_ok(selfints, cfg.trials, d7b);
  bool ok_c = trend_ok(returns, cfg.trials, d7c);
  bool zero_at_top = last_selfint == 0 && last_return == 0;
  bool in_time = rep.seconds <= 600.0;
  std::ostringstream det;
  det << "loops[" << d7a << "] selfint[" << d7b << "] returning[" << d7c << "]"
      << (zero_at_top ? "" : " (nonzero at largest l)") << ", "
      << static_cast<int>(rep.seconds) << "s";
  report(7, "Monte Carlo event frequencies non-increasing in l",
         ok_a && ok_b && ok_c && zero_at_top && in_time, det.str());

  report(8, "local distance bound holds on all untruncated traced segments", qi_bad == 0,
         std::to_string(qi_checked) + " segments, " + std::to_string(qi_bad) + " violations");

  ExperimentReport rep2 = run_experiment(cfg);
  bool identical = report_to_json(rep) == report_to_json(rep2);
  report(10, "repeated reference run produces byte-identical reports", identical,
         identical ? "reports match" : "reports differ");
}

// ---- criterion 9: antipodal-letter relators and wall-exchange witnesses ----
void criterion9() {
  std::vector<double> fractions;
  int witnesses_at_20 = 0, trials_at_20 = 0;
  for (int l : {8, 12, 16, 20}) {
    ExperimentConfig cfg;
    cfg.m = 2;
    cfg.l_min = cfg.l_max = l;
    cfg.trials = 20;
    cfg.seed = 1;  // the reference seed used across criteria 7-10
    cfg.suites = SuiteSelection{false, false, false, false, false, true};
    ExperimentReport rep = run_experiment(cfg);
    const auto& a = rep.per_l[0];
    fractions.push_back(static_cast<double>(a.antipodal_letter_relators) / a.relators_total);
    if (l == 20) {
      witnesses_at_20 = a.wall_exchange_witnesses;
      trials_at_20 = a.trials;
    }
  }
  bool increasing = true;
  for (std::size_t i = 0; i + 1 < fractions.size(); ++i)
    if (fractions[i + 1] <= fractions[i]) increasing = false;
  std::ostringstream os;
  os << "fractions:";
  for (double f : fractions) os << ' ' << f;
  os << "; witnesses at l=20: " << witnesses_at_20 << "/" << trials_at_20;
  report(9, "antipodal-letter fraction grows with l; wall-exchange witness every trial at l=20",
         increasing && witnesses_at_20 == trials_at_20 && trials_at_20 > 0, os.str());
}

}  // namespace

int main() {
  criterion1();
  criteria2and4();
  criterion3();
  criterion5();
  criterion6();
  criteria7_8_10();
  criterion9();
  std::printf("%d criterion failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
