// Command-line front end: Monte Carlo experiment runs, disc-diagram search,
// Cayley patch dumps, and tile-assignment dumps, all emitting JSON.
#include <CLI11.hpp>
#include <json.hpp>

#include <rgw/harness.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace rgw;
using nlohmann::ordered_json;

namespace {

// Accepts "p/q" or a finite decimal such as "0.2" (parsed exactly).
Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(s));
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  long long den = 1;
  for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

Presentation presentation_from(int m, const std::string& d_str, int l, std::uint64_t seed,
                               const std::string& relators_csv) {
  if (!relators_csv.empty()) {
    Presentation p;
    p.m = m;
    p.l = l;
    p.d = parse_rational(d_str);
    std::stringstream in(relators_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      Word w = word_from_string(tok, m);
      if (w.size() != l) throw std::runtime_error("relator length != l: " + tok);
      if (!is_cyclically_reduced(w, m))
        throw std::runtime_error("relator not cyclically reduced: " + tok);
      p.relators.push_back(w);
    }
    return p;
  }
  return sample_presentation(m, parse_rational(d_str), l, seed);
}

ordered_json complex_to_json(const Complex2& cx, int m) {
  ordered_json j;
  j["l"] = cx.l;
  j["m"] = cx.m;
  j["vertices"] = cx.num_vertices;
  j["edges"] = ordered_json::array();
  for (const auto& e : cx.edges)
    j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"label", e.label}});
  j["cells"] = ordered_json::array();
  for (const auto& c : cx.cells) {
    ordered_json jc;
    jc["relator"] = c.relator_id;
    jc["rotation"] = c.rotation;
    jc["orientation"] = c.orientation;
    jc["word"] = word_to_string(Word(c.word), m);
    ordered_json bd = ordered_json::array();
    for (const auto& de : c.boundary) bd.push_back({{"edge", de.edge}, {"dir", de.dir}});
    jc["boundary"] = std::move(bd);
    j["cells"].push_back(std::move(jc));
  }
  return j;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out_path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on walls in random group presentations"};
  app.require_subcommand(1);

  // ---- run ----
  auto* run = app.add_subcommand("run", "Monte Carlo experiment sweep");
  int m = 3, l = 8, l_max = -1, trials = 50, radius = 2, returning_bound = 8;
  std::uint64_t seed = 1;
  std::string d_str = "1/5", eps_str = "1/100", suites = "all", out_path, csv_path;
  run->add_option("--m", m, "generators");
  run->add_option("--d", d_str, "density (p/q or decimal)");
  run->add_option("--l", l, "smallest relator length (even)");
  run->add_option("--l-max", l_max, "largest relator length (default: --l)");
  run->add_option("--trials", trials, "trials per length");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--radius", radius, "patch radius beyond l");
  run->add_option("--epsilon", eps_str, "isoperimetric slack");
  run->add_option("--returning-bound", returning_bound, "max returning decomposition length");
  run->add_option("--suites", suites,
                  "comma list: verify,short_loops,embedded_trees,returning,qi,wall_exchange,all");
  run->add_option("--out", out_path, "JSON report path ('-' = stdout)");
  run->add_option("--csv", csv_path, "CSV summary path");
  run->callback([&] {
    ExperimentConfig cfg;
    cfg.m = m;
    cfg.d = parse_rational(d_str);
    cfg.l_min = l;
    cfg.l_max = l_max < 0 ? l : l_max;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.eps = parse_rational(eps_str);
    cfg.radius_extra = radius;
    cfg.returning_bound = returning_bound;
    cfg.suites = parse_suites(suites);
    if (!(cfg.d * Rational(24) < Rational(5)))
      std::cerr << "warning: density " << cfg.d.str()
                << " is outside (0, 5/24); trend claims do not apply\n";
    ExperimentReport rep = run_experiment(cfg);
    emit(out_path, report_to_json(rep));
    if (!csv_path.empty()) emit(csv_path, report_to_csv(rep));
    std::cerr << "completed " << rep.trials.size() << " trials in " << rep.seconds << "s\n";
    long long hard = 0;
    for (const auto& a : rep.per_l)
      hard += a.balance_violations + a.assertion_failures + a.qi_violations + a.wall_diagnoses;
    if (hard > 0) {
      std::cerr << "deterministic invariant failures: " << hard << "\n";
      throw CLI::RuntimeError(2);
    }
  });

  // ---- diagram ----
  auto* dia = app.add_subcommand("diagram", "bounded disc-diagram search for a boundary word");
  std::string boundary, relators_csv;
  int max_cells = 2;
  long long max_states = 200000;
  dia->add_option("--m", m, "generators");
  dia->add_option("--l", l, "relator length");
  dia->add_option("--d", d_str, "density");
  dia->add_option("--seed", seed, "presentation seed (ignored with --relators)");
  dia->add_option("--relators", relators_csv, "explicit comma-separated relators");
  dia->add_option("--boundary", boundary, "boundary word")->required();
  dia->add_option("--max-cells", max_cells, "cell budget");
  dia->add_option("--max-states", max_states, "state budget");
  dia->add_option("--out", out_path, "JSON output path ('-' = stdout)");
  dia->callback([&] {
    Presentation p = presentation_from(m, d_str, l, seed, relators_csv);
    SearchBudget budget;
    budget.max_cells = max_cells;
    budget.max_states = max_states;
    DiagramSearchResult res = find_disc_diagram(word_from_string(boundary, m), p, budget);
    ordered_json j;
    j["boundary"] = boundary;
    j["found"] = res.diagram.has_value();
    j["states_explored"] = res.stats.states_explored;
    j["exhaustive"] = res.stats.exhaustive;
    if (res.diagram) {
      j["cells"] = res.diagram->cells();
      j["internal_edges"] = res.diagram->internal_edges();
      j["complex"] = complex_to_json(res.diagram->cx, m);
    }
    emit(out_path, j.dump(2) + "\n");
  });

  // ---- ball ----
  auto* ball = app.add_subcommand("ball", "build and dump a Cayley patch");
  int abs_radius = -1;
  bool with_walls_dot = false;
  ball->add_option("--m", m, "generators");
  ball->add_option("--d", d_str, "density");
  ball->add_option("--l", l, "relator length");
  ball->add_option("--seed", seed, "presentation seed (ignored with --relators)");
  ball->add_option("--relators", relators_csv, "explicit comma-separated relators");
  ball->add_option("--radius", abs_radius, "patch radius (default l+2)");
  ball->add_option("--epsilon", eps_str, "isoperimetric slack");
  ball->add_flag("--walls-dot", with_walls_dot, "also emit DOT with traced walls");
  ball->add_option("--out", out_path, "JSON output path ('-' = stdout)");
  ball->callback([&] {
    Presentation p = presentation_from(m, d_str, l, seed, relators_csv);
    int r = abs_radius < 0 ? l + 2 : abs_radius;
    CayleyPatch patch = build_ball(p, r, parse_rational(d_str), parse_rational(eps_str));
    ordered_json j;
    j["base"] = patch.base;
    j["radius"] = r;
    j["budget_exhausted"] = patch.budget_exhausted;
    j["complete"] = patch.complete;
    j["frontier"] = patch.frontier;
    j["flagged"] = patch.flagged;
    j["complex"] = complex_to_json(patch.cx, p.m);
    if (with_walls_dot) {
      TileAssignment A = build_tile_assignment(p);
      auto S = build_structures(A);
      WallStructureOnPatch W = instantiate_walls(patch, A, S);
      j["walls_dot"] = walls_to_dot(patch.cx, W.pairings);
    }
    emit(out_path, j.dump(2) + "\n");
  });

  // ---- tiles ----
  auto* tiles = app.add_subcommand("tiles", "build and dump the tile assignment");
  tiles->add_option("--m", m, "generators");
  tiles->add_option("--d", d_str, "density");
  tiles->add_option("--l", l, "relator length");
  tiles->add_option("--seed", seed, "presentation seed (ignored with --relators)");
  tiles->add_option("--relators", relators_csv, "explicit comma-separated relators");
  tiles->add_option("--out", out_path, "JSON output path ('-' = stdout)");
  tiles->callback([&] {
    Presentation p = presentation_from(m, d_str, l, seed, relators_csv);
    TileAssignment A = build_tile_assignment(p);
    ordered_json j;
    j["relators"] = ordered_json::array();
    for (const auto& w : p.relators) j["relators"].push_back(word_to_string(w, p.m));
    j["tile_of_relator"] = A.tile_of_relator;
    j["step1_merges"] = A.step1_merges;
    j["step2_attachments"] = A.step2_attachments;
    j["degeneracies"] = A.degeneracies;
    j["tiles"] = ordered_json::array();
    std::set<int> active(A.tile_of_relator.begin(), A.tile_of_relator.end());
    for (int t : active) {
      const Tile& T = A.tiles[static_cast<std::size_t>(t)];
      ordered_json jt;
      jt["id"] = t;
      jt["cells"] = T.size();
      jt["relator_ids"] = ordered_json::array();
      for (const auto& c : T.cx.cells) jt["relator_ids"].push_back(c.relator_id);
      jt["cancel"] = T.cx.cancel();
      jt["balance_hu"] = T.size() > 1 ? T.cx.balance_hu() : 0;
      jt["core_cells"] = T.core_cells;
      j["tiles"].push_back(std::move(jt));
    }
    emit(out_path, j.dump(2) + "\n");
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}
