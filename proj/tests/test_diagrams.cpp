#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rgw/diagrams.hpp"

using namespace rgw;

namespace {

Presentation tiny(std::vector<std::string> rels, int m, int l) {
  Presentation p;
  p.m = m;
  p.l = l;
  p.d = Rational(1, 5);
  for (const auto& s : rels) p.relators.push_back(word_from_string(s, m));
  return p;
}

// Check the free-group identity: the witness traversal reduces to the boundary.
void check_witness(const DiscDiagram& D, const Word& requested, int m) {
  // The bouquet traversal is a product of conjugates of relators equal to
  // the reduced boundary as a free-group element, exactly.
  CHECK(reduce(D.boundary_traversal, m) == reduce(requested, m));
  CHECK(D.boundary == reduce(requested, m));
  CHECK(D.euler_contractible());
  CHECK(D.internal_edges() == 0);  // bouquet witnesses have no internal edges
  CHECK(check_fulfilled(D.cx));
}

}  // namespace

TEST_CASE("boundary equal to a relator: single-cell diagram") {
  Presentation p = tiny({"ababAB"}, 2, 6);
  SearchBudget b;
  b.max_cells = 1;
  auto r = find_disc_diagram(word_from_string("ababAB", 2), p, b);
  REQUIRE(r.diagram.has_value());
  CHECK(r.diagram->cells() == 1);
  check_witness(*r.diagram, word_from_string("ababAB", 2), 2);
}

TEST_CASE("rotated and inverted relator boundaries are filled") {
  Presentation p = tiny({"ababAB"}, 2, 6);
  SearchBudget b;
  b.max_cells = 1;
  for (const Word& w :
       cyclic_translates_and_inversion(word_from_string("ababAB", 2), 2)) {
    auto r = find_disc_diagram(w, p, b);
    REQUIRE(r.diagram.has_value());
    CHECK(r.diagram->cells() == 1);
    check_witness(*r.diagram, w, 2);
  }
}

TEST_CASE("backtracking cycle reduces to the empty diagram") {
  Presentation p = tiny({"ababAB"}, 2, 6);
  SearchBudget b;
  auto r = find_disc_diagram(word_from_string("abBA", 2), p, b);
  REQUIRE(r.diagram.has_value());
  CHECK(r.diagram->cells() == 0);
}

TEST_CASE("conjugated relator needs a stem") {
  Presentation p = tiny({"ababAB"}, 2, 6);
  SearchBudget b;
  b.max_cells = 1;
  Word w = reduce(word_from_string("b" "ababAB" "B", 2), 2);
  auto r = find_disc_diagram(w, p, b);
  REQUIRE(r.diagram.has_value());
  check_witness(*r.diagram, w, 2);
}

TEST_CASE("two-cell product boundary") {
  Presentation p = tiny({"ababAB", "aabbab"}, 2, 6);
  SearchBudget b;
  b.max_cells = 2;
  Word w = reduce(concat(word_from_string("ababAB", 2), word_from_string("aabbab", 2)), 2);
  auto r = find_disc_diagram(w, p, b);
  REQUIRE(r.diagram.has_value());
  CHECK(r.diagram->cells() <= 2);
  check_witness(*r.diagram, w, 2);
}

TEST_CASE("exhaustive absence certificate for a non-filling cycle") {
  Presentation p = tiny({"aaabbb"}, 2, 6);
  SearchBudget b;
  b.max_cells = 2;
  b.max_states = 500000;
  auto r = find_disc_diagram(word_from_string("ababab", 2), p, b);
  CHECK_FALSE(r.diagram.has_value());
  CHECK(r.stats.exhaustive);
  CHECK(r.stats.states_explored > 0);
}

TEST_CASE("memoization changes state counts but not outcomes") {
  Presentation p = tiny({"ababAB", "aabbab"}, 2, 6);
  for (const char* ws : {"ababAB", "aabbab", "ababab"}) {
    Word w = word_from_string(ws, 2);
    SearchBudget with;
    with.max_cells = 2;
    SearchBudget without = with;
    without.use_memo = false;
    without.max_states = 2000000;
    auto r1 = find_disc_diagram(w, p, with);
    auto r2 = find_disc_diagram(w, p, without);
    CHECK(r1.diagram.has_value() == r2.diagram.has_value());
  }
}

TEST_CASE("word_problem basics") {
  Presentation p = tiny({"ababAB"}, 2, 6);
  Rational d(1, 5), eps(1, 100);
  SearchBudget b;
  b.max_cells = 4;
  SUBCASE("identical words") {
    Word w = word_from_string("abab", 2);
    auto v = word_problem(w, w, p, d, eps, b);
    CHECK(v.kind == WordVerdictKind::Equal);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->cells() == 0);
  }
  SUBCASE("relator vs empty") {
    auto v = word_problem(word_from_string("ababAB", 2), Word{}, p, d, eps, b);
    CHECK(v.kind == WordVerdictKind::Equal);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->cells() == 1);
  }
  SUBCASE("single letters distinct under exhaustive search") {
    auto v = word_problem(word_from_string("a", 2), word_from_string("b", 2), p, d, eps, b);
    CHECK(v.kind == WordVerdictKind::DistinctAssumingIso);
  }
  SUBCASE("degenerate density rejected") {
    CHECK_THROWS(word_problem(word_from_string("a", 2), word_from_string("b", 2), p,
                              Rational(2, 5), Rational(1, 5), b));
  }
}

TEST_CASE("word_problem relator halves are equal in the group") {
  // r = w1 * w2^-1 with |w1| = |w2| = 3 makes w1 = w2 in G.
  Presentation p = tiny({"abaBAB"}, 2, 6);
  Word w1 = word_from_string("aba", 2);
  Word w2 = word_from_string("bab", 2);  // r = aba (bab)^-1 = abaBAB
  Rational d(1, 5), eps(1, 100);
  SearchBudget b;
  b.max_cells = 3;
  auto v = word_problem(w1, w2, p, d, eps, b);
  CHECK(v.kind == WordVerdictKind::Equal);
  REQUIRE(v.witness.has_value());
  check_witness(*v.witness, reduce(concat(w1, word_inverse(w2, 2)), 2), 2);
}

TEST_CASE("short_embedded_loop_check") {
  const int m = 2;
  SUBCASE("single polygon is clean") {
    Word w = word_from_string("ababababbbab", m);
    Complex2 cx = make_polygon(w, m, 0);
    CHECK(short_embedded_loop_check(cx).empty());
  }
  SUBCASE("planted short cycle reported") {
    // Unlabeled synthetic 2-complex: an l-gon cell plus a chord creating an
    // (l-2)-cycle in the 1-skeleton.
    Word w = word_from_string("ababababbbab", m);
    Complex2 cx = make_polygon(w, m, 0);
    cx.add_edge(0, 2, -1);
    auto v = short_embedded_loop_check(cx);
    bool found = false;
    for (const auto& lv : v)
      if (lv.kind == LoopViolation::ShortCycle && lv.length == 3) found = true;
    CHECK(found);
  }
  SUBCASE("cell with repeated boundary vertex reported") {
    // Glue the polygon to itself: identify two boundary vertices via a cell
    // traversing an edge twice is hard to plant cleanly; instead plant a
    // 1-gon-style defect with a synthetic cell of repeated vertices.
    Complex2 cx(4, m);
    int v0 = cx.add_vertex();
    int v1 = cx.add_vertex();
    int v2 = cx.add_vertex();
    int e0 = cx.add_edge(v0, v1, -1);
    int e1 = cx.add_edge(v1, v2, -1);
    int e2 = cx.add_edge(v2, v1, -1);
    int e3 = cx.add_edge(v1, v0, -1);
    Complex2::Cell cell;
    cell.boundary = {{e0, +1}, {e1, +1}, {e2, +1}, {e3, +1}};
    cell.word = {0, 0, 0, 0};
    cx.add_cell(std::move(cell));
    auto v = short_embedded_loop_check(cx);
    bool found = false;
    for (const auto& lv : v)
      if (lv.kind == LoopViolation::CellBoundaryNotEmbedded) found = true;
    CHECK(found);
  }
}

TEST_CASE("marked_cell_check") {
  const int m = 2, l = 12;
  Word w = word_from_string("ababababbbab", m);
  auto build = [&](int k) {
    Complex2 cx = make_polygon(w, m, 0);
    std::vector<DirEdge> path;
    for (int i = 0; i < k; ++i) path.push_back(cx.cells[0].boundary[static_cast<std::size_t>(i)]);
    attach_polygon(cx, w, 1, path, 0);
    return cx;
  };
  SUBCASE("weak attachment passes") {
    CHECK_FALSE(marked_cell_check(build(l / 4), 1));  // Cancel = 3, threshold 3
  }
  SUBCASE("strong attachment flagged") {
    CHECK(marked_cell_check(build(l / 4 + 1), 1));
  }
  SUBCASE("absent or non-unique marked cell rejected") {
    Complex2 cx = build(2);
    CHECK_THROWS(marked_cell_check(cx, 7));  // no cell carries id 7
    Complex2 one = make_polygon(w, m, 0);
    CHECK_THROWS(marked_cell_check(one, 0));  // |Y'| < 2
  }
}

TEST_CASE("micro-scale exhaustive agreement: all length-4 cycles vs the relator set") {
  // m=2, l=4, single relator abab: a reduced 4-cycle bounds a <=1-cell diagram
  // iff it is a cyclic translate/inverse of abab. Brute-force the support.
  Presentation p = tiny({"abab"}, 2, 4);
  SearchBudget b;
  b.max_cells = 1;
  std::set<Word> fillable;
  for (const Word& t : cyclic_translates_and_inversion(word_from_string("abab", 2), 2))
    fillable.insert(cyclic_canonical(t, 2));
  int checked = 0;
  for (int a = 0; a < 4; ++a)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c)
        for (int dd = 0; dd < 4; ++dd) {
          Word w(std::vector<Letter>{static_cast<Letter>(a), static_cast<Letter>(bb),
                                     static_cast<Letter>(c), static_cast<Letter>(dd)});
          if (!is_cyclically_reduced(w, 2)) continue;
          ++checked;
          auto r = find_disc_diagram(w, p, b);
          bool expect = fillable.count(cyclic_canonical(w, 2)) > 0;
          CAPTURE(word_to_string(w, 2));
          CHECK(r.diagram.has_value() == expect);
          CHECK(r.stats.exhaustive);
        }
  CHECK(checked > 0);
}
