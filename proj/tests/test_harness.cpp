#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <rgw/harness.hpp>

using namespace rgw;

TEST_CASE("euler characteristic arithmetic") {
  CHECK(euler_characteristic(3, Rational(1, 5), 20) == 623);
  // A count of exactly one relator gives chi = 0 at m = 2.
  CHECK(relator_count(2, Rational(1, 100), 2) == 1);
  CHECK(euler_characteristic(2, Rational(1, 100), 2) == 0);
  // Above the threshold the count, hence chi, only grows with l.
  long long prev = -1000;
  for (int l = 8; l <= 20; l += 2) {
    long long chi = euler_characteristic(3, Rational(1, 5), l);
    CHECK(chi > 0);
    CHECK(chi >= prev);
    prev = chi;
  }
}

TEST_CASE("suite selection parsing") {
  SuiteSelection s = parse_suites("verify,qi");
  CHECK(s.verify);
  CHECK(s.qi);
  CHECK_FALSE(s.short_loops);
  CHECK_FALSE(s.embedded_trees);
  CHECK_FALSE(s.returning);
  CHECK_FALSE(s.wall_exchange);
  SuiteSelection all = parse_suites("all");
  CHECK(all.verify);
  CHECK(all.short_loops);
  CHECK_FALSE(all.wall_exchange);  // opt-in, matching the default config
  CHECK_THROWS(parse_suites("nonsense"));
}

TEST_CASE("short-cycle scan: clean polygon patch finds nothing") {
  Presentation p;
  p.m = 1;
  p.l = 4;
  p.relators.push_back(word_from_string("aaaa", 1));
  CayleyPatch patch = build_ball(p, 4, Rational(1, 5), Rational(1, 100));
  CHECK(patch_short_cycle_length(patch) == -1);
}

TEST_CASE("zero trials produce an empty deterministic report") {
  ExperimentConfig cfg;
  cfg.trials = 0;
  cfg.l_min = 8;
  cfg.l_max = 10;
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.trials.empty());
  REQUIRE(rep.per_l.size() == 2);
  CHECK(rep.per_l[0].trials == 0);
  std::string j = report_to_json(rep);
  CHECK(j == report_to_json(run_experiment(cfg)));
}

TEST_CASE("small reference run: collapse events at l=8, clean distance bounds, determinism") {
  ExperimentConfig cfg;
  cfg.l_min = 8;
  cfg.l_max = 8;
  cfg.trials = 3;
  ExperimentReport rep = run_experiment(cfg);
  REQUIRE(rep.per_l.size() == 1);
  const LengthAggregate& a = rep.per_l[0];
  CHECK(a.trials == 3);
  // Desk-scale l=8 samples collapse to a two-element quotient: every trial
  // has embedded loops far shorter than l.
  CHECK(a.short_loop_events == 3);
  for (const TrialReport& t : rep.trials) {
    CHECK(t.short_cycle_length >= 1);
    CHECK(t.short_cycle_length < 8);
    CHECK(t.patch_vertices <= 4);
  }
  CHECK(a.qi_violations == 0);
  CHECK(a.balance_violations == 0);
  CHECK(a.assertion_failures == 0);

  // Byte-identical on repetition, and the CSV row agrees with the aggregate.
  ExperimentReport rep2 = run_experiment(cfg);
  CHECK(report_to_json(rep) == report_to_json(rep2));
  std::string csv = report_to_csv(rep);
  CHECK(csv.find("\n8,3,") != std::string::npos);
}

TEST_CASE("wall-exchange suite aggregates per-relator statistics") {
  ExperimentConfig cfg;
  cfg.m = 2;
  cfg.l_min = 8;
  cfg.l_max = 8;
  cfg.trials = 5;
  cfg.suites = SuiteSelection{false, false, false, false, false, true};
  ExperimentReport rep = run_experiment(cfg);
  const LengthAggregate& a = rep.per_l[0];
  CHECK(a.relators_total > 0);
  CHECK(a.antipodal_letter_relators > 0);
  CHECK(a.antipodal_letter_relators <= a.relators_total);
  for (const TrialReport& t : rep.trials) CHECK(t.patch_cells == 0);  // patch suites off
}
