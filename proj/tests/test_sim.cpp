#include "qrm/sim.hpp"

#include "doctest.h"

#include <cstdio>
#include <sstream>

using namespace qrm;

namespace {

const CompositionTable& tables() {
  static const CompositionTable t = load_tables(QRM_TABLES_PATH);
  return t;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("world generation") {
  WorldConfig cfg;
  cfg.landmarks = 12;
  cfg.images = 20;
  const World a = gen_world(cfg, 42);
  const World b = gen_world(cfg, 42);
  CHECK(world_to_string(a) == world_to_string(b));
  CHECK(world_to_string(gen_world(cfg, 43)) != world_to_string(a));
  CHECK(a.landmarks.size() == 12);
  CHECK(a.images.size() == 20);
  CHECK(min_boundary_distance(a.landmarks) >= cfg.boundaryTolerance * cfg.side);
  for (const auto& p : a.images) {
    CHECK_FALSE(degenerate_viewpoint(p, a.landmarks, cfg.imageClearance * cfg.side));
    CHECK(p.x() >= 0.0);
    CHECK(p.x() <= 1.0);
  }
  cfg.landmarks = 2;
  CHECK_THROWS_AS(gen_world(cfg, 1), std::invalid_argument);
}

TEST_CASE("world file round trip") {
  WorldConfig cfg;
  cfg.landmarks = 5;
  cfg.images = 3;
  cfg.side = 7.5;
  const World w = gen_world(cfg, 9);
  const std::string path = "test_sim_world.txt";
  save_world(w, path);
  const World back = load_world(path);
  std::remove(path.c_str());
  CHECK(back.side == 7.5);
  CHECK(back.landmarks == w.landmarks);
  CHECK(back.images == w.images);

  const World hand = world_from_string("L 3 0.1 0.2\nL 8 0.5 0.9\nW 0.4 0.4\n");
  CHECK(hand.landmarks.size() == 2);
  CHECK(hand.landmarks.at(8) == Point2(0.5, 0.9));
  CHECK(hand.side == doctest::Approx(0.9));
  CHECK_THROWS(world_from_string("L 1 0.1\n"));
  CHECK_THROWS(world_from_string("L 1 0.1 0.1\nL 1 0.2 0.2\n"));
  CHECK_THROWS(world_from_string("Q 1 2\n"));
}

TEST_CASE("single run metrics") {
  WorldConfig cfg;
  cfg.landmarks = 8;
  cfg.images = 6;
  const World w = gen_world(cfg, 5);
  SimOptions opts;
  opts.timing = false;
  const SimResult r = run_sim(w, tables(), opts);
  REQUIRE(r.rows.size() == 7);
  CHECK(r.truthViolations == 0);
  CHECK(r.rows[0].removedPct == 0.0);
  CHECK(r.rows[0].step == 0);
  CHECK(r.rows[1].removedPct >= 50.0);
  for (size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].removedPct >= r.rows[i - 1].removedPct);
    CHECK(r.rows[i].constrainedPct >= r.rows[i - 1].constrainedPct);
    CHECK(r.rows[i].updateMillis == 0.0);
  }
  CHECK(r.rows.back().removedPct <= 100.0);
  CHECK(r.map.nodes().size() == 8);
  CHECK(r.measurements == 6 * 56 * 3);

  const SimResult again = run_sim(w, tables(), opts);
  CHECK(again.map.dump() == r.map.dump());
}

TEST_CASE("converged map holds the truth") {
  WorldConfig cfg;
  cfg.landmarks = 7;
  cfg.images = 1;
  const World w = gen_world(cfg, 8);
  const QualMap m = converged_map(w.landmarks, tables());
  CHECK(m.open_states() == static_cast<long>(m.edge_count() * 3));
  for (const auto& [a, pa] : w.landmarks)
    for (const auto& [b, pb] : w.landmarks)
      for (const auto& [c, pc] : w.landmarks) {
        if (a == b || b == c || a == c) continue;
        CHECK(m.get_relation(a, b, c) == StateSet(region_of(pa, pb, pc, tables().labeling)));
      }
}

TEST_CASE("campaign is reproducible") {
  CampaignConfig cfg;
  cfg.runs = 2;
  cfg.world = {7, 4};
  cfg.nNearest = {4, 7};
  cfg.timing = false;
  const CampaignResult a = run_mc(cfg, tables());
  cfg.jobs = 2;
  const CampaignResult b = run_mc(cfg, tables());
  CHECK(metrics_csv(a.rows) == metrics_csv(b.rows));
  CHECK(a.truthViolations == 0);
  CHECK(a.rows.size() == 2 * 2 * 5);

  const auto raw = split_lines(metrics_csv(a.rows));
  CHECK(raw.front() == "step,n,run,removed_pct,constrained_pct,nonadj_pct,rng_cost,update_ms");
  CHECK(raw[1].rfind("0,4,0,", 0) == 0);

  const auto agg = split_lines(aggregate_csv(a.rows));
  CHECK(agg.front() ==
        "step,n,runs,removed_pct_mean,removed_pct_std,constrained_pct_mean,constrained_pct_std,nonadj_pct_mean,"
        "nonadj_pct_std,rng_cost_mean,rng_cost_std,update_ms_mean,update_ms_std");
  CHECK(agg.size() == 1 + 2 * 5);
}

TEST_CASE("aggregate statistics") {
  std::vector<CampaignRow> rows;
  MetricsRow m;
  m.step = 1;
  m.removedPct = 10.0;
  rows.push_back({5, 0, m});
  m.removedPct = 20.0;
  rows.push_back({5, 1, m});
  const auto agg = split_lines(aggregate_csv(rows));
  REQUIRE(agg.size() == 2);
  CHECK(agg[1].rfind("1,5,2,15.000000,7.071068,", 0) == 0);
}
