#include "qrm/qmap.hpp"

#include "doctest.h"

#include <algorithm>
#include <random>

using namespace qrm;

namespace {

const CompositionTable& tables() {
  static const CompositionTable t = load_tables(QRM_TABLES_PATH);
  return t;
}

std::map<LandmarkId, Point2> random_landmarks(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::map<LandmarkId, Point2> lm;
  for (int i = 0; i < n; ++i) lm[10 + i] = Point2(u(rng), u(rng));
  return lm;
}

// True-region measurements of every ordered triple seen from a few cameras.
std::vector<TripleMeasurement> camera_measurements(const std::map<LandmarkId, Point2>& lm, int cameras,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<TripleMeasurement> out;
  const RegionLabeling& lab = tables().labeling;
  for (int c = 0; c < cameras; ++c) {
    const Point2 cam(u(rng), u(rng));
    ObserveOptions opts;
    opts.nNearest = 5;
    for (const auto& obs : observe_world(cam, lm, opts)) out.push_back(measure_triple(obs, lab));
  }
  return out;
}

}  // namespace

TEST_CASE("nodes and edges") {
  QualMap map(tables());
  for (int id : {4, 9, 2, 7}) map.add_node(id);
  CHECK(map.nodes() == std::vector<LandmarkId>{4, 9, 2, 7});
  CHECK(map.edge_count() == 4);
  map.add_node(9);
  CHECK(map.edge_count() == 4);
  map.add_node(1);
  CHECK(map.edge_count() == 10);
  CHECK(map.open_states() == 10 * 3 * 20);
  CHECK(map.get_relation(4, 9, 2).is_universe());
  CHECK_THROWS_AS(map.get_relation(4, 9, 3), MissingEdge);
  CHECK_THROWS_AS(map.get_relation(4, 9, 9), std::invalid_argument);
}

TEST_CASE("reading a relation through its inverse") {
  QualMap map(tables());
  map.fuse({{1, 2, 3}, StateSet{1}});
  CHECK(map.get_relation(1, 2, 3) == StateSet{1});
  CHECK(map.get_relation(2, 1, 3) == StateSet{20});
  CHECK(map.get_relation(2, 3, 1) == StateSet{17});
  CHECK(map.get_relation(3, 1, 2) == StateSet{7});
  CHECK(map.get_relation(3, 2, 1) == apply_inverse(StateSet{17}));
}

TEST_CASE("worked example through propagation") {
  QualMap map(tables());
  // A = 1, B = 2, C = 3, D = 4
  map.fuse({{1, 2, 3}, StateSet{6, 7}});
  map.fuse({{1, 3, 4}, StateSet{16}});
  const StateSet z = map.get_relation(2, 3, 4);
  CHECK_FALSE(z.empty());
  CHECK(z.subset_of(StateSet{1, 5, 11, 12, 17, 18, 19, 20}));
}

TEST_CASE("contradiction rolls the map back") {
  QualMap map(tables());
  map.fuse({{1, 2, 3}, StateSet{13}});
  map.fuse({{1, 2, 4}, StateSet{2}});
  const std::string before = map.dump();
  const long open = map.open_states();
  CHECK_THROWS_AS(map.fuse({{1, 2, 3}, StateSet{14}}), Contradiction);
  CHECK(map.dump() == before);
  // contradiction on a relation that only propagation has narrowed
  const StateSet bc4 = map.get_relation(2, 3, 4);
  const StateSet impossible = StateSet::from_mask(~bc4.mask());
  REQUIRE_FALSE(impossible.empty());
  CHECK_THROWS_AS(map.fuse({{2, 3, 4}, impossible}), Contradiction);
  CHECK(map.dump() == before);
  CHECK(map.open_states() == open);
  CHECK(map.nodes().size() == 4);
}

TEST_CASE("fusing true measurements keeps the truth") {
  const auto lm = random_landmarks(8, 3);
  const RegionLabeling& lab = tables().labeling;
  QualMap map(tables());
  for (const auto& m : camera_measurements(lm, 6, 4)) {
    const size_t edges = map.edge_count();
    const long open = map.open_states();
    const FusionStats st = map.fuse(m);
    if (map.edge_count() == edges) CHECK(open - map.open_states() == st.statesRemoved);
  }
  const auto& ids = map.nodes();
  for (LandmarkId a : ids)
    for (LandmarkId b : ids)
      for (LandmarkId c : ids) {
        if (a == b || b == c || a == c) continue;
        CHECK(map.get_relation(a, b, c).contains(region_of(lm.at(a), lm.at(b), lm.at(c), lab)));
      }
}

TEST_CASE("fusion is idempotent") {
  const auto lm = random_landmarks(6, 5);
  QualMap map(tables());
  const auto ms = camera_measurements(lm, 3, 6);
  for (const auto& m : ms) map.fuse(m);
  const std::string once = map.dump();
  for (const auto& m : ms) CHECK(map.fuse(m).statesRemoved == 0);
  CHECK(map.dump() == once);
}

TEST_CASE("final map does not depend on fusion order") {
  const auto lm = random_landmarks(7, 7);
  auto ms = camera_measurements(lm, 4, 8);
  QualMap ref(tables());
  for (const auto& m : ms) ref.fuse(m);
  std::mt19937_64 rng(9);
  for (int p = 0; p < 3; ++p) {
    std::shuffle(ms.begin(), ms.end(), rng);
    QualMap map(tables());
    for (const auto& m : ms) map.fuse(m);
    CHECK(map.dump() == ref.dump());
  }
}

TEST_CASE("dump and load") {
  const auto lm = random_landmarks(6, 11);
  QualMap map(tables());
  for (const auto& m : camera_measurements(lm, 2, 12)) map.fuse(m);
  const std::string text = map.dump();
  const QualMap back = QualMap::load(text, tables());
  CHECK(back.dump() == text);
  CHECK(back.open_states() == map.open_states());
  const std::string first = text.substr(0, text.find('\n'));
  CHECK(first.rfind("10 11 12: ", 0) == 0);
  CHECK_THROWS(QualMap::load("1 2 3 4\n", tables()));
}

TEST_CASE("association gating") {
  QualMap map(tables());
  map.fuse({{1, 2, 3}, StateSet{13}});
  map.fuse({{1, 2, 4}, StateSet{2}});
  CHECK(gate_association(map, {{{1, 2, 3}, StateSet{13, 14}}}));
  CHECK_FALSE(gate_association(map, {{{1, 2, 3}, StateSet{14}}}));
  CHECK(gate_association(map, {{{1, 2, 99}, StateSet{14}}}));
  // landmark 99 observed at AB:99 = 13: only node 3 fits, node 4 is in region 2
  const auto cands = association_candidates(map, {{{1, 2, 99}, StateSet{13}}}, 99);
  CHECK(std::find(cands.begin(), cands.end(), 3) != cands.end());
  CHECK(std::find(cands.begin(), cands.end(), 4) == cands.end());
  CHECK(std::find(cands.begin(), cands.end(), 1) == cands.end());
}
