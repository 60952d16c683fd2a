#include "qrm/measurement.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace qrm;

namespace {

const RegionLabeling& labeling() {
  static const RegionLabeling lab = derive_region_labels().labeling;
  return lab;
}

// Boundary expressions written out in (l, r) for A = (1, 0),
// B = r (cos theta, sin theta), C = l (cos phi, sin phi). The last two are
// stated with "< 0" meaning |AC| < |AB| and |BC| < |AB|.
struct ExpandedExpressions {
  double right, frontA, frontB, closerB, acShort, bcShort;
};

ExpandedExpressions expanded(double th, double ph, double l, double r) {
  const double cd = std::sin(ph) * std::sin(th) + std::cos(ph) * std::cos(th);
  return {(std::sin(ph) * std::cos(th) - std::cos(ph) * std::sin(th)) * l * r - std::sin(ph) * l + std::sin(th) * r,
          -cd * l * r + std::cos(ph) * l + std::cos(th) * r - 1,
          r * r - cd * l * r + std::cos(ph) * l - std::cos(th) * r,
          r * r - 2 * cd * l * r + 2 * std::cos(ph) * l - 1,
          l * l - r * r - 2 * std::cos(ph) * l + 2 * std::cos(th) * r,
          l * l - 2 * cd * l * r + 2 * std::cos(th) * r - 1};
}

}  // namespace

TEST_CASE("measurement expressions match the expanded forms") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), rng_(0.05, 5);
  for (int i = 0; i < 2000; ++i) {
    const double th = ang(rng), ph = ang(rng), l = rng_(rng), r = rng_(rng);
    const auto e = measurement_expressions(th, ph, l, r);
    const auto x = expanded(th, ph, l, r);
    CHECK(e[0] == doctest::Approx(x.right));
    CHECK(e[1] == doctest::Approx(x.frontA));
    CHECK(e[2] == doctest::Approx(x.frontB));
    CHECK(e[3] == doctest::Approx(x.closerB));
    CHECK(e[4] == doctest::Approx(-x.acShort));
    CHECK(e[5] == doctest::Approx(-x.bcShort));
  }
}

TEST_CASE("region 7 from its three measurement inequalities") {
  // right > 0, closerB < 0, acShort < 0
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), rng_(0.05, 5);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const double th = ang(rng), ph = ang(rng), l = rng_(rng), r = rng_(rng);
    const Point2 a(1, 0), b(r * std::cos(th), r * std::sin(th)), c(l * std::cos(ph), l * std::sin(ph));
    RegionId region(1);
    try {
      region = region_of(a, b, c, labeling());
    } catch (const DegenerateTriple&) {
      continue;
    }
    const auto x = expanded(th, ph, l, r);
    const bool listed = x.right > 0 && x.closerB < 0 && x.acShort < 0;
    CHECK(listed == (region == RegionId(7)));
    hits += listed;
  }
  CHECK(hits > 50);
}

TEST_CASE("ordering constraints") {
  TripleObservation obs;
  obs.rank = {1, 0, 2};  // B closest, then A, then C: r < 1 < l
  const auto cons = ordering_constraints(obs);
  REQUIRE(cons.size() == 3);
  for (const auto& c : cons) CHECK(c.satisfied(Eigen::Vector2d(1.5, 0.5)));
  bool violated = false;
  for (const auto& c : cons) violated |= !c.satisfied(Eigen::Vector2d(0.9, 0.5));
  CHECK(violated);
  obs.rank = {0, 0, 1};
  CHECK_THROWS_AS(ordering_constraints(obs), DegenerateObservation);
}

TEST_CASE("observe a triple") {
  const std::map<LandmarkId, Point2> lm{{1, {2, 0}}, {2, {0, 1}}, {3, {-3, -0.5}}};
  const TripleObservation obs = observe_triple(Point2(0, 0), {1, 2, 3}, lm);
  CHECK(obs.theta == doctest::Approx(M_PI / 2));
  CHECK(obs.phi == doctest::Approx(std::atan2(-0.5, -3.0)));
  CHECK(obs.rank == std::array<int, 3>{1, 0, 2});
  const std::map<LandmarkId, Point2> tie{{1, {1, 0}}, {2, {0, 1}}, {3, {-3, -0.5}}};
  CHECK_THROWS_AS(observe_triple(Point2(0, 0), {1, 2, 3}, tie), DegenerateObservation);
}

TEST_CASE("measurements contain the true region") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  int done = 0;
  while (done < 300) {
    const Point2 cam(u(rng), u(rng));
    const std::map<LandmarkId, Point2> lm{{0, {u(rng), u(rng)}}, {1, {u(rng), u(rng)}}, {2, {u(rng), u(rng)}}};
    try {
      const RegionId truth = region_of(lm.at(0), lm.at(1), lm.at(2), labeling());
      const TripleObservation obs = observe_triple(cam, {0, 1, 2}, lm);
      const TripleMeasurement m = measure_triple(obs, labeling());
      CHECK(m.states.contains(truth));
      CHECK(m.ids == Triple{0, 1, 2});
      ++done;
    } catch (const DegenerateTriple&) {
    } catch (const DegenerateObservation&) {
    }
  }
}

TEST_CASE("thin feasible sliver with A farthest") {
  // C just left of AB, ranges within 1e-3 of each other
  const std::map<LandmarkId, Point2> lm{{0, {0.93679189575455935, 0.90965954013027861}},
                                        {1, {0.78956272135897843, 0.97588847826056424}},
                                        {2, {0.91939683246035342, 0.91905990919430725}}};
  const Point2 cam(0.60308334553538923, 0.36966086820673222);
  const TripleObservation obs = observe_triple(cam, {0, 1, 2}, lm);
  CHECK(obs.rank == std::array<int, 3>{2, 1, 0});
  const RegionId truth = region_of(lm.at(0), lm.at(1), lm.at(2), labeling());
  CHECK(truth == RegionId(14));
  CHECK(measure_triple(obs, labeling()).states.contains(truth));
}

TEST_CASE("measured states cover every sampled configuration") {
  // For a fixed observation, every range pair respecting the ordering lands in
  // a measured state.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), logr(-3, 3);
  for (int t = 0; t < 20; ++t) {
    TripleObservation obs;
    obs.theta = ang(rng);
    obs.phi = ang(rng);
    obs.rank = {static_cast<int>(t % 3), static_cast<int>((t + 1) % 3), static_cast<int>((t + 2) % 3)};
    TripleMeasurement m;
    try {
      m = measure_triple(obs, labeling());
    } catch (const DegenerateObservation&) {
      continue;
    }
    CHECK_FALSE(m.states.empty());
    int sampled = 0;
    for (int i = 0; i < 20000 && sampled < 500; ++i) {
      const double l = std::exp(logr(rng)), r = std::exp(logr(rng));
      const double d[3] = {1.0, r, l};
      bool ok = true;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (obs.rank[a] < obs.rank[b] && !(d[a] < d[b])) ok = false;
      if (!ok) continue;
      const Point2 A(1, 0), B(r * std::cos(obs.theta), r * std::sin(obs.theta)),
          C(l * std::cos(obs.phi), l * std::sin(obs.phi));
      try {
        CHECK(m.states.contains(region_of(A, B, C, labeling())));
        ++sampled;
      } catch (const DegenerateTriple&) {
      }
    }
  }
}

TEST_CASE("candidate restriction") {
  const std::map<LandmarkId, Point2> lm{{1, {0.2, 0.3}}, {2, {0.7, 0.4}}, {3, {0.5, 0.9}}};
  const TripleObservation obs = observe_triple(Point2(0.1, 0.05), {1, 2, 3}, lm);
  const StateSet full = measure_triple(obs, labeling()).states;
  const StateSet part = measure_triple(obs, labeling(), {}, StateSet{full.first().value(), 20}).states;
  CHECK(part == (full & StateSet{full.first().value(), 20}));
}

TEST_CASE("degenerate observations are rejected") {
  TripleObservation obs;
  obs.theta = 0.0;
  obs.phi = 1.0;
  CHECK_THROWS_AS(measure_triple(obs, labeling()), DegenerateObservation);
  obs.theta = 1.0;
  obs.phi = 1.0;
  CHECK_THROWS_AS(measure_triple(obs, labeling()), DegenerateObservation);
  obs.phi = 2.0;
  obs.rank = {0, 2, 2};
  CHECK_THROWS_AS(measure_triple(obs, labeling()), DegenerateObservation);
}

TEST_CASE("observe world") {
  std::map<LandmarkId, Point2> lm;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 7; ++i) lm[i] = Point2(u(rng), u(rng));
  const Point2 cam(0.5, 0.5);
  ObserveOptions opts;
  CHECK(observe_world(cam, lm, opts).size() == 35 * 3);
  opts.measureCyclic = false;
  CHECK(observe_world(cam, lm, opts).size() == 35);
  opts.nNearest = 4;
  const auto vis = visible_landmarks(cam, lm, opts);
  CHECK(vis.size() == 4);
  CHECK(std::is_sorted(vis.begin(), vis.end()));
  CHECK(observe_world(cam, lm, opts).size() == 4);
  opts.nNearest = 0;
  opts.maxRange = 1e-6;
  CHECK_THROWS_AS(observe_world(cam, lm, opts), TooFewLandmarks);
}
