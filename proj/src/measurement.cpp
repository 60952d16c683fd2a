#include "qrm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qrm {

namespace {

using Aff2 = Affine<double, 2>;

constexpr double kBearingEps = 1e-9;

struct CameraFrame {
  Aff2 ax, ay, bx, by, cx, cy;
};

CameraFrame frame(double theta, double phi) {
  const Aff2 l = Aff2::variable(0), r = Aff2::variable(1);
  return {Aff2::constant(1.0), Aff2::constant(0.0), std::cos(theta) * r, std::sin(theta) * r,
          std::cos(phi) * l,   std::sin(phi) * l};
}

}  // namespace

std::vector<QuadConstraint<double, 2>> measurement_region_constraints(double theta, double phi, RegionId region,
                                                                      const RegionLabeling& labeling) {
  const CameraFrame f = frame(theta, phi);
  const auto exprs = boundary_expressions(f.ax, f.ay, f.bx, f.by, f.cx, f.cy);
  const SignVector s = labeling.signs(region);
  const std::uint8_t def = labeling.defining_predicates(region);
  std::vector<QuadConstraint<double, 2>> out;
  for (int i = 0; i < kPredicateCount; ++i) {
    if (!((def >> i) & 1u)) continue;
    const Quadratic<double, 2> e(exprs[static_cast<size_t>(i)]);
    out.emplace_back(s.is_negative(i) ? e : -e);
  }
  return out;
}

std::vector<QuadConstraint<double, 2>> ordering_constraints(const TripleObservation& obs) {
  const Aff2 one = Aff2::constant(1.0), l = Aff2::variable(0), r = Aff2::variable(1);
  // Distances to A, B, C are 1, r, l.
  const Aff2 dist[3] = {one, r, l};
  std::vector<QuadConstraint<double, 2>> out;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const int ri = obs.rank[static_cast<size_t>(i)], rj = obs.rank[static_cast<size_t>(j)];
      if (ri == rj) throw DegenerateObservation("range ordering has a tie");
      out.emplace_back(Quadratic<double, 2>(ri < rj ? dist[i] - dist[j] : dist[j] - dist[i]));
    }
  return out;
}

std::array<double, kPredicateCount> measurement_expressions(double theta, double phi, double l, double r) {
  return boundary_expressions(1.0, 0.0, r * std::cos(theta), r * std::sin(theta), l * std::cos(phi),
                              l * std::sin(phi));
}

TripleMeasurement measure_triple(const TripleObservation& obs, const RegionLabeling& labeling,
                                 const MeasurementConfig& cfg, StateSet candidates) {
  if (std::abs(std::sin(obs.theta)) < kBearingEps || std::abs(std::sin(obs.phi)) < kBearingEps ||
      std::abs(std::sin(obs.theta - obs.phi)) < kBearingEps)
    throw DegenerateObservation("two landmarks are collinear with the camera");
  auto rank = obs.rank;
  std::sort(rank.begin(), rank.end());
  if (rank != std::array<int, 3>{0, 1, 2}) throw DegenerateObservation("range ordering is not a strict total order");

  // The expressions are homogeneous quadratics in the three ranges, so the
  // farthest range is fixed to 1 and the other two live in the unit square.
  std::array<Aff2, 3> range;
  for (int i = 0, var = 0; i < 3; ++i)
    range[static_cast<size_t>(i)] = obs.rank[static_cast<size_t>(i)] == 2 ? Aff2::constant(1.0) : Aff2::variable(var++);
  std::vector<QuadConstraint<double, 2>> order;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const bool iNearer = obs.rank[static_cast<size_t>(i)] < obs.rank[static_cast<size_t>(j)];
      const Aff2& ri = range[static_cast<size_t>(i)];
      const Aff2& rj = range[static_cast<size_t>(j)];
      order.emplace_back(Quadratic<double, 2>(iNearer ? ri - rj : rj - ri));
    }
  const auto exprs = boundary_expressions(range[0], Aff2::constant(0.0), std::cos(obs.theta) * range[1],
                                          std::sin(obs.theta) * range[1], std::cos(obs.phi) * range[2],
                                          std::sin(obs.phi) * range[2]);

  const Rect<double, 2> box{VectorN<double, 2>::Zero(), VectorN<double, 2>::Ones(), 0};
  TripleMeasurement m{obs.ids, {}};
  candidates.for_each([&](int region) {
    const SignVector sv = labeling.signs(RegionId(region));
    const std::uint8_t def = labeling.defining_predicates(RegionId(region));
    std::vector<QuadConstraint<double, 2>> cons = order;
    for (int i = 0; i < kPredicateCount; ++i) {
      if (!((def >> i) & 1u)) continue;
      const Quadratic<double, 2> e(exprs[static_cast<size_t>(i)]);
      cons.emplace_back(sv.is_negative(i) ? e : -e);
    }
    if (solve<double, 2>(cons, box, cfg.solver).status != FeasibilityStatus::Infeasible) m.states.insert(RegionId(region));
  });
  return m;
}

TripleObservation observe_triple(const Point2& camera, const Triple& ids, const std::map<LandmarkId, Point2>& landmarks) {
  const Point2 a = landmarks.at(ids[0]) - camera;
  const Point2 b = landmarks.at(ids[1]) - camera;
  const Point2 c = landmarks.at(ids[2]) - camera;
  auto bearing = [&](const Point2& p) {
    double t = std::atan2(p.y(), p.x()) - std::atan2(a.y(), a.x());
    if (t <= -std::numbers::pi) t += 2.0 * std::numbers::pi;
    if (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
    return t;
  };
  TripleObservation obs;
  obs.ids = ids;
  obs.theta = bearing(b);
  obs.phi = bearing(c);
  const double d[3] = {a.norm(), b.norm(), c.norm()};
  if (d[0] == d[1] || d[1] == d[2] || d[0] == d[2]) throw DegenerateObservation("equal ranges");
  for (int i = 0; i < 3; ++i) {
    int k = 0;
    for (int j = 0; j < 3; ++j) k += d[j] < d[i];
    obs.rank[static_cast<size_t>(i)] = k;
  }
  return obs;
}

std::vector<LandmarkId> visible_landmarks(const Point2& camera, const std::map<LandmarkId, Point2>& landmarks,
                                          const ObserveOptions& opts) {
  std::vector<std::pair<double, LandmarkId>> byDist;
  for (const auto& [id, p] : landmarks) {
    const double d = (p - camera).norm();
    if (opts.maxRange && d > *opts.maxRange) continue;
    byDist.emplace_back(d, id);
  }
  std::sort(byDist.begin(), byDist.end());
  if (opts.nNearest > 0 && static_cast<int>(byDist.size()) > opts.nNearest) {
    if (byDist[static_cast<size_t>(opts.nNearest)].first == byDist[static_cast<size_t>(opts.nNearest - 1)].first)
      throw DegenerateObservation("visibility cut falls between equidistant landmarks");
    byDist.resize(static_cast<size_t>(opts.nNearest));
  }
  std::vector<LandmarkId> ids;
  for (const auto& e : byDist) ids.push_back(e.second);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TripleObservation> observe_world(const Point2& camera, const std::map<LandmarkId, Point2>& landmarks,
                                             const ObserveOptions& opts) {
  const auto ids = visible_landmarks(camera, landmarks, opts);
  if (ids.size() < 3) throw TooFewLandmarks("fewer than three landmarks visible");
  std::vector<TripleObservation> out;
  const size_t n = ids.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      for (size_t k = j + 1; k < n; ++k) {
        const LandmarkId a = ids[i], b = ids[j], c = ids[k];
        out.push_back(observe_triple(camera, {a, b, c}, landmarks));
        if (opts.measureCyclic) {
          out.push_back(observe_triple(camera, {b, c, a}, landmarks));
          out.push_back(observe_triple(camera, {c, a, b}, landmarks));
        }
      }
  return out;
}

}  // namespace qrm
