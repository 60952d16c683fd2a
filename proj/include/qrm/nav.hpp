// Relative Neighborhood Graph estimates from a qualitative map, route
// planning over them, and landmark-hopping navigation between Voronoi cells.
#pragma once

#include "qrm/qmap.hpp"

#include <map>
#include <utility>
#include <vector>

namespace qrm {

struct NoPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StuckDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// States of AB:C that put C inside the lune of A and B.
inline constexpr StateSet kLuneStates{7, 8, 13, 14};

struct RngEstimate {
  std::vector<LandmarkId> nodes;
  /// Undirected edges keyed (smaller id, larger id) with their weight.
  std::map<std::pair<LandmarkId, LandmarkId>, double> weights;

  bool has_edge(LandmarkId a, LandmarkId b) const { return weights.count(key(a, b)) != 0; }
  double weight(LandmarkId a, LandmarkId b) const { return weights.at(key(a, b)); }
  /// Sum of weights over the remaining edges.
  double total_cost() const;
  std::vector<std::pair<LandmarkId, LandmarkId>> zero_cost_edges() const;

  static std::pair<LandmarkId, LandmarkId> key(LandmarkId a, LandmarkId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }
};

/// An edge is dropped when some third landmark can only be in its lune; the
/// weight of a kept edge is the lune fraction of open states summed over all
/// third landmarks, divided by the node count.
RngEstimate estimate_rng(const QualMap& map);

struct RoutePlan {
  std::vector<LandmarkId> hops;  // from start landmark to end landmark inclusive
  std::vector<double> hopCost;   // cost of hop i -> i+1
  double total() const;
};

/// Cheapest path under edge cost 1 + lambda * w. Ties resolve to the
/// lexicographically smallest predecessor ids, so plans are deterministic.
RoutePlan plan_route(const RngEstimate& rng, LandmarkId start, LandmarkId goal, double lambda = 1.0);

struct TrajectoryPoint {
  int step;
  Point2 position;
  LandmarkId target;
};

struct NavigationResult {
  RoutePlan plan;
  std::vector<TrajectoryPoint> trajectory;
  bool arrived = false;
  double pathLength = 0.0;
};

struct NavigateOptions {
  double stepSize = 0.01;
  int maxSteps = 100000;
  double lambda = 1.0;
};

/// Landmark whose Voronoi cell contains p (closest landmark).
LandmarkId nearest_landmark(const Point2& p, const std::map<LandmarkId, Point2>& landmarks);

/// Drives straight at each landmark of the plan in turn until the robot's
/// nearest landmark (read off the range ordering) is that landmark. Ends once
/// the robot is in the goal landmark's cell; StuckDetected after maxSteps.
NavigationResult navigate(const std::map<LandmarkId, Point2>& landmarks, const RngEstimate& rng, const Point2& start,
                          const Point2& goal, const NavigateOptions& opts = {});

/// "step,x,y,currentTarget" rows.
std::string trajectory_csv(const NavigationResult& r);

}  // namespace qrm
