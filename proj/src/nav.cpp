#include "qrm/nav.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

namespace qrm {

double RngEstimate::total_cost() const {
  double sum = 0.0;
  for (const auto& [edge, w] : weights) sum += w;
  return sum;
}

std::vector<std::pair<LandmarkId, LandmarkId>> RngEstimate::zero_cost_edges() const {
  std::vector<std::pair<LandmarkId, LandmarkId>> out;
  for (const auto& [edge, w] : weights)
    if (w == 0.0) out.push_back(edge);
  return out;
}

RngEstimate estimate_rng(const QualMap& map) {
  RngEstimate est;
  est.nodes = map.nodes();
  std::sort(est.nodes.begin(), est.nodes.end());
  const size_t n = est.nodes.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const LandmarkId a = est.nodes[i], b = est.nodes[j];
      double w = 0.0;
      bool removed = false;
      for (LandmarkId c : est.nodes) {
        if (c == a || c == b) continue;
        const StateSet open = map.get_relation(a, b, c);
        const int conflicts = (open & kLuneStates).size();
        if (conflicts == open.size()) {
          removed = true;
          break;
        }
        w += static_cast<double>(conflicts) / open.size();
      }
      if (!removed) est.weights[{a, b}] = w / static_cast<double>(n);
    }
  return est;
}

double RoutePlan::total() const {
  double s = 0.0;
  for (double c : hopCost) s += c;
  return s;
}

RoutePlan plan_route(const RngEstimate& rng, LandmarkId start, LandmarkId goal, double lambda) {
  auto known = [&](LandmarkId id) { return std::binary_search(rng.nodes.begin(), rng.nodes.end(), id); };
  if (!known(start) || !known(goal)) throw NoPath("route endpoint is not a map node");

  std::map<LandmarkId, std::vector<std::pair<LandmarkId, double>>> adj;
  for (const auto& [e, w] : rng.weights) {
    adj[e.first].push_back({e.second, 1.0 + lambda * w});
    adj[e.second].push_back({e.first, 1.0 + lambda * w});
  }
  std::map<LandmarkId, double> dist;
  std::map<LandmarkId, LandmarkId> prev;
  using Item = std::pair<double, LandmarkId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[start] = 0.0;
  pq.push({0.0, start});
  std::set<LandmarkId> done;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (!done.insert(u).second) continue;
    if (u == goal) break;
    for (const auto& [v, c] : adj[u]) {
      const double nd = d + c;
      const auto it = dist.find(v);
      if (it == dist.end() || nd < it->second || (nd == it->second && u < prev[v])) {
        dist[v] = nd;
        prev[v] = u;
        pq.push({nd, v});
      }
    }
  }
  if (!done.count(goal)) throw NoPath("no RNG path between landmarks " + std::to_string(start) + " and " +
                                      std::to_string(goal));
  RoutePlan plan;
  for (LandmarkId v = goal;; v = prev.at(v)) {
    plan.hops.push_back(v);
    if (v == start) break;
  }
  std::reverse(plan.hops.begin(), plan.hops.end());
  for (size_t i = 0; i + 1 < plan.hops.size(); ++i)
    plan.hopCost.push_back(1.0 + lambda * rng.weight(plan.hops[i], plan.hops[i + 1]));
  return plan;
}

LandmarkId nearest_landmark(const Point2& p, const std::map<LandmarkId, Point2>& landmarks) {
  if (landmarks.empty()) throw std::invalid_argument("no landmarks");
  LandmarkId best = landmarks.begin()->first;
  double bestDist = std::numeric_limits<double>::infinity();
  for (const auto& [id, q] : landmarks) {
    const double d = (q - p).squaredNorm();
    if (d < bestDist) {
      bestDist = d;
      best = id;
    }
  }
  return best;
}

NavigationResult navigate(const std::map<LandmarkId, Point2>& landmarks, const RngEstimate& rng, const Point2& start,
                          const Point2& goal, const NavigateOptions& opts) {
  NavigationResult res;
  const LandmarkId ps = nearest_landmark(start, landmarks);
  const LandmarkId pe = nearest_landmark(goal, landmarks);
  res.plan = plan_route(rng, ps, pe, opts.lambda);

  Point2 pos = start;
  int step = 0;
  res.trajectory.push_back({step, pos, ps});
  for (size_t h = 1; h < res.plan.hops.size(); ++h) {
    const LandmarkId target = res.plan.hops[h];
    const Point2 goalPos = landmarks.at(target);
    while (nearest_landmark(pos, landmarks) != target) {
      if (step >= opts.maxSteps) {
        throw StuckDetected("did not reach the cell of landmark " + std::to_string(target) + " within " +
                            std::to_string(opts.maxSteps) + " steps");
      }
      const Point2 delta = goalPos - pos;
      const double len = delta.norm();
      const Point2 next = len <= opts.stepSize ? goalPos : Point2(pos + delta * (opts.stepSize / len));
      res.pathLength += (next - pos).norm();
      pos = next;
      res.trajectory.push_back({++step, pos, target});
    }
  }
  res.arrived = nearest_landmark(pos, landmarks) == pe;
  return res;
}

std::string trajectory_csv(const NavigationResult& r) {
  std::ostringstream out;
  out << "step,x,y,currentTarget\n";
  char buf[96];
  for (const auto& p : r.trajectory) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%d\n", p.step, p.position.x(), p.position.y(), p.target);
    out << buf;
  }
  return out.str();
}

}  // namespace qrm
