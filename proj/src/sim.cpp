#include "qrm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace qrm {

namespace {

// Distance from c to the six boundary loci of the directed pair a -> b.
double locus_distance(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 u = b - a, v = c - a;
  const double len = u.norm();
  const double dot = u.dot(v);
  const double d[6] = {std::abs(u.x() * v.y() - u.y() * v.x()) / len,
                       std::abs(dot) / len,
                       std::abs(dot - len * len) / len,
                       std::abs(dot - 0.5 * len * len) / len,
                       std::abs(v.norm() - len),
                       std::abs((c - b).norm() - len)};
  return *std::min_element(std::begin(d), std::end(d));
}

// Smallest locus distance over ordered triples that involve landmark `p`.
double locus_distance_with(const Point2& p, const std::vector<Point2>& others) {
  double m = std::numeric_limits<double>::infinity();
  const size_t n = others.size();
  for (size_t i = 0; i < n; ++i) {
    if ((others[i] - p).norm() == 0.0) return 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Point2& a = others[i];
      const Point2& b = others[j];
      m = std::min({m, locus_distance(a, b, p), locus_distance(a, p, b), locus_distance(p, a, b)});
    }
  }
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

double min_boundary_distance(const std::map<LandmarkId, Point2>& landmarks) {
  std::vector<Point2> pts;
  for (const auto& [id, p] : landmarks) pts.push_back(p);
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j)
      for (size_t k = 0; k < pts.size(); ++k)
        if (i != j && j != k && i != k) m = std::min(m, locus_distance(pts[i], pts[j], pts[k]));
  return m;
}

bool degenerate_viewpoint(const Point2& p, const std::map<LandmarkId, Point2>& landmarks, double clearance) {
  std::vector<Point2> dirs;
  std::vector<double> dists;
  for (const auto& [id, q] : landmarks) {
    const Point2 d = q - p;
    const double n = d.norm();
    if (n < clearance) return true;
    dirs.push_back(d / n);
    dists.push_back(n);
  }
  for (size_t i = 0; i < dirs.size(); ++i)
    for (size_t j = i + 1; j < dirs.size(); ++j) {
      if (std::abs(dirs[i].x() * dirs[j].y() - dirs[i].y() * dirs[j].x()) < 1e-6) return true;
      if (std::abs(dists[i] - dists[j]) < 1e-9 * clearance) return true;
    }
  return false;
}

World gen_world(const WorldConfig& cfg, std::uint64_t seed) {
  if (cfg.landmarks < 3 || cfg.images < 1 || !(cfg.side > 0.0)) throw std::invalid_argument("bad world config");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, cfg.side);
  World w;
  w.side = cfg.side;
  std::vector<Point2> placed;
  const double tol = cfg.boundaryTolerance * cfg.side;
  for (int id = 0; id < cfg.landmarks; ++id) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw std::runtime_error("cannot place landmark without near-degenerate triples");
      const Point2 p(coord(rng), coord(rng));
      if (locus_distance_with(p, placed) < tol) continue;
      placed.push_back(p);
      w.landmarks.emplace(id, p);
      break;
    }
  }
  const double clearance = cfg.imageClearance * cfg.side;
  while (static_cast<int>(w.images.size()) < cfg.images) {
    const Point2 p(coord(rng), coord(rng));
    if (!degenerate_viewpoint(p, w.landmarks, clearance)) w.images.push_back(p);
  }
  return w;
}

std::string world_to_string(const World& w) {
  std::ostringstream out;
  out << "# side " << fmt("%.17g", w.side) << "\n";
  for (const auto& [id, p] : w.landmarks) out << "L " << id << ' ' << fmt("%.17g", p.x()) << ' ' << fmt("%.17g", p.y()) << "\n";
  for (const auto& p : w.images) out << "W " << fmt("%.17g", p.x()) << ' ' << fmt("%.17g", p.y()) << "\n";
  return out.str();
}

World world_from_string(const std::string& text) {
  World w;
  std::istringstream in(text);
  bool haveSide = false;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "#") {
      std::string key;
      if (ls >> key && key == "side" && ls >> w.side) haveSide = true;
    } else if (tag == "L") {
      LandmarkId id;
      double x, y;
      if (!(ls >> id >> x >> y)) throw std::invalid_argument("bad landmark line: " + line);
      if (!w.landmarks.emplace(id, Point2(x, y)).second) throw std::invalid_argument("duplicate landmark id in: " + line);
    } else if (tag == "W") {
      double x, y;
      if (!(ls >> x >> y)) throw std::invalid_argument("bad imaging line: " + line);
      w.images.emplace_back(x, y);
    } else {
      throw std::invalid_argument("unknown world line: " + line);
    }
  }
  if (!haveSide) {
    double hi = 0.0;
    for (const auto& [id, p] : w.landmarks) hi = std::max({hi, p.x(), p.y()});
    for (const auto& p : w.images) hi = std::max({hi, p.x(), p.y()});
    w.side = hi > 0.0 ? hi : 1.0;
  }
  return w;
}

void save_world(const World& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << world_to_string(w);
}

World load_world(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return world_from_string(ss.str());
}

SimResult run_sim(const World& world, const CompositionTable& tables, const SimOptions& opts) {
  const RegionLabeling& lab = tables.labeling;
  RegionAdjacency computed{};
  if (!opts.adjacency) computed = region_adjacency(lab);
  const RegionAdjacency& adj = opts.adjacency ? *opts.adjacency : computed;

  SimResult res{{}, QualMap(tables), 0, 0};
  QualMap& map = res.map;
  struct Raw {
    long removed = 0, constrained = 0;
    double nonadj = 0.0, rng = 0.0, ms = 0.0;
  };
  std::vector<Raw> raw(1);

  for (const Point2& cam : world.images) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& obs : observe_world(cam, world.landmarks, opts.observe)) {
      const auto& [a, b, c] = obs.ids;
      const StateSet candidates =
          map.has_node(a) && map.has_node(b) && map.has_node(c) ? map.get_relation(a, b, c) : StateSet::universe();
      map.fuse(measure_triple(obs, lab, opts.measurement, candidates));
      ++res.measurements;
    }
    Raw r;
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::vector<LandmarkId> ids = map.nodes();
    std::sort(ids.begin(), ids.end());
    long open = 0, far = 0;
    for (size_t i = 0; i < ids.size(); ++i)
      for (size_t j = i + 1; j < ids.size(); ++j)
        for (size_t k = j + 1; k < ids.size(); ++k) {
          const Triple rel[3] = {{ids[i], ids[j], ids[k]}, {ids[j], ids[k], ids[i]}, {ids[k], ids[i], ids[j]}};
          int singles = 0;
          for (const auto& t : rel) {
            const StateSet s = map.get_relation(t[0], t[1], t[2]);
            const RegionId truth =
                region_of(world.landmarks.at(t[0]), world.landmarks.at(t[1]), world.landmarks.at(t[2]), lab);
            if (opts.checkTruth && !s.contains(truth)) ++res.truthViolations;
            r.removed += kRegionCount - s.size();
            singles += s.is_singleton();
            open += s.size();
            s.for_each([&](int x) {
              if (x != truth.value() && !adj[static_cast<size_t>(truth.value())].contains(x)) ++far;
            });
          }
          r.constrained += singles == 3;
        }
    r.nonadj = open > 0 ? 100.0 * static_cast<double>(far) / static_cast<double>(open) : 0.0;
    r.rng = map.nodes().size() >= 2 ? estimate_rng(map).total_cost() : 0.0;
    raw.push_back(r);
  }

  const double nf = static_cast<double>(map.nodes().size());
  const double edges = nf * (nf - 1) * (nf - 2) / 6.0;
  for (size_t step = 0; step < raw.size(); ++step) {
    MetricsRow row;
    row.step = static_cast<int>(step);
    if (edges > 0) {
      row.removedPct = 100.0 * static_cast<double>(raw[step].removed) / (edges * 3.0 * (kRegionCount - 1));
      row.constrainedPct = 100.0 * static_cast<double>(raw[step].constrained) / edges;
    }
    row.nonAdjacentOpenPct = raw[step].nonadj;
    row.rngCost = raw[step].rng;
    row.updateMillis = opts.timing ? raw[step].ms : 0.0;
    res.rows.push_back(row);
  }
  return res;
}

QualMap converged_map(const std::map<LandmarkId, Point2>& landmarks, const CompositionTable& tables) {
  QualMap map(tables);
  std::vector<LandmarkId> ids;
  for (const auto& [id, p] : landmarks) ids.push_back(id);
  const size_t n = ids.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      for (size_t k = j + 1; k < n; ++k) {
        const Triple rel[3] = {{ids[i], ids[j], ids[k]}, {ids[j], ids[k], ids[i]}, {ids[k], ids[i], ids[j]}};
        for (const auto& t : rel) {
          const RegionId truth = region_of(landmarks.at(t[0]), landmarks.at(t[1]), landmarks.at(t[2]), tables.labeling);
          map.fuse({t, StateSet(truth)});
        }
      }
  return map;
}

CampaignResult run_mc(const CampaignConfig& cfg, const CompositionTable& tables) {
  struct Task {
    int run, n;
  };
  std::vector<Task> tasks;
  for (int r = 0; r < cfg.runs; ++r)
    for (int n : cfg.nNearest) tasks.push_back({r, n});
  std::vector<SimResult> results;
  results.reserve(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) results.push_back({{}, QualMap(tables), 0, 0});

  const RegionAdjacency adj = region_adjacency(tables.labeling);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const World w = gen_world(cfg.world, cfg.seed + static_cast<std::uint64_t>(tasks[i].run));
      SimOptions opts;
      opts.observe.nNearest = tasks[i].n;
      opts.observe.measureCyclic = cfg.measureCyclic;
      opts.measurement.solver.maxDepth = cfg.solverDepth;
      opts.timing = cfg.timing;
      opts.adjacency = &adj;
      results[i] = run_sim(w, tables, opts);
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CampaignResult out;
  for (size_t i = 0; i < tasks.size(); ++i) {
    out.truthViolations += results[i].truthViolations;
    for (const auto& row : results[i].rows) out.rows.push_back({tasks[i].n, tasks[i].run, row});
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const CampaignRow& a, const CampaignRow& b) {
    return std::tie(a.n, a.run, a.m.step) < std::tie(b.n, b.run, b.m.step);
  });
  return out;
}

std::string metrics_csv(const std::vector<CampaignRow>& rows) {
  std::ostringstream out;
  out << "step,n,run,removed_pct,constrained_pct,nonadj_pct,rng_cost,update_ms\n";
  for (const auto& r : rows)
    out << r.m.step << ',' << r.n << ',' << r.run << ',' << fmt("%.6f", r.m.removedPct) << ','
        << fmt("%.6f", r.m.constrainedPct) << ',' << fmt("%.6f", r.m.nonAdjacentOpenPct) << ','
        << fmt("%.6f", r.m.rngCost) << ',' << fmt("%.3f", r.m.updateMillis) << "\n";
  return out.str();
}

std::string aggregate_csv(const std::vector<CampaignRow>& rows) {
  std::map<std::pair<int, int>, std::vector<MetricsRow>> groups;  // (n, step)
  for (const auto& r : rows) groups[{r.n, r.m.step}].push_back(r.m);
  std::ostringstream out;
  out << "step,n,runs";
  for (const char* c : {"removed_pct", "constrained_pct", "nonadj_pct", "rng_cost", "update_ms"})
    out << ',' << c << "_mean," << c << "_std";
  out << "\n";
  for (const auto& [key, ms] : groups) {
    out << key.second << ',' << key.first << ',' << ms.size();
    auto stat = [&](double MetricsRow::*field) {
      double mean = 0.0;
      for (const auto& m : ms) mean += m.*field;
      mean /= static_cast<double>(ms.size());
      double var = 0.0;
      for (const auto& m : ms) var += (m.*field - mean) * (m.*field - mean);
      const double sd = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
      out << ',' << fmt("%.6f", mean) << ',' << fmt("%.6f", sd);
    };
    stat(&MetricsRow::removedPct);
    stat(&MetricsRow::constrainedPct);
    stat(&MetricsRow::nonAdjacentOpenPct);
    stat(&MetricsRow::rngCost);
    stat(&MetricsRow::updateMillis);
    out << "\n";
  }
  return out.str();
}

}  // namespace qrm
