// qrm: table generation, world generation, mapping runs, Monte Carlo
// campaigns, RNG extraction and navigation.
#include "qrm/sim.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace qrm;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string rng_text(const RngEstimate& rng) {
  std::ostringstream out;
  out << "# a b weight\n";
  char buf[64];
  for (const auto& [e, w] : rng.weights) {
    std::snprintf(buf, sizeof buf, "%.9g", w);
    out << e.first << ' ' << e.second << ' ' << buf << "\n";
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qualitative relational mapping with the Extended Double Cross calculus"};
  app.require_subcommand(1);

  std::string tablesPath = QRM_DEFAULT_TABLES;
  std::string out;
  std::uint64_t seed = 1;
  int landmarks = 30;
  int images = 50;
  double side = 1.0;
  double boundaryTol = WorldConfig{}.boundaryTolerance;
  int depth = 30;
  bool measureCyclic = true;
  double maxRange = 0.0;
  bool timing = true;

  auto* genTables = app.add_subcommand("gen-tables", "Solve the composition feasibility problems and write the table");
  int tableDepth = 60;
  double bound = 1000.0;
  double retryMargin = 1e-2;
  genTables->add_option("--depth", tableDepth, "Maximum rectangle depth")->capture_default_str();
  genTables->add_option("--bound", bound, "Half-width of the search box")->capture_default_str();
  genTables->add_option("--retry-margin", retryMargin, "Clearance for problems that exhaust the budget")
      ->capture_default_str();
  genTables->add_option("--out", out, "Output table file")->required();

  auto* genWorld = app.add_subcommand("gen-world", "Generate a random world file");
  genWorld->add_option("--seed", seed)->capture_default_str();
  genWorld->add_option("--landmarks", landmarks)->capture_default_str();
  genWorld->add_option("--images", images)->capture_default_str();
  genWorld->add_option("--side", side)->capture_default_str();
  genWorld->add_option("--boundary-tol", boundaryTol, "Landmark clearance from boundary loci, as a fraction of the side")
      ->capture_default_str();
  genWorld->add_option("--out", out, "Output world file (default stdout)");

  auto add_sim_flags = [&](CLI::App* sub) {
    sub->add_option("--tables", tablesPath, "Operator table file")->capture_default_str();
    sub->add_option("--depth", depth, "Measurement solver depth")->capture_default_str();
    sub->add_flag("--measure-cyclic,!--no-measure-cyclic", measureCyclic,
                  "Measure all three cyclic relations of each triple")
        ->capture_default_str();
    sub->add_option("--max-range", maxRange, "Hard sensor range (0: unlimited)");
    sub->add_flag("--timing,!--no-timing", timing, "Record update wall times (off: zeros, byte-reproducible)")
        ->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Map one world and write per-image metrics");
  std::string worldPath, mapOut;
  int nNearest = 0;
  simulate->add_option("--world", worldPath, "World file (otherwise generated from --seed)");
  simulate->add_option("--seed", seed)->capture_default_str();
  simulate->add_option("--landmarks", landmarks)->capture_default_str();
  simulate->add_option("--images", images)->capture_default_str();
  simulate->add_option("--boundary-tol", boundaryTol, "Landmark clearance from boundary loci (generated worlds)")
      ->capture_default_str();
  simulate->add_option("--n-nearest", nNearest, "Landmarks visible per image (0: all)")->capture_default_str();
  simulate->add_option("--out", out, "Metrics CSV (default stdout)");
  simulate->add_option("--map-out", mapOut, "Write the final map dump here");
  add_sim_flags(simulate);

  auto* mc = app.add_subcommand("mc", "Monte Carlo campaign over several visibility limits");
  int runs = 10;
  std::vector<int> nList{5, 8, 15};
  int jobs = 1;
  std::string aggOut;
  mc->add_option("--runs", runs)->capture_default_str();
  mc->add_option("--seed", seed)->capture_default_str();
  mc->add_option("--landmarks", landmarks)->capture_default_str();
  mc->add_option("--images", images)->capture_default_str();
  mc->add_option("--boundary-tol", boundaryTol, "Landmark clearance from boundary loci (generated worlds)")
      ->capture_default_str();
  mc->add_option("--n-nearest", nList, "Visibility limits")->delimiter(',')->capture_default_str();
  mc->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  mc->add_option("--out", out, "Per-run metrics CSV")->required();
  mc->add_option("--aggregate-out", aggOut, "Mean/std CSV (default: <out> with _agg suffix)");
  add_sim_flags(mc);

  auto* rngCmd = app.add_subcommand("rng", "Extract the weighted RNG estimate from a map dump or a world");
  std::string mapPath;
  rngCmd->add_option("--map", mapPath, "Map dump file");
  rngCmd->add_option("--world", worldPath, "World file; its converged map is used");
  rngCmd->add_option("--tables", tablesPath)->capture_default_str();
  rngCmd->add_option("--out", out, "Edge list output (default stdout)");

  auto* navCmd = app.add_subcommand("navigate", "Drive between two points by landmark hopping");
  std::vector<double> startXY, goalXY;
  double step = 0.005;
  double lambda = 1.0;
  int maxSteps = 200000;
  navCmd->add_option("--world", worldPath, "World file")->required();
  navCmd->add_option("--map", mapPath, "Map dump (default: converged map of the world)");
  navCmd->add_option("--tables", tablesPath)->capture_default_str();
  navCmd->add_option("--start", startXY, "Start x y")->expected(2);
  navCmd->add_option("--goal", goalXY, "Goal x y")->expected(2);
  navCmd->add_option("--seed", seed, "Draws start and goal when not given")->capture_default_str();
  navCmd->add_option("--step", step)->capture_default_str();
  navCmd->add_option("--lambda", lambda)->capture_default_str();
  navCmd->add_option("--max-steps", maxSteps)->capture_default_str();
  navCmd->add_option("--out", out, "Trajectory CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*genTables) {
      const auto t0 = std::chrono::steady_clock::now();
      const LabelingReport rep = derive_region_labels();
      GenerationOptions opts;
      opts.solver.maxDepth = tableDepth;
      opts.bound = bound;
      opts.retryMargin = retryMargin;
      opts.progress = [&](int done, int total) {
        if (done % 40 == 0 || done == total) {
          const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          std::fprintf(stderr, "cells %d/%d  %.0f s\n", done, total, s);
        }
      };
      const CompositionTable t = generate_composition_table(rep.labeling, opts);
      save_tables(t, out);
      load_tables(out);
      std::fprintf(stderr, "wrote %s: %zu problems decided with clearance, %zu over budget\n", out.c_str(),
                   t.marginDecided.size(), t.budgetExceeded.size());
      return 0;
    }
    if (*genWorld) {
      WorldConfig cfg;
      cfg.landmarks = landmarks;
      cfg.images = images;
      cfg.side = side;
      cfg.boundaryTolerance = boundaryTol;
      write_text(out, world_to_string(gen_world(cfg, seed)));
      return 0;
    }

    const CompositionTable tables = load_tables(tablesPath);

    if (*simulate) {
      World w;
      if (!worldPath.empty()) {
        w = load_world(worldPath);
      } else {
        WorldConfig cfg;
        cfg.landmarks = landmarks;
        cfg.images = images;
        cfg.boundaryTolerance = boundaryTol;
        w = gen_world(cfg, seed);
      }
      SimOptions opts;
      opts.observe.nNearest = nNearest;
      opts.observe.measureCyclic = measureCyclic;
      if (maxRange > 0.0) opts.observe.maxRange = maxRange;
      opts.measurement.solver.maxDepth = depth;
      opts.timing = timing;
      const SimResult r = run_sim(w, tables, opts);
      std::vector<CampaignRow> rows;
      const int n = nNearest > 0 ? nNearest : static_cast<int>(w.landmarks.size());
      for (const auto& m : r.rows) rows.push_back({n, 0, m});
      write_text(out, metrics_csv(rows));
      if (!mapOut.empty()) write_text(mapOut, r.map.dump());
      if (r.truthViolations > 0) std::fprintf(stderr, "warning: %ld stored sets lost the true state\n", r.truthViolations);
      return 0;
    }
    if (*mc) {
      CampaignConfig cfg;
      cfg.runs = runs;
      cfg.world.landmarks = landmarks;
      cfg.world.images = images;
      cfg.world.boundaryTolerance = boundaryTol;
      cfg.nNearest = nList;
      cfg.seed = seed;
      cfg.measureCyclic = measureCyclic;
      cfg.timing = timing;
      cfg.solverDepth = depth;
      cfg.jobs = jobs;
      const CampaignResult r = run_mc(cfg, tables);
      write_text(out, metrics_csv(r.rows));
      if (aggOut.empty()) {
        const auto dot = out.rfind('.');
        aggOut = dot == std::string::npos ? out + "_agg" : out.substr(0, dot) + "_agg" + out.substr(dot);
      }
      write_text(aggOut, aggregate_csv(r.rows));
      if (r.truthViolations > 0) std::fprintf(stderr, "warning: %ld stored sets lost the true state\n", r.truthViolations);
      return 0;
    }
    if (*rngCmd) {
      if (mapPath.empty() == worldPath.empty()) throw CLI::ValidationError("rng", "give exactly one of --map, --world");
      const QualMap map = mapPath.empty() ? converged_map(load_world(worldPath).landmarks, tables)
                                          : QualMap::load(read_text(mapPath), tables);
      write_text(out, rng_text(estimate_rng(map)));
      return 0;
    }
    if (*navCmd) {
      const World w = load_world(worldPath);
      const QualMap map = mapPath.empty() ? converged_map(w.landmarks, tables) : QualMap::load(read_text(mapPath), tables);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> coord(0.0, w.side);
      const Point2 start = startXY.size() == 2 ? Point2(startXY[0], startXY[1]) : Point2(coord(rng), coord(rng));
      const Point2 goal = goalXY.size() == 2 ? Point2(goalXY[0], goalXY[1]) : Point2(coord(rng), coord(rng));
      NavigateOptions opts;
      opts.stepSize = step;
      opts.lambda = lambda;
      opts.maxSteps = maxSteps;
      const NavigationResult r = navigate(w.landmarks, estimate_rng(map), start, goal, opts);
      write_text(out, trajectory_csv(r));
      std::ostringstream hops;
      for (LandmarkId h : r.plan.hops) hops << ' ' << h;
      std::fprintf(stderr, "route:%s  arrived=%s  length=%.6g  straight=%.6g\n", hops.str().c_str(),
                   r.arrived ? "yes" : "no", r.pathLength, (goal - start).norm());
      return r.arrived ? 0 : 2;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
