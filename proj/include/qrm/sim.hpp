// Simulated worlds, mapping runs and Monte Carlo campaigns.
#pragma once

#include "qrm/nav.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qrm {

struct World {
  std::map<LandmarkId, Point2> landmarks;
  std::vector<Point2> images;
  double side = 1.0;
};

struct WorldConfig {
  int landmarks = 30;
  int images = 50;
  double side = 1.0;
  /// Landmark triples closer than this fraction of the side to any EDC
  /// boundary locus are rejected.
  double boundaryTolerance = 1e-3;
  /// Imaging positions closer than this fraction of the side to a landmark
  /// are rejected.
  double imageClearance = 1.5e-3;
};

/// Uniform landmarks and imaging positions in [0, side]^2. Candidates that
/// would make a triple or an observation degenerate are redrawn.
World gen_world(const WorldConfig& cfg, std::uint64_t seed);

/// Smallest distance, over all ordered landmark triples AB:C, from C to a
/// boundary locus of A and B.
double min_boundary_distance(const std::map<LandmarkId, Point2>& landmarks);

/// True when an observation from p would be degenerate (collinear bearings,
/// range ties, landmark too close).
bool degenerate_viewpoint(const Point2& p, const std::map<LandmarkId, Point2>& landmarks, double clearance);

std::string world_to_string(const World& w);
World world_from_string(const std::string& text);
void save_world(const World& w, const std::string& path);
World load_world(const std::string& path);

struct MetricsRow {
  int step = 0;
  double removedPct = 0.0;
  double constrainedPct = 0.0;
  double nonAdjacentOpenPct = 0.0;
  double rngCost = 0.0;
  double updateMillis = 0.0;
};

struct SimOptions {
  ObserveOptions observe;
  MeasurementConfig measurement;
  bool timing = true;  // false writes 0 for update times
  /// Check every stored set against the geometric truth after each image.
  bool checkTruth = true;
  /// Region adjacency for the non-adjacent metric; computed when null.
  const RegionAdjacency* adjacency = nullptr;
};

struct SimResult {
  std::vector<MetricsRow> rows;  // step 0 is the empty map
  QualMap map;
  long truthViolations = 0;
  long measurements = 0;
};

/// Images the world in order, measuring and fusing every visible triple.
/// Percentages use the final node set: the removed fraction is over
/// 3 * 19 incorrect states per final edge.
SimResult run_sim(const World& world, const CompositionTable& tables, const SimOptions& opts);

/// Map holding the true singleton state of every relation among the landmarks.
QualMap converged_map(const std::map<LandmarkId, Point2>& landmarks, const CompositionTable& tables);

struct CampaignConfig {
  int runs = 10;
  WorldConfig world{15, 30};
  std::vector<int> nNearest{5, 8, 15};
  std::uint64_t seed = 1;
  bool measureCyclic = true;
  bool timing = true;
  int solverDepth = 30;
  int jobs = 1;
};

struct CampaignRow {
  int n;
  int run;
  MetricsRow m;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;
  long truthViolations = 0;
};

/// Run r uses world seed (seed + r) for every n, so the n values see the same
/// worlds.
CampaignResult run_mc(const CampaignConfig& cfg, const CompositionTable& tables);

/// step,n,run,removed_pct,constrained_pct,nonadj_pct,rng_cost,update_ms
std::string metrics_csv(const std::vector<CampaignRow>& rows);
/// Mean and sample standard deviation per (n, step).
std::string aggregate_csv(const std::vector<CampaignRow>& rows);

}  // namespace qrm
