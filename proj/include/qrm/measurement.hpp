// Camera measurements of landmark triples: bearings plus range ordering turned
// into the set of EDC regions they allow.
//
// Camera frame: the camera sits at the origin, A = (1, 0) and
//   B = (r cos theta, r sin theta),  C = (l cos phi, l sin phi)
// with unknown ranges l, r measured in units of the camera-to-A distance.
#pragma once

#include "qrm/edc.hpp"
#include "qrm/qfeas.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace qrm {

struct DegenerateObservation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFewLandmarks : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using LandmarkId = int;
using Triple = std::array<LandmarkId, 3>;

struct TripleObservation {
  Triple ids{};
  double theta = 0.0;  // bearing of B relative to A, counter-clockwise, (-pi, pi]
  double phi = 0.0;    // bearing of C relative to A
  /// rank[i] = position of ids[i] in increasing distance from the camera.
  std::array<int, 3> rank{0, 1, 2};
};

struct TripleMeasurement {
  Triple ids{};
  StateSet states;
};

struct MeasurementConfig {
  SolverConfig solver{30, 1e-12, 1, 2'000'000};
};

/// Inequalities in (l, r) for region `region` of AB:C, without ordering terms.
std::vector<QuadConstraint<double, 2>> measurement_region_constraints(double theta, double phi, RegionId region,
                                                                      const RegionLabeling& labeling);
/// Range-ordering inequalities implied by obs.rank.
std::vector<QuadConstraint<double, 2>> ordering_constraints(const TripleObservation& obs);

/// The six boundary expressions of AB:C at ranges (l, r), each scaled by |AB|^2.
std::array<double, kPredicateCount> measurement_expressions(double theta, double phi, double l, double r);

/// Regions of AB:C consistent with the observation. Only regions in
/// `candidates` are tested; a region whose problem exhausts the solver budget
/// is kept.
TripleMeasurement measure_triple(const TripleObservation& obs, const RegionLabeling& labeling,
                                 const MeasurementConfig& cfg = {}, StateSet candidates = StateSet::universe());

struct ObserveOptions {
  int nNearest = 0;  // 0: all landmarks
  std::optional<double> maxRange;
  bool measureCyclic = true;  // observe AB:C, BC:A and CA:B per triple
};

/// Observation of one ordered triple from a camera position.
TripleObservation observe_triple(const Point2& camera, const Triple& ids, const std::map<LandmarkId, Point2>& landmarks);

/// Observations of every triple among the visible landmarks, in sorted-triple
/// order. Visible: the nNearest closest, optionally within maxRange.
std::vector<TripleObservation> observe_world(const Point2& camera, const std::map<LandmarkId, Point2>& landmarks,
                                             const ObserveOptions& opts);

/// Landmarks selected by observe_world, sorted by id.
std::vector<LandmarkId> visible_landmarks(const Point2& camera, const std::map<LandmarkId, Point2>& landmarks,
                                          const ObserveOptions& opts);

}  // namespace qrm
