// Qualitative map: a 3-uniform hypergraph over landmarks. Each edge {p, q, r}
// stores the EDC state sets of its three cyclic relations; the swapped
// relations follow through INVERSE. Measurements are fused by
// path-consistency propagation through the composition table.
#pragma once

#include "qrm/measurement.hpp"
#include "qrm/operators.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace qrm {

struct Contradiction : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingEdge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FusionStats {
  long statesRemoved = 0;
  long relationsChanged = 0;
  int propagationDepth = 0;
  double wallMillis = 0.0;
};

class QualMap {
 public:
  /// The table must outlive the map.
  explicit QualMap(const CompositionTable& table, const UnaryTable& unary = published_unary_table());

  bool has_node(LandmarkId id) const { return index_.count(id) != 0; }
  /// Landmark ids in insertion order.
  const std::vector<LandmarkId>& nodes() const { return nodes_; }
  /// Adds the node and all edges it closes, each initialised to every state.
  void add_node(LandmarkId id);

  size_t edge_count() const { return edges_.size(); }
  /// Sum of stored set sizes over all edges and their three relations.
  long open_states() const;

  /// State set of AB:C for any ordering of an existing triple.
  StateSet get_relation(LandmarkId a, LandmarkId b, LandmarkId c) const;

  /// Intersects the measured relation and propagates to a fixed point. Missing
  /// nodes are added first. On an empty intersection the map (including any
  /// nodes added by this call) is restored and Contradiction is thrown.
  FusionStats fuse(const TripleMeasurement& m);

  /// One line per edge in ascending landmark order: "i j k: ij:k, jk:i, ki:j".
  std::string dump() const;
  /// Rebuilds a map from dump() output.
  static QualMap load(const std::string& text, const CompositionTable& table,
                      const UnaryTable& unary = published_unary_table());

  const CompositionTable& table() const { return *table_; }

 private:
  // Slot = edge * 3 + rotation; rotations 0, 1, 2 hold (i j : k), (j k : i),
  // (k i : j) for node indices i < j < k.
  struct SlotRef {
    size_t slot;  // edge * 3 + rotation
    bool inverted;
  };

  static size_t edge_index(int i, int j, int k);
  SlotRef locate(int a, int b, int c) const;
  std::array<int, 3> slot_nodes(size_t slot) const;
  StateSet& stored(size_t slot) { return edges_[slot / 3][slot % 3]; }
  StateSet stored(size_t slot) const { return edges_[slot / 3][slot % 3]; }
  StateSet read(int a, int b, int c) const;
  int node_index(LandmarkId id) const;

  bool restrict_to(int a, int b, int c, StateSet allowed);
  void propagate(size_t slot);

  const CompositionTable* table_;
  const UnaryTable* unary_;
  std::vector<LandmarkId> nodes_;
  std::unordered_map<LandmarkId, int> index_;
  std::vector<std::array<StateSet, 3>> edges_;
  std::vector<std::array<int, 3>> edge_nodes_;  // sorted node indices

  // Scratch state of the running fusion.
  struct Change {
    size_t slot;
    StateSet before;
  };
  std::vector<Change> journal_;
  std::vector<size_t> queue_;
  std::vector<int> generation_;
  std::vector<char> queued_;
  FusionStats* stats_ = nullptr;
};

/// True iff every compared relation overlaps the stored set. Relations on
/// triples the map does not hold yet are not compared.
bool gate_association(const QualMap& map, const std::vector<TripleMeasurement>& candidate);

/// Existing nodes that could be the landmark observed as `placeholder`: for
/// each node, the placeholder is substituted in every measurement and the
/// result gated. An empty result means the landmark should be added as new.
std::vector<LandmarkId> association_candidates(const QualMap& map, const std::vector<TripleMeasurement>& measurements,
                                               LandmarkId placeholder);

}  // namespace qrm
