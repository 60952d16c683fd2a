// Extended Double Cross: the 20 qualitative regions in which a point C can lie
// relative to a directed landmark pair A -> B.
//
// Six boundary expressions split the plane. In the canonical frame
// A = (0,0), B = (0,1), C = (alpha, beta) they read
//
//   -alpha                      < 0  : C right of AB
//   -beta                       < 0  : C in front of A
//   1 - beta                    < 0  : C in front of B
//   1 - 2 beta                  < 0  : |AC| > |BC|
//   1 - (alpha^2 + beta^2)      < 0  : |AC| > |AB|
//   2 beta - (alpha^2 + beta^2) < 0  : |BC| > |AB|
//
// Exactly 20 sign patterns are realizable; RegionLabeling attaches the
// conventional region numbers 1..20 to them.
#pragma once

#include <Eigen/Core>

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrm {

inline constexpr int kRegionCount = 20;
inline constexpr int kPredicateCount = 6;
inline constexpr double kBoundaryEps = 1e-9;

using Point2 = Eigen::Vector2d;

struct DegenerateTriple : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AmbiguousLabeling : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InconsistentAnchors : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RegionId {
 public:
  constexpr explicit RegionId(int v) : value_(v) {
    if (v < 1 || v > kRegionCount) throw std::out_of_range("RegionId out of range: " + std::to_string(v));
  }
  constexpr int value() const { return value_; }
  friend constexpr bool operator==(RegionId, RegionId) = default;
  friend constexpr auto operator<=>(RegionId, RegionId) = default;

 private:
  int value_;
};

/// Set of EDC regions, stored as a 20-bit mask (bit r-1 for region r).
class StateSet {
 public:
  static constexpr std::uint32_t kUniverseMask = (1u << kRegionCount) - 1;

  constexpr StateSet() = default;
  constexpr StateSet(std::initializer_list<int> regions) {
    for (int r : regions) insert(RegionId(r));
  }
  constexpr explicit StateSet(RegionId r) : bits_(bit(r)) {}

  static constexpr StateSet from_mask(std::uint32_t mask) {
    StateSet s;
    s.bits_ = mask & kUniverseMask;
    return s;
  }
  static constexpr StateSet universe() { return from_mask(kUniverseMask); }

  constexpr std::uint32_t mask() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool is_universe() const { return bits_ == kUniverseMask; }
  constexpr bool is_singleton() const { return size() == 1; }
  constexpr bool contains(RegionId r) const { return (bits_ & bit(r)) != 0; }
  constexpr bool contains(int r) const { return r >= 1 && r <= kRegionCount && contains(RegionId(r)); }
  constexpr bool subset_of(StateSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr void insert(RegionId r) { bits_ |= bit(r); }
  constexpr void erase(RegionId r) { bits_ &= ~bit(r); }

  /// Smallest member; undefined on the empty set.
  constexpr RegionId first() const { return RegionId(std::countr_zero(bits_) + 1); }

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t m = bits_; m; m &= m - 1) out.push_back(std::countr_zero(m) + 1);
    return out;
  }

  /// Space separated region numbers, e.g. "1 5 11".
  std::string to_string() const;

  constexpr StateSet& operator&=(StateSet o) { bits_ &= o.bits_; return *this; }
  constexpr StateSet& operator|=(StateSet o) { bits_ |= o.bits_; return *this; }
  friend constexpr StateSet operator&(StateSet a, StateSet b) { return a &= b; }
  friend constexpr StateSet operator|(StateSet a, StateSet b) { return a |= b; }
  friend constexpr bool operator==(StateSet, StateSet) = default;

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint32_t m = bits_; m; m &= m - 1) f(std::countr_zero(m) + 1);
  }

 private:
  static constexpr std::uint32_t bit(RegionId r) { return 1u << (r.value() - 1); }
  std::uint32_t bits_ = 0;
};

/// Signs of the six boundary expressions; bit i set means expression i < 0.
struct SignVector {
  std::uint8_t negative = 0;

  bool is_negative(int i) const { return (negative >> i) & 1u; }
  friend bool operator==(SignVector, SignVector) = default;
  /// "+" / "-" per expression, e.g. "-+++++".
  std::string to_string() const;
  static SignVector parse(const std::string& s);
};

/// Coordinates of C in the frame A = (0,0), B = (0,1), x pointing right of AB.
struct CanonicalTriple {
  double alpha = 0.0;
  double beta = 0.0;
};

/// The six boundary expressions for points a, b, c, each scaled by |b - a|^2.
/// Generic so the same formulas produce numbers (T = double) or quadratic
/// constraint expressions (T = Affine<...>).
template <typename T>
auto boundary_expressions(const T& ax, const T& ay, const T& bx, const T& by, const T& cx, const T& cy) {
  const T ux = bx - ax, uy = by - ay;
  const T vx = cx - ax, vy = cy - ay;
  const auto cross = ux * vy - uy * vx;
  const auto dot = ux * vx + uy * vy;
  const auto uu = ux * ux + uy * uy;
  const auto vv = vx * vx + vy * vy;
  using R = std::remove_cv_t<decltype(cross)>;
  return std::array<R, kPredicateCount>{cross, -dot, uu - dot, uu - 2.0 * dot, uu - vv, 2.0 * dot - vv};
}

CanonicalTriple canonicalize(const Point2& a, const Point2& b, const Point2& c);
std::array<double, kPredicateCount> predicate_values(const CanonicalTriple& p);
/// Smallest boundary-expression magnitude; below kBoundaryEps the triple is degenerate.
double boundary_margin(const CanonicalTriple& p);
/// Throws DegenerateTriple when any expression is within eps of zero.
SignVector eval_predicates(const CanonicalTriple& p, double eps = kBoundaryEps);

/// Published unary transformation table (AB:C -> BC:A, CA:B, BA:C).
struct UnaryTable {
  std::array<StateSet, kRegionCount + 1> left{};
  std::array<StateSet, kRegionCount + 1> right{};
  std::array<StateSet, kRegionCount + 1> inverse{};
  friend bool operator==(const UnaryTable&, const UnaryTable&) = default;
};
const UnaryTable& published_unary_table();

struct CompositionAnchor {
  int first;
  int second;
  StateSet result;
};
/// The three composition identities used as labeling and table anchors.
const std::array<CompositionAnchor, 3>& published_composition_anchors();

/// Bijection between region numbers and realizable sign patterns.
class RegionLabeling {
 public:
  RegionLabeling() = default;
  explicit RegionLabeling(const std::array<SignVector, kRegionCount + 1>& by_region);

  SignVector signs(RegionId r) const { return by_region_[static_cast<size_t>(r.value())]; }
  std::optional<RegionId> region_for(SignVector s) const;
  /// Minimal subset of expressions (bit mask) that singles out r among the 20 regions.
  std::uint8_t defining_predicates(RegionId r) const { return defining_[static_cast<size_t>(r.value())]; }
  /// Hex FNV-1a digest of the sign patterns in region order.
  std::string checksum() const;
  bool valid() const { return valid_; }

  friend bool operator==(const RegionLabeling& a, const RegionLabeling& b) { return a.by_region_ == b.by_region_; }

 private:
  std::array<SignVector, kRegionCount + 1> by_region_{};
  std::array<std::int8_t, 64> region_by_mask_{};
  std::array<std::uint8_t, kRegionCount + 1> defining_{};
  bool valid_ = false;
};

RegionId region_of(const CanonicalTriple& p, const RegionLabeling& labeling);
/// Region of AB:C for world points.
RegionId region_of(const Point2& a, const Point2& b, const Point2& c, const RegionLabeling& labeling);

struct LabelingOptions {
  int gridPerAxis = 1000;
  double halfWidth = 5.0;
  int compositionSamples = 400000;
  std::uint64_t seed = 7;
};

struct LabelingReport {
  RegionLabeling labeling;
  int classesFound = 0;
  int tableConsistentLabelings = 0;  // before text anchors
  UnaryTable regenerated;            // unary images computed geometrically
};

/// Reconstructs the region numbering from geometry: enumerates realizable sign
/// classes on a dense grid, matches their geometric unary images against the
/// published table and filters by the textual anchors.
LabelingReport derive_region_labels(const LabelingOptions& opts = {});

/// Geometric unary images under a labeling, from dense sampling.
UnaryTable regenerate_unary_table(const RegionLabeling& labeling, int gridPerAxis = 1000, double halfWidth = 5.0);

/// adjacency[r] = regions whose closure meets the closure of r (r excluded).
using RegionAdjacency = std::array<StateSet, kRegionCount + 1>;
RegionAdjacency region_adjacency(const RegionLabeling& labeling, int gridPerAxis = 1000, double halfWidth = 5.0);

}  // namespace qrm
