// Unary EDC operators and the binary composition table.
#pragma once

#include "qrm/edc.hpp"
#include "qrm/qfeas.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qrm {

struct CorruptTable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AnchorMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// LEFT(AB:C) = BC:A, RIGHT(AB:C) = CA:B, INVERSE(AB:C) = BA:C, applied
/// element-wise and united.
StateSet apply_left(StateSet s, const UnaryTable& t = published_unary_table());
StateSet apply_right(StateSet s, const UnaryTable& t = published_unary_table());
StateSet apply_inverse(StateSet s, const UnaryTable& t = published_unary_table());

/// (s1, s2) -> feasible states of AB:D given AB:C = s1 and BC:D = s2.
class CompositionTable {
 public:
  CompositionTable() = default;

  StateSet entry(RegionId s1, RegionId s2) const { return entries_[idx(s1)][idx(s2)]; }
  void set_entry(RegionId s1, RegionId s2, StateSet s);

  /// Union of entries over s1 x s2. Empty inputs give the empty set.
  StateSet compose(StateSet s1, StateSet s2) const {
    std::uint32_t out = 0;
    const std::uint32_t lo = s2.mask() & 0x3ffu;
    const std::uint32_t hi = s2.mask() >> 10;
    for (std::uint32_t m = s1.mask(); m; m &= m - 1) {
      const auto& row = lut_[static_cast<size_t>(std::countr_zero(m))];
      out |= row[lo] | row[1024 + hi];
    }
    return StateSet::from_mask(out);
  }

  bool complete() const;

  int depth = 0;
  double bound = 0.0;
  RegionLabeling labeling;
  double retryMargin = 0.0;
  /// (s1, s2, s3) problems decided by the clearance retry.
  std::vector<std::array<int, 3>> marginDecided;
  /// (s1, s2, s3) problems that exhausted both budgets; s3 was kept.
  std::vector<std::array<int, 3>> budgetExceeded;

  friend bool operator==(const CompositionTable& a, const CompositionTable& b) { return a.entries_ == b.entries_; }

 private:
  static size_t idx(RegionId r) { return static_cast<size_t>(r.value() - 1); }
  void rebuild_row(size_t s1);

  std::array<std::array<StateSet, kRegionCount>, kRegionCount> entries_{};
  // Per first state, unions over the low and high ten bits of s2.
  std::array<std::array<std::uint32_t, 2048>, kRegionCount> lut_{};
};

StateSet compose(StateSet s1, StateSet s2, const CompositionTable& t);

/// Strict constraints "expr < 0" for one region, drawing on its defining
/// expressions only.
template <typename T>
std::vector<Quadratic<double, 4>> region_inequalities(const std::array<T, kPredicateCount>& exprs, RegionId r,
                                                      const RegionLabeling& labeling) {
  std::vector<Quadratic<double, 4>> out;
  const SignVector s = labeling.signs(r);
  const std::uint8_t def = labeling.defining_predicates(r);
  for (int i = 0; i < kPredicateCount; ++i) {
    if (!((def >> i) & 1u)) continue;
    const Quadratic<double, 4> e(exprs[static_cast<size_t>(i)]);
    out.push_back(s.is_negative(i) ? e : -e);
  }
  return out;
}

/// Constraints on (alpha, beta, gamma, delta), C = (alpha, beta) and
/// D = (gamma, delta) in the frame A = (0,0), B = (0,1), for AB:C = s1,
/// BC:D = s2, AB:D = s3.
///
/// A positive margin tightens every expression e of triple PQ:R to
/// e + margin * (|Q-P|^2 + |R-P|^2) < 0, i.e. it demands clearance relative
/// to the size of the triple.
std::vector<QuadConstraint<double, 4>> composition_constraints(RegionId s1, RegionId s2, RegionId s3,
                                                               const RegionLabeling& labeling, double margin = 0.0);

struct GenerationOptions {
  SolverConfig solver{60, 1e-12, 1, 100'000};
  double bound = 1000.0;
  /// Problems that exhaust the solver budget are retried with a relative
  /// clearance margin. Infeasible systems whose closures still touch (C or D
  /// collinear with AB, D on B, ...) are never pruned at the exact boundary,
  /// and the margin separates them. A problem that also exhausts the retry
  /// budget keeps its state.
  double retryMargin = 1e-2;
  std::uint64_t retryRects = 5'000'000;
  /// Called after each (s1, s2) cell with the number of cells finished.
  std::function<void(int done, int total)> progress;
};

/// Solves the 8000 feasibility problems. Problems are reduced by the mirror
/// symmetry across AB (left and right regions swap), so only cells with a
/// left-hand s1 are solved directly.
CompositionTable generate_composition_table(const RegionLabeling& labeling, const GenerationOptions& opts = {});

/// Region whose sign pattern is r's reflected across the line AB.
RegionId mirror_region(RegionId r, const RegionLabeling& labeling);

void save_tables(const CompositionTable& t, const std::string& path);
/// Verifies the body checksum (CorruptTable), the labeling against a fresh
/// parse and the published composition anchors (AnchorMismatch).
CompositionTable load_tables(const std::string& path);

}  // namespace qrm
