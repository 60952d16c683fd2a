#include "qrm/edc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>

namespace qrm {

std::string StateSet::to_string() const {
  std::string out;
  for_each([&](int r) {
    if (!out.empty()) out += ' ';
    out += std::to_string(r);
  });
  return out;
}

std::string SignVector::to_string() const {
  std::string s(kPredicateCount, '+');
  for (int i = 0; i < kPredicateCount; ++i)
    if (is_negative(i)) s[static_cast<size_t>(i)] = '-';
  return s;
}

SignVector SignVector::parse(const std::string& s) {
  if (s.size() != kPredicateCount) throw std::invalid_argument("sign vector must have 6 entries: " + s);
  SignVector v;
  for (int i = 0; i < kPredicateCount; ++i) {
    const char ch = s[static_cast<size_t>(i)];
    if (ch == '-') v.negative |= static_cast<std::uint8_t>(1u << i);
    else if (ch != '+') throw std::invalid_argument("bad sign character in " + s);
  }
  return v;
}

CanonicalTriple canonicalize(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 u = b - a;
  const Point2 v = c - a;
  const double n = u.squaredNorm();
  if (!(n > 0.0)) throw DegenerateTriple("coincident landmarks A and B");
  return {(v.x() * u.y() - v.y() * u.x()) / n, u.dot(v) / n};
}

std::array<double, kPredicateCount> predicate_values(const CanonicalTriple& p) {
  return boundary_expressions(0.0, 0.0, 0.0, 1.0, p.alpha, p.beta);
}

double boundary_margin(const CanonicalTriple& p) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : predicate_values(p)) m = std::min(m, std::abs(v));
  return m;
}

SignVector eval_predicates(const CanonicalTriple& p, double eps) {
  const auto vals = predicate_values(p);
  SignVector s;
  for (int i = 0; i < kPredicateCount; ++i) {
    const double v = vals[static_cast<size_t>(i)];
    if (!(std::abs(v) >= eps)) throw DegenerateTriple("point lies on an EDC boundary");
    if (v < 0.0) s.negative |= static_cast<std::uint8_t>(1u << i);
  }
  return s;
}

const UnaryTable& published_unary_table() {
  static const UnaryTable table = [] {
    // region, BC:A, CA:B, BA:C
    struct Row { int r; StateSet l, rt, inv; };
    const Row rows[] = {
        {1, {17}, {7}, {20}},        {2, {18}, {8}, {19}},        {3, {19}, {13}, {18}},
        {4, {20}, {14}, {17}},       {5, {12}, {7}, {16}},        {6, {11}, {13}, {15}},
        {7, {1, 5}, {12, 17}, {14}}, {8, {2, 10}, {15, 18}, {13}}, {9, {16}, {14}, {12}},
        {10, {15}, {8}, {11}},       {11, {13}, {6}, {10}},       {12, {7}, {5}, {9}},
        {13, {3, 6}, {11, 19}, {8}}, {14, {4, 9}, {16, 20}, {7}}, {15, {8}, {10}, {6}},
        {16, {14}, {9}, {5}},        {17, {7}, {1}, {4}},         {18, {8}, {2}, {3}},
        {19, {13}, {3}, {2}},        {20, {14}, {4}, {1}},
    };
    UnaryTable t;
    for (const Row& row : rows) {
      t.left[static_cast<size_t>(row.r)] = row.l;
      t.right[static_cast<size_t>(row.r)] = row.rt;
      t.inverse[static_cast<size_t>(row.r)] = row.inv;
    }
    return t;
  }();
  return table;
}

const std::array<CompositionAnchor, 3>& published_composition_anchors() {
  static const std::array<CompositionAnchor, 3> anchors{{
      {1, 5, {1, 5, 11, 12, 17, 19}},
      {5, 5, {12, 17, 18, 19, 20}},
      {11, 5, {17, 18, 19, 20}},
  }};
  return anchors;
}

RegionLabeling::RegionLabeling(const std::array<SignVector, kRegionCount + 1>& by_region) : by_region_(by_region) {
  region_by_mask_.fill(0);
  for (int r = 1; r <= kRegionCount; ++r) {
    auto& slot = region_by_mask_[by_region_[static_cast<size_t>(r)].negative];
    if (slot != 0) throw InconsistentAnchors("labeling maps two regions to one sign pattern");
    slot = static_cast<std::int8_t>(r);
  }
  // Greedily drop expressions while the remaining signs still single out one region.
  for (int r = 1; r <= kRegionCount; ++r) {
    const std::uint8_t own = by_region_[static_cast<size_t>(r)].negative;
    std::uint8_t keep = (1u << kPredicateCount) - 1;
    for (int i = 0; i < kPredicateCount; ++i) {
      const std::uint8_t trial = keep & static_cast<std::uint8_t>(~(1u << i));
      int matches = 0;
      for (int o = 1; o <= kRegionCount; ++o)
        if (((by_region_[static_cast<size_t>(o)].negative ^ own) & trial) == 0) ++matches;
      if (matches == 1) keep = trial;
    }
    defining_[static_cast<size_t>(r)] = keep;
  }
  valid_ = true;
}

std::optional<RegionId> RegionLabeling::region_for(SignVector s) const {
  const int r = region_by_mask_[s.negative];
  if (r == 0) return std::nullopt;
  return RegionId(r);
}

std::string RegionLabeling::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for (int r = 1; r <= kRegionCount; ++r) {
    h ^= by_region_[static_cast<size_t>(r)].negative;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RegionId region_of(const CanonicalTriple& p, const RegionLabeling& labeling) {
  const SignVector s = eval_predicates(p);
  const auto r = labeling.region_for(s);
  if (!r) throw DegenerateTriple("sign pattern " + s.to_string() + " is not a realizable region");
  return *r;
}

RegionId region_of(const Point2& a, const Point2& b, const Point2& c, const RegionLabeling& labeling) {
  return region_of(canonicalize(a, b, c), labeling);
}

namespace {

// Dense grid over [-h, h]^2 plus rings out to large radius. The grid is shifted
// off the symmetric lattice so no sample sits on a boundary locus.
std::vector<Point2> sample_plane(int n, double h) {
  std::vector<Point2> pts;
  pts.reserve(static_cast<size_t>(n) * static_cast<size_t>(n) + 20000);
  const double step = 2.0 * h / n;
  const double shift = 1e-7 * std::numbers::pi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pts.emplace_back(-h + (i + 0.5) * step + shift, -h + (j + 0.5) * step + shift * std::numbers::e);
  for (double radius : {8.0, 20.0, 60.0, 200.0, 1000.0})
    for (int k = 0; k < 3000; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.37) / 3000.0;
      pts.emplace_back(radius * std::cos(t), 0.5 + radius * std::sin(t));
    }
  return pts;
}

std::optional<std::uint8_t> class_of(const CanonicalTriple& p) {
  try {
    return eval_predicates(p).negative;
  } catch (const DegenerateTriple&) {
    return std::nullopt;
  }
}

struct UnaryImages {
  // Indexed by sign mask (0..63); sets of sign masks as 64-bit masks.
  std::array<std::uint64_t, 64> left{}, right{}, inverse{};
  std::uint64_t realized = 0;
};

UnaryImages sample_unary_images(int n, double h) {
  UnaryImages img;
  const Point2 A(0.0, 0.0), B(0.0, 1.0);
  for (const Point2& C : sample_plane(n, h)) {
    const auto k = class_of({C.x(), C.y()});
    const auto kl = class_of(canonicalize(B, C, A));
    const auto kr = class_of(canonicalize(C, A, B));
    const auto ki = class_of(canonicalize(B, A, C));
    if (!k || !kl || !kr || !ki) continue;
    img.realized |= 1ull << *k;
    img.left[*k] |= 1ull << *kl;
    img.right[*k] |= 1ull << *kr;
    img.inverse[*k] |= 1ull << *ki;
  }
  return img;
}

StateSet to_state_set(std::uint64_t masks, const RegionLabeling& lab) {
  StateSet s;
  for (int m = 0; m < 64; ++m)
    if ((masks >> m) & 1ull) {
      const auto r = lab.region_for(SignVector{static_cast<std::uint8_t>(m)});
      if (!r) throw InconsistentAnchors("unlabeled sign class in unary image");
      s.insert(*r);
    }
  return s;
}

struct Quad { std::uint8_t k1, k2, k3; };

std::vector<Quad> sample_compositions(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Point2 centers[] = {{0.0, 0.0}, {0.0, 1.0}, {0.0, 0.5}};
  auto draw = [&] {
    const Point2& c = centers[static_cast<size_t>(rng() % 3)];
    const double rho = 0.02 * std::pow(1000.0, unit(rng));
    const double t = 2.0 * std::numbers::pi * unit(rng);
    return Point2(c.x() + rho * std::cos(t), c.y() + rho * std::sin(t));
  };
  const Point2 A(0.0, 0.0), B(0.0, 1.0);
  std::vector<Quad> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Point2 C = draw(), D = draw();
    const auto k1 = class_of(canonicalize(A, B, C));
    std::optional<std::uint8_t> k2;
    if ((C - B).norm() > 1e-9) k2 = class_of(canonicalize(B, C, D));
    const auto k3 = class_of(canonicalize(A, B, D));
    if (k1 && k2 && k3) out.push_back({*k1, *k2, *k3});
  }
  return out;
}

}  // namespace

LabelingReport derive_region_labels(const LabelingOptions& opts) {
  LabelingReport report;
  const UnaryImages img = sample_unary_images(opts.gridPerAxis, opts.halfWidth);

  std::vector<std::uint8_t> classes;
  for (int m = 0; m < 64; ++m)
    if ((img.realized >> m) & 1ull) classes.push_back(static_cast<std::uint8_t>(m));
  report.classesFound = static_cast<int>(classes.size());
  if (classes.size() != kRegionCount)
    throw InconsistentAnchors("expected 20 realizable sign classes, found " + std::to_string(classes.size()));

  const UnaryTable& pub = published_unary_table();

  // Backtracking: assign region numbers to sign classes so that every
  // geometric unary image maps onto the published entry.
  std::array<int, 64> id_of{};
  id_of.fill(0);
  std::array<bool, kRegionCount + 1> used{};
  std::vector<std::array<int, 64>> solutions;

  auto image_ok = [&](std::uint64_t geo, StateSet published) {
    if (std::popcount(geo) != published.size()) return false;
    StateSet mapped;
    for (int m = 0; m < 64; ++m)
      if ((geo >> m) & 1ull) {
        if (id_of[static_cast<size_t>(m)] == 0) return true;  // not yet decidable
        mapped.insert(RegionId(id_of[static_cast<size_t>(m)]));
      }
    return mapped == published;
  };
  auto consistent = [&] {
    for (std::uint8_t c : classes) {
      const int id = id_of[c];
      if (id == 0) continue;
      const auto u = static_cast<size_t>(id);
      if (!image_ok(img.left[c], pub.left[u]) || !image_ok(img.right[c], pub.right[u]) ||
          !image_ok(img.inverse[c], pub.inverse[u]))
        return false;
    }
    return true;
  };
  auto search = [&](auto&& self, size_t idx) -> void {
    if (idx == classes.size()) {
      solutions.push_back(id_of);
      return;
    }
    for (int id = 1; id <= kRegionCount; ++id) {
      if (used[static_cast<size_t>(id)]) continue;
      used[static_cast<size_t>(id)] = true;
      id_of[classes[idx]] = id;
      if (consistent()) self(self, idx + 1);
      id_of[classes[idx]] = 0;
      used[static_cast<size_t>(id)] = false;
    }
  };
  search(search, 0);
  report.tableConsistentLabelings = static_cast<int>(solutions.size());
  if (solutions.empty()) throw InconsistentAnchors("no labeling reproduces the unary table");

  // Textual anchors, evaluated on the grid samples.
  std::uint64_t anchor2 = 0, anchor7 = 0, lune = 0;
  {
    const int n = opts.gridPerAxis;
    const double h = opts.halfWidth, step = 2.0 * h / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double a = -h + (i + 0.5) * step + 1e-7 * std::numbers::pi;
        const double b = -h + (j + 0.5) * step + 1e-7 * std::numbers::pi * std::numbers::e;
        const auto k = class_of({a, b});
        if (!k) continue;
        const double ac2 = a * a + b * b, bc2 = a * a + (b - 1) * (b - 1);
        if (a > 0 && b - 1 > 0 && a * a + b * b - 2 * b > 0) anchor2 |= 1ull << *k;
        if (a < 0 && bc2 < ac2 && ac2 < 1) anchor7 |= 1ull << *k;
        if (ac2 < 1 && bc2 < 1) lune |= 1ull << *k;
      }
  }
  if (std::popcount(anchor2) != 1 || std::popcount(anchor7) != 1 || std::popcount(lune) != 4)
    throw InconsistentAnchors("textual anchors do not isolate single sign classes");

  const std::vector<Quad> quads = sample_compositions(opts.compositionSamples, opts.seed);

  std::vector<std::array<int, 64>> survivors;
  for (const auto& sol : solutions) {
    if (sol[static_cast<size_t>(std::countr_zero(anchor2))] != 2) continue;
    if (sol[static_cast<size_t>(std::countr_zero(anchor7))] != 7) continue;
    StateSet lune_ids;
    for (int m = 0; m < 64; ++m)
      if ((lune >> m) & 1ull) lune_ids.insert(RegionId(sol[static_cast<size_t>(m)]));
    if (lune_ids != StateSet{7, 8, 13, 14}) continue;
    bool ok = true;
    for (const Quad& q : quads) {
      const int s1 = sol[q.k1], s2 = sol[q.k2], s3 = sol[q.k3];
      for (const auto& anchor : published_composition_anchors())
        if (anchor.first == s1 && anchor.second == s2 && !anchor.result.contains(s3)) ok = false;
      if (!ok) break;
    }
    if (ok) survivors.push_back(sol);
  }
  if (survivors.empty()) throw InconsistentAnchors("no labeling satisfies all anchors");
  if (survivors.size() > 1)
    throw AmbiguousLabeling(std::to_string(survivors.size()) + " labelings satisfy all anchors");

  std::array<SignVector, kRegionCount + 1> by_region{};
  for (std::uint8_t c : classes) by_region[static_cast<size_t>(survivors[0][c])] = SignVector{c};
  report.labeling = RegionLabeling(by_region);

  for (std::uint8_t c : classes) {
    const auto r = static_cast<size_t>(survivors[0][c]);
    report.regenerated.left[r] = to_state_set(img.left[c], report.labeling);
    report.regenerated.right[r] = to_state_set(img.right[c], report.labeling);
    report.regenerated.inverse[r] = to_state_set(img.inverse[c], report.labeling);
  }
  return report;
}

UnaryTable regenerate_unary_table(const RegionLabeling& labeling, int gridPerAxis, double halfWidth) {
  const UnaryImages img = sample_unary_images(gridPerAxis, halfWidth);
  UnaryTable t;
  for (int r = 1; r <= kRegionCount; ++r) {
    const std::uint8_t c = labeling.signs(RegionId(r)).negative;
    t.left[static_cast<size_t>(r)] = to_state_set(img.left[c], labeling);
    t.right[static_cast<size_t>(r)] = to_state_set(img.right[c], labeling);
    t.inverse[static_cast<size_t>(r)] = to_state_set(img.inverse[c], labeling);
  }
  return t;
}

RegionAdjacency region_adjacency(const RegionLabeling& labeling, int n, double h) {
  std::vector<std::int8_t> grid(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
  const double step = 2.0 * h / n;
  const double shift = 1e-7 * std::numbers::pi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const CanonicalTriple p{-h + (i + 0.5) * step + shift, -h + (j + 0.5) * step + shift * std::numbers::e};
      const auto k = class_of(p);
      if (!k) continue;
      const auto r = labeling.region_for(SignVector{*k});
      if (r) grid[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] = static_cast<std::int8_t>(r->value());
    }
  RegionAdjacency adj{};
  auto link = [&](int a, int b) {
    adj[static_cast<size_t>(a)].insert(RegionId(b));
    adj[static_cast<size_t>(b)].insert(RegionId(a));
  };
  // Regions meeting only at a vertex can do so through a cusp (a circle tangent
  // to a perpendicular at A or B) that no grid cell resolves, so every pairwise
  // intersection point of the boundary loci is probed with fine rings.
  const double r3 = std::sqrt(3.0) / 2.0;
  const Point2 vertices[] = {{0, 0}, {0, 1}, {0, 0.5}, {0, -1}, {0, 2}, {1, 0}, {-1, 0},
                             {1, 1}, {-1, 1}, {r3, 0.5}, {-r3, 0.5}};
  for (const Point2& v : vertices) {
    StateSet touching;
    for (double rho : {1e-2, 1e-3}) {
      const int samples = 200000;
      for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * std::numbers::pi * (k + 0.5) / samples;
        const auto c = class_of({v.x() + rho * std::cos(t), v.y() + rho * std::sin(t)});
        if (!c) continue;
        if (const auto r = labeling.region_for(SignVector{*c})) touching.insert(*r);
      }
    }
    touching.for_each([&](int a) { touching.for_each([&](int b) { if (a < b) link(a, b); }); });
  }
  auto at = [&](int i, int j) { return grid[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)]; };
  const int di[] = {1, 0, 1, 1};
  const int dj[] = {0, 1, 1, -1};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int a = at(i, j);
      if (a == 0) continue;
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
        const int b = at(ii, jj);
        if (b != 0 && b != a) link(a, b);
      }
    }
  return adj;
}

}  // namespace qrm
