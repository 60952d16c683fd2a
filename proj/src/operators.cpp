#include "qrm/operators.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qrm {

namespace {

StateSet apply_column(StateSet s, const std::array<StateSet, kRegionCount + 1>& column) {
  StateSet out;
  s.for_each([&](int r) { out |= column[static_cast<size_t>(r)]; });
  return out;
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

StateSet apply_left(StateSet s, const UnaryTable& t) { return apply_column(s, t.left); }
StateSet apply_right(StateSet s, const UnaryTable& t) { return apply_column(s, t.right); }
StateSet apply_inverse(StateSet s, const UnaryTable& t) { return apply_column(s, t.inverse); }

void CompositionTable::set_entry(RegionId s1, RegionId s2, StateSet s) {
  entries_[idx(s1)][idx(s2)] = s;
  rebuild_row(idx(s1));
}

void CompositionTable::rebuild_row(size_t s1) {
  auto& row = lut_[s1];
  for (std::uint32_t half = 0; half < 2; ++half)
    for (std::uint32_t bits = 0; bits < 1024; ++bits) {
      std::uint32_t acc = 0;
      for (std::uint32_t m = bits; m; m &= m - 1) {
        const size_t s2 = half * 10 + static_cast<size_t>(std::countr_zero(m));
        if (s2 < kRegionCount) acc |= entries_[s1][s2].mask();
      }
      row[half * 1024 + bits] = acc;
    }
}

bool CompositionTable::complete() const {
  for (const auto& row : entries_)
    for (StateSet s : row)
      if (s.empty()) return false;
  return true;
}

StateSet compose(StateSet s1, StateSet s2, const CompositionTable& t) { return t.compose(s1, s2); }

std::vector<QuadConstraint<double, 4>> composition_constraints(RegionId s1, RegionId s2, RegionId s3,
                                                               const RegionLabeling& labeling, double margin) {
  using Aff = Affine<double, 4>;
  const Aff zero = Aff::constant(0.0), one = Aff::constant(1.0);
  const Aff alpha = Aff::variable(0), beta = Aff::variable(1), gamma = Aff::variable(2), delta = Aff::variable(3);

  std::vector<QuadConstraint<double, 4>> out;
  auto add = [&](const Aff& px, const Aff& py, const Aff& qx, const Aff& qy, const Aff& rx, const Aff& ry,
                 RegionId r) {
    const Quadratic<double, 4> size = (qx - px) * (qx - px) + (qy - py) * (qy - py) + (rx - px) * (rx - px) +
                                      (ry - py) * (ry - py);
    for (auto& q : region_inequalities(boundary_expressions(px, py, qx, qy, rx, ry), r, labeling))
      out.emplace_back(margin > 0.0 ? q + margin * size : q);
  };
  add(zero, zero, zero, one, alpha, beta, s1);
  add(zero, one, alpha, beta, gamma, delta, s2);
  add(zero, zero, zero, one, gamma, delta, s3);
  return out;
}

RegionId mirror_region(RegionId r, const RegionLabeling& labeling) {
  SignVector s = labeling.signs(r);
  s.negative ^= 1u;
  const auto m = labeling.region_for(s);
  if (!m) throw InconsistentAnchors("labeling is not symmetric across AB");
  return *m;
}

CompositionTable generate_composition_table(const RegionLabeling& labeling, const GenerationOptions& opts) {
  CompositionTable t;
  t.depth = opts.solver.maxDepth;
  t.bound = opts.bound;
  t.labeling = labeling;
  t.retryMargin = opts.retryMargin;
  SolverConfig retry = opts.solver;
  retry.maxRects = opts.retryRects;
  const auto box = Rect<double, 4>::cube(-opts.bound, opts.bound);

  std::array<std::array<StateSet, kRegionCount + 1>, kRegionCount + 1> cells{};
  int done = 0;
  const int total = kRegionCount * kRegionCount;
  for (int s1 = 1; s1 <= kRegionCount; ++s1) {
    if (labeling.signs(RegionId(s1)).is_negative(0)) continue;  // right-hand: filled by mirror
    const int m1 = mirror_region(RegionId(s1), labeling).value();
    for (int s2 = 1; s2 <= kRegionCount; ++s2) {
      const int m2 = mirror_region(RegionId(s2), labeling).value();
      StateSet found, mirrored;
      for (int s3 = 1; s3 <= kRegionCount; ++s3) {
        const std::array<int, 3> key{s1, s2, s3};
        const std::array<int, 3> mirror_key{m1, m2, mirror_region(RegionId(s3), labeling).value()};
        auto res = solve<double, 4>(composition_constraints(RegionId(s1), RegionId(s2), RegionId(s3), labeling), box,
                                    opts.solver);
        if (res.status == FeasibilityStatus::BudgetExceeded && opts.retryMargin > 0.0) {
          res = solve<double, 4>(
              composition_constraints(RegionId(s1), RegionId(s2), RegionId(s3), labeling, opts.retryMargin), box,
              retry);
          if (res.status != FeasibilityStatus::BudgetExceeded) {
            t.marginDecided.push_back(key);
            t.marginDecided.push_back(mirror_key);
          }
        }
        if (res.status == FeasibilityStatus::Infeasible) continue;
        if (res.status == FeasibilityStatus::BudgetExceeded) {
          t.budgetExceeded.push_back(key);
          t.budgetExceeded.push_back(mirror_key);
        }
        found.insert(RegionId(s3));
        mirrored.insert(mirror_region(RegionId(s3), labeling));
      }
      cells[static_cast<size_t>(s1)][static_cast<size_t>(s2)] = found;
      cells[static_cast<size_t>(m1)][static_cast<size_t>(m2)] = mirrored;
      done += 2;
      if (opts.progress) opts.progress(done, total);
    }
  }
  for (int s1 = 1; s1 <= kRegionCount; ++s1)
    for (int s2 = 1; s2 <= kRegionCount; ++s2)
      t.set_entry(RegionId(s1), RegionId(s2), cells[static_cast<size_t>(s1)][static_cast<size_t>(s2)]);
  std::sort(t.marginDecided.begin(), t.marginDecided.end());
  std::sort(t.budgetExceeded.begin(), t.budgetExceeded.end());
  return t;
}

void save_tables(const CompositionTable& t, const std::string& path) {
  std::ostringstream body;
  body << "qrm-edc-tables 1\n";
  body << "depth " << t.depth << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t.bound);
  body << "bound " << buf << "\n";
  body << "labeling " << t.labeling.checksum() << "\n";
  for (int r = 1; r <= kRegionCount; ++r) body << "region " << r << ' ' << t.labeling.signs(RegionId(r)).to_string() << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", t.retryMargin);
  body << "retry-margin " << buf << "\n";
  for (const auto& p : t.marginDecided) body << "margin-decided " << p[0] << ' ' << p[1] << ' ' << p[2] << "\n";
  for (const auto& p : t.budgetExceeded) body << "exceeded " << p[0] << ' ' << p[1] << ' ' << p[2] << "\n";
  for (int s1 = 1; s1 <= kRegionCount; ++s1)
    for (int s2 = 1; s2 <= kRegionCount; ++s2)
      body << s1 << ' ' << s2 << " : " << t.entry(RegionId(s1), RegionId(s2)).to_string() << "\n";
  const std::string text = body.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << "checksum " << hex64(fnv1a(text)) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

CompositionTable load_tables(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.empty() || lines.back().rfind("checksum ", 0) != 0) throw CorruptTable("missing checksum line");

  std::string body;
  for (size_t i = 0; i + 1 < lines.size(); ++i) body += lines[i] + "\n";
  if (lines.back().substr(9) != hex64(fnv1a(body))) throw CorruptTable("checksum mismatch in " + path);

  CompositionTable t;
  std::array<SignVector, kRegionCount + 1> signs{};
  std::string labelSum;
  std::array<bool, kRegionCount * kRegionCount> seen{};
  auto fail = [&](const std::string& why) { throw CorruptTable(path + ": " + why); };
  size_t i = 0;
  if (lines[i++] != "qrm-edc-tables 1") fail("unknown format header");
  for (; i + 1 < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    std::string key;
    ls >> key;
    if (key == "depth") {
      ls >> t.depth;
    } else if (key == "bound") {
      ls >> t.bound;
    } else if (key == "labeling") {
      ls >> labelSum;
    } else if (key == "region") {
      int r = 0;
      std::string s;
      ls >> r >> s;
      if (r < 1 || r > kRegionCount) fail("bad region line");
      signs[static_cast<size_t>(r)] = SignVector::parse(s);
    } else if (key == "retry-margin") {
      ls >> t.retryMargin;
    } else if (key == "margin-decided") {
      std::array<int, 3> p{};
      ls >> p[0] >> p[1] >> p[2];
      t.marginDecided.push_back(p);
    } else if (key == "exceeded") {
      std::array<int, 3> p{};
      ls >> p[0] >> p[1] >> p[2];
      t.budgetExceeded.push_back(p);
    } else {
      int s1 = 0, s2 = 0;
      std::string colon;
      try {
        s1 = std::stoi(key);
      } catch (const std::exception&) {
        fail("unexpected line: " + lines[i]);
      }
      ls >> s2 >> colon;
      if (colon != ":" || s1 < 1 || s1 > kRegionCount || s2 < 1 || s2 > kRegionCount) fail("bad entry: " + lines[i]);
      StateSet s;
      for (int r; ls >> r;) {
        if (r < 1 || r > kRegionCount) fail("bad state in entry: " + lines[i]);
        s.insert(RegionId(r));
      }
      if (s.empty()) fail("empty entry: " + lines[i]);
      seen[static_cast<size_t>((s1 - 1) * kRegionCount + s2 - 1)] = true;
      t.set_entry(RegionId(s1), RegionId(s2), s);
    }
    if (ls.fail() && !ls.eof()) fail("malformed line: " + lines[i]);
  }
  for (bool b : seen)
    if (!b) fail("missing entries");
  try {
    t.labeling = RegionLabeling(signs);
  } catch (const InconsistentAnchors& e) {
    fail(e.what());
  }
  if (t.labeling.checksum() != labelSum) throw AnchorMismatch("labeling checksum does not match region lines");
  for (const auto& a : published_composition_anchors())
    if (t.entry(RegionId(a.first), RegionId(a.second)) != a.result)
      throw AnchorMismatch("composition entry (" + std::to_string(a.first) + "," + std::to_string(a.second) +
                           ") differs from the published identity");
  return t;
}

}  // namespace qrm
