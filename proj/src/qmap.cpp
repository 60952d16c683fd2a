#include "qrm/qmap.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

namespace qrm {

QualMap::QualMap(const CompositionTable& table, const UnaryTable& unary) : table_(&table), unary_(&unary) {}

size_t QualMap::edge_index(int i, int j, int k) {
  auto choose2 = [](size_t n) { return n * (n - 1) / 2; };
  auto choose3 = [](size_t n) { return n * (n - 1) * (n - 2) / 6; };
  return choose3(static_cast<size_t>(k)) + choose2(static_cast<size_t>(j)) + static_cast<size_t>(i);
}

void QualMap::add_node(LandmarkId id) {
  if (has_node(id)) return;
  const int n = static_cast<int>(nodes_.size());
  index_.emplace(id, n);
  nodes_.push_back(id);
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      edges_.push_back({StateSet::universe(), StateSet::universe(), StateSet::universe()});
      edge_nodes_.push_back({i, j, n});
    }
}

long QualMap::open_states() const {
  long total = 0;
  for (const auto& e : edges_)
    for (StateSet s : e) total += s.size();
  return total;
}

int QualMap::node_index(LandmarkId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw MissingEdge("landmark " + std::to_string(id) + " is not in the map");
  return it->second;
}

QualMap::SlotRef QualMap::locate(int a, int b, int c) const {
  std::array<int, 3> s{a, b, c};
  std::sort(s.begin(), s.end());
  const size_t e = edge_index(s[0], s[1], s[2]) * 3;
  const auto [i, j, k] = s;
  if (a == i && b == j) return {e + 0, false};
  if (a == j && b == k) return {e + 1, false};
  if (a == k && b == i) return {e + 2, false};
  // Swapped orders: BA:C is stored as AB:C.
  if (a == j && b == i) return {e + 0, true};
  if (a == k && b == j) return {e + 1, true};
  return {e + 2, true};
}

std::array<int, 3> QualMap::slot_nodes(size_t slot) const {
  const auto& [i, j, k] = edge_nodes_[slot / 3];
  switch (slot % 3) {
    case 0: return {i, j, k};
    case 1: return {j, k, i};
    default: return {k, i, j};
  }
}

StateSet QualMap::read(int a, int b, int c) const {
  const SlotRef r = locate(a, b, c);
  const StateSet s = stored(r.slot);
  return r.inverted ? apply_inverse(s, *unary_) : s;
}

StateSet QualMap::get_relation(LandmarkId a, LandmarkId b, LandmarkId c) const {
  const int ia = node_index(a), ib = node_index(b), ic = node_index(c);
  if (ia == ib || ib == ic || ia == ic) throw std::invalid_argument("relation needs three distinct landmarks");
  return read(ia, ib, ic);
}

bool QualMap::restrict_to(int a, int b, int c, StateSet allowed) {
  const SlotRef r = locate(a, b, c);
  StateSet& cur = stored(r.slot);
  const StateSet next = cur & (r.inverted ? apply_inverse(allowed, *unary_) : allowed);
  if (next == cur) return false;
  if (next.empty()) {
    std::ostringstream msg;
    msg << "empty state set for " << nodes_[static_cast<size_t>(a)] << ' ' << nodes_[static_cast<size_t>(b)] << ':'
        << nodes_[static_cast<size_t>(c)];
    throw Contradiction(msg.str());
  }
  journal_.push_back({r.slot, cur});
  stats_->statesRemoved += cur.size() - next.size();
  stats_->relationsChanged += 1;
  cur = next;
  if (!queued_[r.slot]) {
    queued_[r.slot] = 1;
    queue_.push_back(r.slot);
  }
  return true;
}

void QualMap::propagate(size_t slot) {
  const auto [x, y, z] = slot_nodes(slot);
  const int n = static_cast<int>(nodes_.size());
  const std::array<int, 3> forms[2] = {{x, y, z}, {y, x, z}};
  for (const auto& [a, b, c] : forms) {
    const StateSet val = read(a, b, c);
    restrict_to(b, c, a, apply_left(val, *unary_));
    restrict_to(c, a, b, apply_right(val, *unary_));
  }
  for (const auto& [a, b, c] : forms) {
    for (int w = 0; w < n; ++w) {
      if (w == a || w == b || w == c) continue;
      const StateSet val = read(a, b, c);
      // AB:C with BC:W bounds AB:W; WA:B with AB:C bounds WA:C.
      restrict_to(a, b, w, table_->compose(val, read(b, c, w)));
      restrict_to(w, a, c, table_->compose(read(w, a, b), val));
    }
  }
}

FusionStats QualMap::fuse(const TripleMeasurement& m) {
  const auto start = std::chrono::steady_clock::now();
  const auto& [ida, idb, idc] = m.ids;
  if (ida == idb || idb == idc || ida == idc) throw std::invalid_argument("measurement needs three distinct landmarks");
  if (m.states.empty()) throw std::invalid_argument("measurement has no states");

  FusionStats st;
  stats_ = &st;
  journal_.clear();
  queue_.clear();
  const size_t nodesBefore = nodes_.size();
  const size_t edgesBefore = edges_.size();
  for (LandmarkId id : m.ids) add_node(id);
  queued_.assign(edges_.size() * 3, 0);
  generation_.assign(edges_.size() * 3, 0);

  try {
    restrict_to(node_index(ida), node_index(idb), node_index(idc), m.states);
    for (size_t head = 0; head < queue_.size(); ++head) {
      const size_t slot = queue_[head];
      queued_[slot] = 0;
      const size_t tail = queue_.size();
      propagate(slot);
      for (size_t q = tail; q < queue_.size(); ++q) generation_[queue_[q]] = generation_[slot] + 1;
      st.propagationDepth = std::max(st.propagationDepth, generation_[slot]);
    }
  } catch (const Contradiction&) {
    for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) stored(it->slot) = it->before;
    for (size_t i = nodesBefore; i < nodes_.size(); ++i) index_.erase(nodes_[i]);
    nodes_.resize(nodesBefore);
    edges_.resize(edgesBefore);
    edge_nodes_.resize(edgesBefore);
    stats_ = nullptr;
    throw;
  }
  stats_ = nullptr;
  st.wallMillis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return st;
}

std::string QualMap::dump() const {
  std::vector<LandmarkId> ids = nodes_;
  std::sort(ids.begin(), ids.end());
  std::ostringstream out;
  const size_t n = ids.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      for (size_t k = j + 1; k < n; ++k) {
        const LandmarkId p = ids[i], q = ids[j], r = ids[k];
        out << p << ' ' << q << ' ' << r << ": " << get_relation(p, q, r).to_string() << ", "
            << get_relation(q, r, p).to_string() << ", " << get_relation(r, p, q).to_string() << "\n";
      }
  return out.str();
}

QualMap QualMap::load(const std::string& text, const CompositionTable& table, const UnaryTable& unary) {
  struct Line {
    Triple ids;
    std::array<StateSet, 3> sets;
  };
  std::vector<Line> lines;
  std::set<LandmarkId> ids;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("map dump line without ':': " + line);
    Line l;
    std::istringstream head(line.substr(0, colon));
    if (!(head >> l.ids[0] >> l.ids[1] >> l.ids[2])) throw std::invalid_argument("bad map dump line: " + line);
    std::istringstream rest(line.substr(colon + 1));
    for (int s = 0; s < 3; ++s) {
      std::string part;
      std::getline(rest, part, ',');
      std::istringstream states(part);
      for (int r; states >> r;) l.sets[static_cast<size_t>(s)].insert(RegionId(r));
      if (l.sets[static_cast<size_t>(s)].empty()) throw std::invalid_argument("empty state set in: " + line);
    }
    ids.insert(l.ids.begin(), l.ids.end());
    lines.push_back(l);
  }
  QualMap map(table, unary);
  for (LandmarkId id : ids) map.add_node(id);
  for (const Line& l : lines) {
    const auto& [p, q, r] = l.ids;
    const std::array<std::array<LandmarkId, 3>, 3> rel = {{{p, q, r}, {q, r, p}, {r, p, q}}};
    for (int s = 0; s < 3; ++s) {
      const auto& t = rel[static_cast<size_t>(s)];
      const SlotRef ref = map.locate(map.node_index(t[0]), map.node_index(t[1]), map.node_index(t[2]));
      const StateSet v = l.sets[static_cast<size_t>(s)];
      map.stored(ref.slot) = ref.inverted ? apply_inverse(v, unary) : v;
    }
  }
  return map;
}

bool gate_association(const QualMap& map, const std::vector<TripleMeasurement>& candidate) {
  for (const auto& m : candidate) {
    const auto& [a, b, c] = m.ids;
    if (!map.has_node(a) || !map.has_node(b) || !map.has_node(c)) continue;
    if ((map.get_relation(a, b, c) & m.states).empty()) return false;
  }
  return true;
}

std::vector<LandmarkId> association_candidates(const QualMap& map, const std::vector<TripleMeasurement>& measurements,
                                               LandmarkId placeholder) {
  std::vector<LandmarkId> out;
  for (LandmarkId node : map.nodes()) {
    bool clash = false;
    std::vector<TripleMeasurement> substituted;
    for (TripleMeasurement m : measurements) {
      bool touches = false;
      for (LandmarkId& id : m.ids) {
        if (id == node) clash = true;
        if (id == placeholder) {
          id = node;
          touches = true;
        }
      }
      if (touches) substituted.push_back(m);
    }
    if (!clash && gate_association(map, substituted)) out.push_back(node);
  }
  return out;
}

}  // namespace qrm
