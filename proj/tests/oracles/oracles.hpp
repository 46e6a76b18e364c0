#pragma once

// Independent reference implementations used by the test suites. Nothing
// here shares code with the library beyond the plain data types.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ofc/fsm_model.hpp"

namespace oracle {

using ofc::FsmModel;
using ofc::NodeSet;

struct Bounds {
  std::string entry;
  std::string exit;
  bool operator==(const Bounds&) const = default;
};

// Union-find over state ids.
class Dsu {
 public:
  std::string find(const std::string& x) {
    auto it = parent_.find(x);
    if (it == parent_.end()) return parent_[x] = x;
    if (it->second == x) return x;
    return it->second = find(it->second);
  }
  void unite(const std::string& a, const std::string& b) { parent_[find(a)] = find(b); }

 private:
  std::map<std::string, std::string> parent_;
};

// Direct reading of the region definition: scan every transition for each
// member, then check connectivity with union-find.
inline std::optional<Bounds> simple(const FsmModel& m, const NodeSet& c) {
  if (c.size() < 2) return std::nullopt;
  std::vector<std::string> entries, exits;
  for (const auto& v : c) {
    bool in_from_outside = false, any_pred = false, out_to_outside = false, any_succ = false;
    for (const auto& t : m.transitions) {
      if (t.to == v && t.from != v) {
        any_pred = true;
        in_from_outside |= c.count(t.from) == 0;
      }
      if (t.from == v && t.to != v) {
        any_succ = true;
        out_to_outside |= c.count(t.to) == 0;
      }
    }
    if (in_from_outside || v == m.initial_state || !any_pred) entries.push_back(v);
    if (out_to_outside || !any_succ) exits.push_back(v);
  }
  if (entries.size() != 1 || exits.size() != 1 || entries[0] == exits[0]) return std::nullopt;
  Dsu d;
  for (const auto& t : m.transitions)
    if (c.count(t.from) && c.count(t.to)) d.unite(t.from, t.to);
  const std::string root = d.find(*c.begin());
  for (const auto& v : c)
    if (d.find(v) != root) return std::nullopt;
  return Bounds{entries[0], exits[0]};
}

struct Region {
  NodeSet nodes;
  Bounds bounds;
  std::uint64_t count = 0;
};

inline std::vector<NodeSet> all_subsets(const FsmModel& m) {
  std::vector<std::string> ids;
  for (const auto& s : m.states) ids.push_back(s.id);
  std::vector<NodeSet> out;
  const std::size_t n = ids.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    NodeSet s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s.insert(ids[i]);
    if (s.size() >= 2) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Region> all_regions(const FsmModel& m) {
  std::vector<Region> out;
  for (const auto& s : all_subsets(m))
    if (auto b = simple(m, s)) out.push_back({s, *b, 0});
  for (auto& r : out)
    for (const auto& o : out)
      if (o.nodes.size() < r.nodes.size() &&
          std::includes(r.nodes.begin(), r.nodes.end(), o.nodes.begin(), o.nodes.end()))
        ++r.count;
  return out;
}

// Reachable set by plain breadth-first search.
inline NodeSet reachable(const FsmModel& m) {
  NodeSet seen;
  if (!m.find_state(m.initial_state)) return seen;
  seen.insert(m.initial_state);
  std::deque<std::string> q{m.initial_state};
  while (!q.empty()) {
    const std::string v = q.front();
    q.pop_front();
    for (const auto& t : m.transitions)
      if (t.from == v && m.find_state(t.to) && seen.insert(t.to).second) q.push_back(t.to);
  }
  return seen;
}

// Maximum number of internally disjoint entry->exit paths, by enumerating
// every simple path and searching for the largest pairwise-disjoint family.
inline int disjoint_paths(const FsmModel& m, const NodeSet& nodes, const std::string& from,
                          const std::string& to) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& t : m.transitions)
    if (nodes.count(t.from) && nodes.count(t.to) && t.from != t.to) adj[t.from].insert(t.to);
  std::vector<NodeSet> interiors;
  std::vector<std::string> path{from};
  NodeSet on_path{from};
  std::function<void(const std::string&)> dfs = [&](const std::string& v) {
    for (const auto& w : adj[v]) {
      if (w == to) {
        interiors.push_back(NodeSet(path.begin() + 1, path.end()));
        continue;
      }
      if (on_path.count(w)) continue;
      path.push_back(w);
      on_path.insert(w);
      dfs(w);
      on_path.erase(w);
      path.pop_back();
    }
  };
  dfs(from);
  // A direct edge has an empty interior and is compatible with everything,
  // but a multigraph edge counts once (adjacency is a set).
  int best = 0;
  std::function<void(std::size_t, int, NodeSet&)> pick = [&](std::size_t i, int taken, NodeSet& used) {
    if (taken + static_cast<int>(interiors.size() - i) <= best) return;
    if (i == interiors.size()) {
      best = std::max(best, taken);
      return;
    }
    const NodeSet& p = interiors[i];
    const bool free = std::none_of(p.begin(), p.end(), [&](const auto& x) { return used.count(x) > 0; });
    if (free) {
      used.insert(p.begin(), p.end());
      pick(i + 1, taken + 1, used);
      for (const auto& x : p) used.erase(x);
    }
    pick(i + 1, taken, used);
  };
  NodeSet used;
  pick(0, 0, used);
  return best;
}

struct GenOptions {
  int min_states = 4;
  int max_states = 8;
  bool acyclic = false;
  double extra_edge_factor = 1.0;
};

// Random reachable model: a random spanning arborescence from the initial
// state plus extra edges (self-loops and parallel edges included unless
// acyclic). State ids are shuffled letters so id order and topology differ.
inline FsmModel random_model(std::mt19937_64& rng, const GenOptions& o = {}) {
  std::uniform_int_distribution<int> size_dist(o.min_states, o.max_states);
  const int n = size_dist(rng);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)) + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  FsmModel m;
  for (int i = 0; i < n; ++i) {
    ofc::StateNode s;
    s.id = ids[i];
    s.label = "state " + ids[i];
    s.reads_words = rng() % 3;
    s.writes_words = rng() % 3;
    s.actors = {"actor" + std::to_string(rng() % 3)};
    m.states.push_back(s);
  }
  m.initial_state = ids[0];
  int tid = 0;
  auto add = [&](int f, int t) {
    ofc::Transition tr;
    tr.id = "t" + std::to_string(tid++);
    tr.from = ids[f];
    tr.to = ids[t];
    tr.method_name = "m" + std::to_string(rng() % 5);
    tr.actor = "actor" + std::to_string(rng() % 3);
    m.transitions.push_back(tr);
  };
  for (int i = 1; i < n; ++i) add(static_cast<int>(rng() % i), i);
  std::uniform_int_distribution<int> extra_dist(0, static_cast<int>(n * o.extra_edge_factor));
  const int extra = extra_dist(rng);
  for (int k = 0; k < extra; ++k) {
    int f = static_cast<int>(rng() % n), t = static_cast<int>(rng() % n);
    if (o.acyclic) {
      if (f == t) continue;
      if (f > t) std::swap(f, t);
    }
    add(f, t);
  }
  return m;
}

inline std::string describe(const FsmModel& m) {
  std::string s = "initial=" + m.initial_state + " edges:";
  for (const auto& t : m.transitions) s += " " + t.from + "->" + t.to;
  return s;
}

}  // namespace oracle
