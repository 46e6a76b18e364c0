#pragma once

// Structural pattern labels for simple subgraphs. The general classifier
// counts internally vertex-disjoint entry->exit paths; the strict checks
// accept only the literal shapes (plain chain, equal-length chain branches).

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/subgraph_discovery.hpp"

namespace ofc {

enum class Kind { Sequence, Branching, Other };
enum class StrictMatch { SequenceStrict, TwoParty, MOfN };

constexpr std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Sequence: return "Sequence";
    case Kind::Branching: return "Branching";
    case Kind::Other: return "Other";
  }
  return "Unknown";
}

constexpr std::string_view strict_name(StrictMatch s) {
  switch (s) {
    case StrictMatch::SequenceStrict: return "SequenceStrict";
    case StrictMatch::TwoParty: return "TwoParty";
    case StrictMatch::MOfN: return "MOfN";
  }
  return "Unknown";
}

struct PatternKind {
  Kind kind = Kind::Other;
  std::uint32_t branch_count = 1;
  std::optional<std::uint32_t> quorum;
  std::optional<StrictMatch> strict_match;
  std::string note;
};

namespace detail {

inline void require_subset(const FsmModel& model, const NodeSet& nodes) {
  for (const auto& n : nodes)
    if (!model.find_state(n)) throw Error(ErrorCode::NotASubset, "unknown state id '" + n + "'");
}

// Induced transitions, in transition-id order.
inline std::vector<const Transition*> internal_transitions(const FsmModel& model,
                                                           const NodeSet& nodes) {
  std::vector<const Transition*> out;
  for (const auto& t : model.transitions)
    if (nodes.count(t.from) && nodes.count(t.to)) out.push_back(&t);
  std::sort(out.begin(), out.end(),
            [](const Transition* a, const Transition* b) { return a->id < b->id; });
  return out;
}

// Unit-capacity max flow on the node-split graph: every node other than
// source/sink becomes in->out with capacity 1.
inline int max_vertex_disjoint_paths(const std::vector<std::string>& nodes,
                                     const std::set<std::pair<std::string, std::string>>& edges,
                                     const std::string& source, const std::string& sink) {
  std::map<std::string, int> idx;
  for (const auto& n : nodes) idx.emplace(n, static_cast<int>(idx.size()));
  const int n = static_cast<int>(nodes.size());
  const int total = 2 * n;
  std::vector<std::vector<int>> cap(total, std::vector<int>(total, 0));
  auto in = [](int v) { return 2 * v; };
  auto out = [](int v) { return 2 * v + 1; };
  for (const auto& [name, v] : idx)
    cap[in(v)][out(v)] = (name == source || name == sink) ? n : 1;
  for (const auto& [u, v] : edges) cap[out(idx.at(u))][in(idx.at(v))] = 1;

  const int s = out(idx.at(source));
  const int t = in(idx.at(sink));
  int flow = 0;
  while (true) {
    std::vector<int> parent(total, -1);
    parent[s] = s;
    std::deque<int> q{s};
    while (!q.empty() && parent[t] < 0) {
      const int u = q.front();
      q.pop_front();
      for (int v = 0; v < total; ++v)
        if (parent[v] < 0 && cap[u][v] > 0) {
          parent[v] = u;
          q.push_back(v);
        }
    }
    if (parent[t] < 0) break;
    for (int v = t; v != s; v = parent[v]) {
      --cap[parent[v]][v];
      ++cap[v][parent[v]];
    }
    ++flow;
  }
  return flow;
}

inline std::set<std::string> reach(const std::string& from,
                                   const std::map<std::string, std::set<std::string>>& adj) {
  std::set<std::string> seen{from};
  std::deque<std::string> q{from};
  while (!q.empty()) {
    const auto cur = q.front();
    q.pop_front();
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& nxt : it->second)
      if (seen.insert(nxt).second) q.push_back(nxt);
  }
  return seen;
}

struct StrictBranches {
  NodeSet matched;
  std::uint32_t branches = 0;
};

inline std::optional<StrictBranches> strict_branches(const FsmModel& model, const NodeSet& nodes);

}  // namespace detail

// Start/end detection by a direct transition scan.
inline std::optional<Boundary> determine_start_end(const FsmModel& model, const NodeSet& nodes) {
  detail::require_subset(model, nodes);
  std::optional<std::string> start, end;
  for (const auto& v : nodes) {
    bool ext_in = false, other_pred = false, ext_out = false, other_succ = false;
    for (const auto& t : model.transitions) {
      if (t.to == v && t.from != v) {
        other_pred = true;
        if (!nodes.count(t.from)) ext_in = true;
      }
      if (t.from == v && t.to != v) {
        other_succ = true;
        if (!nodes.count(t.to)) ext_out = true;
      }
    }
    if (ext_in || v == model.initial_state || !other_pred) {
      if (start) return std::nullopt;
      start = v;
    }
    if (ext_out || !other_succ) {
      if (end) return std::nullopt;
      end = v;
    }
  }
  if (!start || !end || *start == *end) return std::nullopt;
  return Boundary{*start, *end};
}

inline bool strict_sequence(const FsmModel& model, const NodeSet& nodes) {
  detail::require_subset(model, nodes);
  if (nodes.size() < 2) return false;
  const auto ts = detail::internal_transitions(model, nodes);
  if (ts.size() != nodes.size() - 1) return false;
  std::map<std::string, int> indeg, outdeg;
  std::map<std::string, std::string> next;
  for (const auto* t : ts) {
    if (t->from == t->to) return false;
    ++outdeg[t->from];
    ++indeg[t->to];
    next[t->from] = t->to;
  }
  std::optional<std::string> head;
  for (const auto& v : nodes) {
    if (outdeg[v] > 1 || indeg[v] > 1) return false;
    if (indeg[v] == 0) {
      if (head) return false;
      head = v;
    }
  }
  if (!head) return false;
  std::size_t walked = 1;
  for (std::string cur = *head; next.count(cur); cur = next[cur]) ++walked;
  return walked == nodes.size();
}

namespace detail {

inline std::optional<StrictBranches> strict_branches(const FsmModel& model, const NodeSet& nodes) {
  auto bd = determine_start_end(model, nodes);
  if (!bd) return std::nullopt;
  const auto ts = internal_transitions(model, nodes);
  std::map<std::string, std::vector<const Transition*>> outs;
  std::map<std::string, int> indeg;
  for (const auto* t : ts) {
    outs[t->from].push_back(t);
    ++indeg[t->to];
  }
  if (indeg[bd->entry] != 0 || !outs[bd->exit].empty()) return std::nullopt;

  std::set<std::string> covered{bd->entry, bd->exit};
  std::optional<std::size_t> length;
  std::uint32_t branches = 0;
  for (const auto* first : outs[bd->entry]) {
    std::size_t len = 0;
    std::string cur = first->to;
    while (cur != bd->exit) {
      if (indeg[cur] != 1 || outs[cur].size() != 1) return std::nullopt;
      if (!covered.insert(cur).second) return std::nullopt;
      ++len;
      cur = outs[cur].front()->to;
    }
    if (length && *length != len) return std::nullopt;
    length = len;
    ++branches;
  }
  if (covered.size() != nodes.size()) return std::nullopt;
  return StrictBranches{nodes, branches};
}

}  // namespace detail

// Literal M-of-N acceptance: N >= 2 equal-length chain branches from the
// start node to the end node, N >= quorum. Two branches is the two-party case.
inline std::optional<NodeSet> strict_m_of_n(const FsmModel& model, const NodeSet& nodes,
                                            std::uint32_t quorum) {
  detail::require_subset(model, nodes);
  if (quorum == 0) throw Error(ErrorCode::InvalidConfig, "quorum must be positive");
  auto b = detail::strict_branches(model, nodes);
  if (!b || b->branches < 2 || b->branches < quorum) return std::nullopt;
  return b->matched;
}

inline std::uint32_t branch_count(const FsmModel& model, const SimpleSubgraph& sg) {
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto* t : detail::internal_transitions(model, sg.nodes))
    if (t->from != t->to) edges.insert({t->from, t->to});
  return static_cast<std::uint32_t>(detail::max_vertex_disjoint_paths(
      std::vector<std::string>(sg.nodes.begin(), sg.nodes.end()), edges, sg.entry, sg.exit));
}

inline PatternKind classify_pattern(const FsmModel& model, const SimpleSubgraph& sg) {
  detail::require_subset(model, sg.nodes);
  PatternKind pk;
  const auto ts = detail::internal_transitions(model, sg.nodes);

  std::map<std::string, std::set<std::string>> fwd, bwd;
  bool self_loop = false;
  for (const auto* t : ts) {
    if (t->from == t->to) {
      self_loop = true;
      continue;
    }
    fwd[t->from].insert(t->to);
    bwd[t->to].insert(t->from);
  }

  bool cyclic = self_loop;
  if (!cyclic) {
    std::map<std::string, int> indeg;
    for (const auto& v : sg.nodes) indeg[v] = 0;
    for (const auto& [u, vs] : fwd)
      for (const auto& v : vs) ++indeg[v];
    std::deque<std::string> q;
    for (const auto& [v, d] : indeg)
      if (d == 0) q.push_back(v);
    std::size_t popped = 0;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop_front();
      ++popped;
      auto it = fwd.find(v);
      if (it == fwd.end()) continue;
      for (const auto& w : it->second)
        if (--indeg[w] == 0) q.push_back(w);
    }
    cyclic = popped != sg.nodes.size();
  }

  const auto from_entry = detail::reach(sg.entry, fwd);
  const auto to_exit = detail::reach(sg.exit, bwd);
  const bool all_on_paths = std::all_of(sg.nodes.begin(), sg.nodes.end(), [&](const auto& v) {
    return from_entry.count(v) && to_exit.count(v);
  });

  const std::uint32_t k = branch_count(model, sg);
  pk.branch_count = std::max<std::uint32_t>(k, 1);
  if (cyclic) {
    pk.kind = Kind::Other;
    pk.note = "internal cycle";
  } else if (!all_on_paths) {
    pk.kind = Kind::Other;
    pk.note = "node off every entry-exit path";
  } else if (k >= 2) {
    pk.kind = Kind::Branching;
  } else {
    std::size_t edge_count = 0;
    for (const auto& [u, vs] : fwd) edge_count += vs.size();
    const bool chain = edge_count + 1 == sg.nodes.size() &&
                       std::all_of(fwd.begin(), fwd.end(), [](const auto& e) { return e.second.size() == 1; });
    pk.kind = chain ? Kind::Sequence : Kind::Other;
    pk.branch_count = 1;
    if (!chain) pk.note = "single cut path with side structure";
  }

  // Merge transitions into the exit carry the quorum annotation; fall back to
  // the exit's outgoing transitions.
  std::optional<std::uint32_t> quorum;
  for (const auto* t : ts)
    if (t->to == sg.exit && t->quorum) {
      quorum = t->quorum;
      break;
    }
  if (!quorum) {
    std::vector<const Transition*> outs;
    for (const auto& t : model.transitions)
      if (t.from == sg.exit && t.quorum) outs.push_back(&t);
    std::sort(outs.begin(), outs.end(),
              [](const Transition* a, const Transition* b) { return a->id < b->id; });
    if (!outs.empty()) quorum = outs.front()->quorum;
  }
  if (quorum) {
    if (pk.kind != Kind::Other && *quorum <= pk.branch_count) {
      pk.quorum = quorum;
    } else {
      if (!pk.note.empty()) pk.note += "; ";
      pk.note += "quorum " + std::to_string(*quorum) + " ignored (branch count " +
                 std::to_string(pk.branch_count) + ")";
    }
  }

  if (pk.kind == Kind::Sequence && strict_sequence(model, sg.nodes)) {
    pk.strict_match = StrictMatch::SequenceStrict;
  } else if (pk.kind == Kind::Branching) {
    auto b = detail::strict_branches(model, sg.nodes);
    if (b && b->branches >= 2 && b->branches >= pk.quorum.value_or(1))
      pk.strict_match = b->branches == 2 ? StrictMatch::TwoParty : StrictMatch::MOfN;
  }
  return pk;
}

inline nlohmann::ordered_json pattern_to_json(const std::string& subgraph_id, const PatternKind& pk) {
  nlohmann::ordered_json o;
  o["subgraph"] = subgraph_id;
  o["kind"] = kind_name(pk.kind);
  o["branch_count"] = pk.branch_count;
  o["quorum"] = pk.quorum ? nlohmann::ordered_json(*pk.quorum) : nlohmann::ordered_json(nullptr);
  o["strict_match"] = pk.strict_match ? nlohmann::ordered_json(strict_name(*pk.strict_match))
                                      : nlohmann::ordered_json(nullptr);
  if (!pk.note.empty()) o["note"] = pk.note;
  return o;
}

}  // namespace ofc
