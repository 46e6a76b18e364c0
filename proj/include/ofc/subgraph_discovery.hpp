#pragma once

// Brute-force discovery of single-entry/single-exit regions ("simple
// subgraphs"), containment counts, ranking, and pairwise relation checks.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/graph_index.hpp"

namespace ofc {

constexpr int kDefaultEnumerationCap = 16;

struct SimpleSubgraph {
  std::string id;  // "S<rank>", assigned after ranking
  NodeSet nodes;
  std::string entry;
  std::string exit;
  std::uint64_t count = 0;
  bool whole_graph = false;

  bool operator==(const SimpleSubgraph&) const = default;
};

enum class RelationKind { Disjoint, Nested, BoundaryShared, OverlapSimple, TheoremViolation };

constexpr std::string_view relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Disjoint: return "Disjoint";
    case RelationKind::Nested: return "Nested";
    case RelationKind::BoundaryShared: return "BoundaryShared";
    case RelationKind::OverlapSimple: return "OverlapSimple";
    case RelationKind::TheoremViolation: return "TheoremViolation";
  }
  return "Unknown";
}

struct PairRelation {
  RelationKind kind = RelationKind::Disjoint;
  NodeSet shared;
  std::string detail;
};

struct Boundary {
  std::string entry;
  std::string exit;

  bool operator==(const Boundary&) const = default;
};

namespace detail {

inline void check_cap(const GraphIndex& g, int cap) {
  if (g.size() > cap)
    throw Error(ErrorCode::TooLarge, "model has " + std::to_string(g.size()) +
                                         " states; enumeration cap is " + std::to_string(cap));
}

// Core predicate over masks. Returns (entry, exit) bit positions.
inline std::optional<std::pair<int, int>> simple_boundary(const GraphIndex& g, Mask c) {
  if (std::popcount(c) < 2) return std::nullopt;
  const Mask outside = g.all() & ~c;
  int entry = -1, exit = -1;
  for (Mask m = c; m; m &= m - 1) {
    const int v = std::countr_zero(m);
    const bool entered = (g.pred(v) & outside) || v == g.initial() || g.pred(v) == 0;
    const bool exited = (g.succ(v) & outside) || g.succ(v) == 0;
    if (entered) {
      if (entry >= 0) return std::nullopt;
      entry = v;
    }
    if (exited) {
      if (exit >= 0) return std::nullopt;
      exit = v;
    }
  }
  if (entry < 0 || exit < 0 || entry == exit) return std::nullopt;
  if (!g.weakly_connected(c)) return std::nullopt;
  return std::make_pair(entry, exit);
}

}  // namespace detail

// Every subset of the state set with size 2..|S|, in increasing mask order.
inline std::vector<NodeSet> enumerate_subsets(const FsmModel& model,
                                              int cap = kDefaultEnumerationCap) {
  const GraphIndex g(model);
  detail::check_cap(g, cap);
  std::vector<NodeSet> out;
  for (Mask m = 1; m <= g.all() && m != 0; ++m)
    if (std::popcount(m) >= 2) out.push_back(g.nodes_of(m));
  return out;
}

inline std::optional<Boundary> is_simple_subgraph(const FsmModel& model, const NodeSet& candidate) {
  const GraphIndex g(model);
  const Mask c = g.mask_of(candidate);
  auto b = detail::simple_boundary(g, c);
  if (!b) return std::nullopt;
  return Boundary{g.id(b->first), g.id(b->second)};
}

inline bool is_proper_subgraph(const NodeSet& inner, const NodeSet& outer) {
  return inner.size() < outer.size() &&
         std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

// Ranking: count desc, size desc, then sorted id vector ascending.
inline bool ranks_before(const SimpleSubgraph& a, const SimpleSubgraph& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
  return std::lexicographical_compare(a.nodes.begin(), a.nodes.end(), b.nodes.begin(),
                                      b.nodes.end());
}

inline std::vector<SimpleSubgraph> find_simple_subgraphs(const FsmModel& model,
                                                         int cap = kDefaultEnumerationCap) {
  require_valid(model);
  const GraphIndex g(model);
  detail::check_cap(g, cap);

  struct Found {
    Mask mask;
    int entry, exit;
  };
  std::vector<Found> found;
  for (Mask m = 1; m <= g.all() && m != 0; ++m) {
    if (std::popcount(m) < 2) continue;
    if (auto b = detail::simple_boundary(g, m)) found.push_back({m, b->first, b->second});
  }

  std::vector<SimpleSubgraph> out;
  out.reserve(found.size());
  for (const auto& f : found) {
    SimpleSubgraph sg;
    sg.nodes = g.nodes_of(f.mask);
    sg.entry = g.id(f.entry);
    sg.exit = g.id(f.exit);
    sg.whole_graph = f.mask == g.all();
    for (const auto& other : found)
      if (other.mask != f.mask && (other.mask & f.mask) == other.mask) ++sg.count;
    out.push_back(std::move(sg));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = "S" + std::to_string(i + 1);
  return out;
}

inline PairRelation classify_relation(const FsmModel& model, const SimpleSubgraph& a,
                                      const SimpleSubgraph& b) {
  PairRelation r;
  std::set_intersection(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                        std::inserter(r.shared, r.shared.end()));
  if (r.shared.empty()) {
    r.kind = RelationKind::Disjoint;
    return r;
  }
  if (r.shared.size() == a.nodes.size() || r.shared.size() == b.nodes.size()) {
    r.kind = RelationKind::Nested;
    if (a.nodes == b.nodes) r.detail = "identical node sets";
    return r;
  }
  if (r.shared.size() == 1) {
    const std::string& s = *r.shared.begin();
    if ((s == a.exit && s == b.entry) || (s == b.exit && s == a.entry)) {
      r.kind = RelationKind::BoundaryShared;
      r.detail = "shared node " + s + " is exit of one and entry of the other";
    } else {
      r.kind = RelationKind::TheoremViolation;
      r.detail = "single shared node " + s + " is not exit-of-one/entry-of-other";
    }
    return r;
  }
  if (auto bd = is_simple_subgraph(model, r.shared)) {
    r.kind = RelationKind::OverlapSimple;
    const bool holds_all = r.shared.count(a.entry) && r.shared.count(a.exit) &&
                           r.shared.count(b.entry) && r.shared.count(b.exit);
    r.detail = "intersection is simple (entry " + bd->entry + ", exit " + bd->exit + ")" +
               (holds_all ? "; contains both boundary pairs"
                          : "; does not contain both boundary pairs");
  } else {
    r.kind = RelationKind::TheoremViolation;
    r.detail = "intersection of size " + std::to_string(r.shared.size()) +
               " is not a simple subgraph";
  }
  return r;
}

struct RelationRow {
  std::string a;
  std::string b;
  PairRelation relation;
};

inline std::vector<RelationRow> all_relations(const FsmModel& model,
                                              const std::vector<SimpleSubgraph>& sgs) {
  std::vector<RelationRow> rows;
  for (std::size_t i = 0; i < sgs.size(); ++i)
    for (std::size_t j = i + 1; j < sgs.size(); ++j)
      rows.push_back({sgs[i].id, sgs[j].id, classify_relation(model, sgs[i], sgs[j])});
  return rows;
}

inline nlohmann::ordered_json subgraph_to_json(const SimpleSubgraph& sg) {
  nlohmann::ordered_json o;
  o["id"] = sg.id;
  o["nodes"] = std::vector<std::string>(sg.nodes.begin(), sg.nodes.end());
  o["entry"] = sg.entry;
  o["exit"] = sg.exit;
  o["count"] = sg.count;
  o["whole_graph"] = sg.whole_graph;
  return o;
}

inline nlohmann::ordered_json subgraphs_to_json(const std::vector<SimpleSubgraph>& sgs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& sg : sgs) arr.push_back(subgraph_to_json(sg));
  return arr;
}

inline nlohmann::ordered_json relations_to_json(const std::vector<RelationRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json o;
    o["a"] = row.a;
    o["b"] = row.b;
    o["kind"] = relation_name(row.relation.kind);
    o["shared"] = std::vector<std::string>(row.relation.shared.begin(), row.relation.shared.end());
    o["detail"] = row.relation.detail;
    arr.push_back(o);
  }
  return arr;
}

}  // namespace ofc
