#pragma once

// Hierarchical models: accepted simple subgraphs collapse into a single
// hierarchical state whose nested machine keeps the original ids, so
// flattening restores the original graph exactly.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/sha256.hpp"
#include "ofc/subgraph_discovery.hpp"

namespace ofc {

struct Mapping {
  FsmModel machine;
  std::string entry;  // machine-level ids; may themselves be hierarchical
  std::string exit;
  // Boundary states copied in from a sibling machine that owns them.
  NodeSet shared;

  bool operator==(const Mapping&) const = default;
};

// Control passes between two sibling hierarchical nodes through a shared
// boundary state; no top-level transition carries it.
struct Handoff {
  std::string from;
  std::string to;

  bool operator==(const Handoff&) const = default;
  auto operator<=>(const Handoff&) const = default;
};

struct HsmModel {
  FsmModel top;
  std::map<std::string, Mapping> mappings;
  std::vector<Handoff> handoffs;

  bool is_hierarchical(const std::string& id) const { return mappings.count(id) > 0; }

  const Mapping& mapping(const std::string& id) const {
    auto it = mappings.find(id);
    if (it == mappings.end())
      throw Error(ErrorCode::BrokenMapping, "hierarchical state '" + id + "' has no mapping");
    return it->second;
  }
};

inline HsmModel as_hsm(const FsmModel& model) { return HsmModel{model, {}, {}}; }

inline std::string hierarchical_id(const NodeSet& nodes, const std::string& entry,
                                   const std::string& exit) {
  std::string joined;
  for (const auto& n : nodes) {
    if (!joined.empty()) joined += '\n';
    joined += n;
  }
  std::string id = "hsm_" + entry + "_" + exit + "_" + sha256_hex(joined).substr(0, 8);
  for (char& c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) c = '_';
  return id;
}

namespace detail {

inline std::string resolve(const HsmModel& h, std::string id, bool entry) {
  for (std::size_t depth = 0; h.is_hierarchical(id); ++depth) {
    if (depth > h.mappings.size())
      throw Error(ErrorCode::BrokenMapping, "mapping cycle through '" + id + "'");
    const Mapping& m = h.mapping(id);
    id = entry ? m.entry : m.exit;
  }
  return id;
}

inline void collect_states(const HsmModel& h, const FsmModel& machine, const NodeSet& skip,
                           std::vector<std::string>& stack, std::vector<StateNode>& out) {
  for (const auto& s : machine.states) {
    if (skip.count(s.id)) continue;
    if (!s.hierarchical && !h.is_hierarchical(s.id)) {
      out.push_back(s);
      continue;
    }
    if (std::find(stack.begin(), stack.end(), s.id) != stack.end())
      throw Error(ErrorCode::BrokenMapping, "mapping cycle through '" + s.id + "'");
    const Mapping& m = h.mapping(s.id);
    stack.push_back(s.id);
    collect_states(h, m.machine, m.shared, stack, out);
    stack.pop_back();
  }
}

inline void collect_transitions(const HsmModel& h, const FsmModel& machine,
                                std::vector<std::string>& stack, std::vector<Transition>& out) {
  for (const auto& t : machine.transitions) out.push_back(t);
  for (const auto& s : machine.states) {
    if (!h.is_hierarchical(s.id)) continue;
    if (std::find(stack.begin(), stack.end(), s.id) != stack.end())
      throw Error(ErrorCode::BrokenMapping, "mapping cycle through '" + s.id + "'");
    stack.push_back(s.id);
    collect_transitions(h, h.mapping(s.id).machine, stack, out);
    stack.pop_back();
  }
}

}  // namespace detail

inline std::string resolve_entry(const HsmModel& h, const std::string& id) {
  return detail::resolve(h, id, true);
}
inline std::string resolve_exit(const HsmModel& h, const std::string& id) {
  return detail::resolve(h, id, false);
}

// Original (flat) states owned by a hierarchical node, shared copies excluded.
inline NodeSet region_nodes(const HsmModel& h, const std::string& id) {
  std::vector<StateNode> states;
  std::vector<std::string> stack{id};
  const Mapping& m = h.mapping(id);
  detail::collect_states(h, m.machine, m.shared, stack, states);
  NodeSet out;
  for (const auto& s : states) out.insert(s.id);
  return out;
}

inline FsmModel flatten(const HsmModel& h) {
  FsmModel out;
  std::vector<std::string> stack;
  detail::collect_states(h, h.top, {}, stack, out.states);
  detail::collect_transitions(h, h.top, stack, out.transitions);
  for (auto& t : out.transitions) {
    t.from = resolve_exit(h, t.from);
    t.to = resolve_entry(h, t.to);
  }
  out.initial_state = resolve_entry(h, h.top.initial_state);
  return out.canonical();
}

// Top-level owner of every original state.
inline std::map<std::string, std::string> owners(const HsmModel& h) {
  std::map<std::string, std::string> out;
  for (const auto& s : h.top.states) {
    if (h.is_hierarchical(s.id)) {
      for (const auto& n : region_nodes(h, s.id)) out[n] = s.id;
    } else {
      out[s.id] = s.id;
    }
  }
  return out;
}

inline bool equivalent(const FsmModel& a, const FsmModel& b) {
  if (a.state_ids() != b.state_ids() || a.initial_state != b.initial_state) return false;
  auto edges = [](const FsmModel& m) {
    std::vector<std::tuple<std::string, std::string, std::string>> e;
    for (const auto& t : m.transitions) e.emplace_back(t.from, t.to, t.method_name);
    std::sort(e.begin(), e.end());
    return e;
  };
  return edges(a) == edges(b);
}

namespace detail {

inline void check_candidate(const FsmModel& flat, const SimpleSubgraph& sg) {
  for (const auto& n : sg.nodes)
    if (!flat.find_state(n)) throw Error(ErrorCode::NotFound, "subgraph state '" + n + "' not in model");
  auto bd = is_simple_subgraph(flat, sg.nodes);
  if (!bd || bd->entry != sg.entry || bd->exit != sg.exit)
    throw Error(ErrorCode::NotFound, "node set is not a simple subgraph with the given entry/exit");
}

inline StateNode hierarchical_state(const std::string& id, const std::string& entry,
                                    const std::string& exit, const std::vector<StateNode>& members) {
  StateNode h;
  h.id = id;
  h.label = "hierarchical " + entry + ".." + exit;
  h.hierarchical = true;
  for (const auto& m : members) h.actors.insert(m.actors.begin(), m.actors.end());
  return h;
}

}  // namespace detail

// Collapses the whole model into one hierarchical state.
inline HsmModel wrap_whole(const HsmModel& h, const SimpleSubgraph& sg) {
  const FsmModel flat = flatten(h);
  detail::check_candidate(flat, sg);
  if (sg.nodes != flat.state_ids())
    throw Error(ErrorCode::NotFound, "wrap_whole needs the whole-graph subgraph");
  const auto own = owners(h);
  HsmModel out = h;
  const std::string id = hierarchical_id(sg.nodes, sg.entry, sg.exit);
  Mapping m{h.top, own.at(sg.entry), own.at(sg.exit), {}};
  out.top = FsmModel{};
  out.top.states.push_back(detail::hierarchical_state(id, sg.entry, sg.exit, h.top.states));
  out.top.initial_state = id;
  out.mappings[id] = std::move(m);
  return out;
}

// Folds an accepted subgraph (over original ids) into an existing HSM.
inline HsmModel replace_with_hsm(const HsmModel& h, const SimpleSubgraph& sg) {
  const FsmModel flat = flatten(h);
  detail::check_candidate(flat, sg);
  if (sg.nodes == flat.state_ids())
    throw Error(ErrorCode::WholeGraph, "subgraph covers every state; use the whole-graph path");

  const auto own = owners(h);
  std::map<std::string, NodeSet> by_owner;
  for (const auto& n : sg.nodes) by_owner[own.at(n)].insert(n);

  NodeSet lifted;
  std::string shared_entry_owner, shared_exit_owner;
  for (const auto& [owner, inside] : by_owner) {
    if (!h.is_hierarchical(owner) || inside == region_nodes(h, owner)) {
      lifted.insert(owner);
      continue;
    }
    const std::string& s = *inside.begin();
    if (inside.size() == 1 && s == sg.entry && s == resolve_exit(h, owner)) {
      shared_entry_owner = owner;
    } else if (inside.size() == 1 && s == sg.exit && s == resolve_entry(h, owner)) {
      shared_exit_owner = owner;
    } else {
      throw Error(ErrorCode::OverlapConflict,
                  "subgraph cuts through hierarchical state '" + owner + "'");
    }
  }

  const std::string id = hierarchical_id(sg.nodes, sg.entry, sg.exit);
  if (h.is_hierarchical(id) || h.top.find_state(id))
    throw Error(ErrorCode::AlreadyDecided, "subgraph already collapsed as '" + id + "'");

  Mapping m;
  m.entry = shared_entry_owner.empty() ? own.at(sg.entry) : sg.entry;
  m.exit = shared_exit_owner.empty() ? own.at(sg.exit) : sg.exit;
  std::vector<StateNode> members;
  for (const auto& s : h.top.states)
    if (lifted.count(s.id)) members.push_back(s);
  m.machine.states = members;
  for (const auto* shared : {&sg.entry, &sg.exit}) {
    if ((shared == &sg.entry && shared_entry_owner.empty()) ||
        (shared == &sg.exit && shared_exit_owner.empty()))
      continue;
    m.machine.states.push_back(*flat.find_state(*shared));
    m.shared.insert(*shared);
  }
  m.machine.initial_state = m.entry;

  HsmModel out;
  out.mappings = h.mappings;
  out.top.initial_state = lifted.count(h.top.initial_state) ? id : h.top.initial_state;
  for (const auto& s : h.top.states)
    if (!lifted.count(s.id)) out.top.states.push_back(s);
  out.top.states.push_back(detail::hierarchical_state(id, sg.entry, sg.exit, m.machine.states));

  for (auto t : h.top.transitions) {
    const bool from_in = lifted.count(t.from) > 0;
    const bool to_in = lifted.count(t.to) > 0;
    if (from_in && to_in) {
      m.machine.transitions.push_back(t);
    } else if (to_in && !shared_entry_owner.empty() && t.from == shared_entry_owner) {
      t.from = sg.entry;
      m.machine.transitions.push_back(t);
    } else if (from_in && !shared_exit_owner.empty() && t.to == shared_exit_owner) {
      t.to = sg.exit;
      m.machine.transitions.push_back(t);
    } else {
      if (from_in) t.from = id;
      if (to_in) t.to = id;
      out.top.transitions.push_back(t);
    }
  }

  for (auto hf : h.handoffs) {
    const bool from_in = lifted.count(hf.from) > 0;
    const bool to_in = lifted.count(hf.to) > 0;
    if (from_in && to_in) continue;
    if (from_in) hf.from = id;
    if (to_in) hf.to = id;
    out.handoffs.push_back(hf);
  }
  if (!shared_entry_owner.empty()) out.handoffs.push_back({shared_entry_owner, id});
  if (!shared_exit_owner.empty()) out.handoffs.push_back({id, shared_exit_owner});
  std::sort(out.handoffs.begin(), out.handoffs.end());

  out.mappings[id] = std::move(m);
  return out;
}

inline HsmModel replace_with_hsm(const FsmModel& model, const SimpleSubgraph& sg) {
  return replace_with_hsm(as_hsm(model), sg);
}

// Top-level hierarchical states, in id order.
inline std::vector<std::string> top_hierarchical(const HsmModel& h) {
  std::vector<std::string> out;
  for (const auto& s : h.top.states)
    if (h.is_hierarchical(s.id) || s.hierarchical) out.push_back(s.id);
  std::sort(out.begin(), out.end());
  return out;
}

inline nlohmann::ordered_json hsm_to_json(const HsmModel& h) {
  nlohmann::ordered_json doc = model_to_json(h.top);
  doc["mappings"] = nlohmann::ordered_json::array();
  for (const auto& [id, m] : h.mappings) {
    nlohmann::ordered_json o;
    o["id"] = id;
    o["entry"] = m.entry;
    o["exit"] = m.exit;
    o["shared"] = std::vector<std::string>(m.shared.begin(), m.shared.end());
    o["model"] = model_to_json(m.machine);
    doc["mappings"].push_back(o);
  }
  doc["handoffs"] = nlohmann::ordered_json::array();
  for (const auto& hf : h.handoffs) doc["handoffs"].push_back({{"from", hf.from}, {"to", hf.to}});
  return doc;
}

inline std::string serialize_hsm(const HsmModel& h) { return hsm_to_json(h).dump(2) + "\n"; }

inline HsmModel parse_hsm(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError,
                "malformed document at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  HsmModel h;
  h.top = model_from_json(doc, "hsm");
  if (auto it = doc.find("mappings"); it != doc.end()) {
    if (!it->is_array()) detail::syntax("hsm", "'mappings' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& j = (*it)[i];
      const std::string where = "hsm.mappings[" + std::to_string(i) + "]";
      if (!j.is_object()) detail::syntax(where, "mapping must be an object");
      Mapping m;
      m.entry = detail::string_field(j, "entry", where);
      m.exit = detail::string_field(j, "exit", where);
      if (auto sh = j.find("shared"); sh != j.end()) {
        if (!sh->is_array()) detail::syntax(where, "'shared' must be an array");
        for (const auto& s : *sh) {
          if (!s.is_string()) detail::syntax(where, "shared ids must be strings");
          m.shared.insert(s.get<std::string>());
        }
      }
      m.machine = model_from_json(detail::field(j, "model", where), where + ".model");
      const std::string id = detail::string_field(j, "id", where);
      if (!h.mappings.emplace(id, std::move(m)).second)
        throw Error(ErrorCode::DuplicateId, "duplicate mapping id '" + id + "'");
    }
  }
  if (auto it = doc.find("handoffs"); it != doc.end()) {
    if (!it->is_array()) detail::syntax("hsm", "'handoffs' must be an array");
    for (const auto& j : *it) {
      if (!j.is_object()) detail::syntax("hsm.handoffs", "handoff must be an object");
      h.handoffs.push_back(
          {detail::string_field(j, "from", "hsm.handoffs"), detail::string_field(j, "to", "hsm.handoffs")});
    }
  }
  return h;
}

// Structural checks: every hierarchical state mapped, no mapping cycles, and
// the flattened model valid.
inline void require_valid_hsm(const HsmModel& h) {
  for (const auto& [id, m] : h.mappings) {
    (void)m;
    resolve_entry(h, id);
    resolve_exit(h, id);
  }
  const FsmModel flat = flatten(h);
  for (const auto& s : flat.states)
    if (s.hierarchical)
      throw Error(ErrorCode::BrokenMapping, "hierarchical state '" + s.id + "' has no mapping");
  require_valid(flat);
}

}  // namespace ofc
