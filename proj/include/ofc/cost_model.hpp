#pragma once

// Gas estimates for running a simple subgraph on-chain versus off-chain.
// Everything is exact integer arithmetic in gas units.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/subgraph_discovery.hpp"

namespace ofc {

using Gas = std::int64_t;

struct GasTable {
  Gas sload = 200;
  Gas sstore = 20000;
  Gas memop = 3;    // MLOAD / MSTORE / CALLDATACOPY, per word
  Gas stackop = 3;  // PUSH / DUP / SWAP
  Gas pop = 2;
  Gas jump = 10;

  bool operator==(const GasTable&) const = default;
};

struct StateData {
  Words reads = 0;
  Words writes = 0;

  bool operator==(const StateData&) const = default;
};

struct DataProfile {
  std::map<std::string, StateData> states;
  // Words marshaled across the interface; unset means max state size.
  std::optional<Words> boundary_words;
  NodeSet midpattern;
  std::map<std::string, std::uint64_t> frequency;  // absent = 1

  StateData at(const std::string& id) const {
    auto it = states.find(id);
    return it == states.end() ? StateData{} : it->second;
  }
  std::uint64_t times(const std::string& id) const {
    auto it = frequency.find(id);
    return it == frequency.end() ? 1 : it->second;
  }
};

struct CostBreakdown {
  Gas boundary_on_chain = 0;
  Gas interface_overhead = 0;
  Gas extra_offchain_access = 0;

  bool operator==(const CostBreakdown&) const = default;
};

struct CostComparison {
  Gas on_chain_only = 0;
  Gas off_chain_total = 0;
  CostBreakdown breakdown;
  Gas saving = 0;
  bool recommend_offchain = false;

  bool operator==(const CostComparison&) const = default;
};

struct ContractTotals {
  Gas full_on_chain = 0;
  Gas with_offchain = 0;

  bool operator==(const ContractTotals&) const = default;
};

inline DataProfile profile_from_model(const FsmModel& model) {
  DataProfile p;
  for (const auto& s : model.states) p.states[s.id] = {s.reads_words, s.writes_words};
  return p;
}

// Uniform data size: every state reads and writes M words, M crosses the
// interface.
inline DataProfile with_uniform_words(DataProfile p, Words m) {
  for (auto& [id, d] : p.states) d = {m, m};
  p.boundary_words = m;
  return p;
}

inline Gas state_cost(const DataProfile& p, const std::string& id, const GasTable& t) {
  const StateData d = p.at(id);
  return static_cast<Gas>(p.times(id)) *
         (t.sload * static_cast<Gas>(d.reads) + t.sstore * static_cast<Gas>(d.writes));
}

inline Words boundary_words_for(const DataProfile& p, const NodeSet& nodes) {
  if (p.boundary_words) return *p.boundary_words;
  Words m = 0;
  for (const auto& n : nodes) {
    const StateData d = p.at(n);
    m = std::max({m, d.reads, d.writes});
  }
  return m;
}

inline Gas cost_on_chain(const FsmModel& model, const SimpleSubgraph& sg, const DataProfile& p,
                         const GasTable& t) {
  (void)model;
  Gas total = 0;
  for (const auto& s : sg.nodes) total += state_cost(p, s, t);
  return total;
}

inline Gas interface_overhead(Words boundary_words, const GasTable& t) {
  return 3 * t.jump + 5 * t.memop * static_cast<Gas>(boundary_words);
}

inline Gas interface_overhead(const DataProfile& p, const GasTable& t) {
  return interface_overhead(p.boundary_words.value_or(0), t);
}

inline CostComparison cost_off_chain(const FsmModel& model, const SimpleSubgraph& sg,
                                     const DataProfile& p, const GasTable& t) {
  for (const auto& s : p.midpattern)
    if (!sg.nodes.count(s))
      throw Error(ErrorCode::InvalidProfile, "mid-pattern state '" + s + "' is not in the subgraph");
  CostComparison c;
  c.on_chain_only = cost_on_chain(model, sg, p, t);
  c.breakdown.boundary_on_chain = state_cost(p, sg.entry, t) + state_cost(p, sg.exit, t);
  c.breakdown.interface_overhead = interface_overhead(boundary_words_for(p, sg.nodes), t);
  for (const auto& s : p.midpattern) c.breakdown.extra_offchain_access += state_cost(p, s, t);
  c.off_chain_total = c.breakdown.boundary_on_chain + c.breakdown.interface_overhead +
                      c.breakdown.extra_offchain_access;
  c.saving = c.on_chain_only - c.off_chain_total;
  c.recommend_offchain = c.saving > 0;
  return c;
}

inline ContractTotals contract_totals(const FsmModel& model,
                                      const std::vector<SimpleSubgraph>& accepted,
                                      const DataProfile& p, const GasTable& t) {
  for (std::size_t i = 0; i < accepted.size(); ++i)
    for (std::size_t j = i + 1; j < accepted.size(); ++j) {
      const auto& a = accepted[i];
      const auto& b = accepted[j];
      NodeSet shared;
      std::set_intersection(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                            std::inserter(shared, shared.end()));
      if (shared.empty() || shared.size() == a.nodes.size() || shared.size() == b.nodes.size())
        continue;
      if (shared.size() == 1) {
        const auto& s = *shared.begin();
        if ((s == a.exit && s == b.entry) || (s == b.exit && s == a.entry)) continue;
      }
      throw Error(ErrorCode::OverlappingDecisions,
                  "accepted subgraphs " + a.id + " and " + b.id + " partially overlap");
    }

  std::vector<const SimpleSubgraph*> maximal;
  for (const auto& a : accepted) {
    const bool inner = std::any_of(accepted.begin(), accepted.end(), [&](const SimpleSubgraph& b) {
      return is_proper_subgraph(a.nodes, b.nodes);
    });
    const bool dup = std::any_of(maximal.begin(), maximal.end(),
                                 [&](const SimpleSubgraph* m) { return m->nodes == a.nodes; });
    if (!inner && !dup) maximal.push_back(&a);
  }

  ContractTotals out;
  NodeSet covered;
  for (const auto& s : model.states) out.full_on_chain += state_cost(p, s.id, t);
  for (const auto* sg : maximal) {
    DataProfile local = p;
    local.midpattern.clear();
    for (const auto& s : p.midpattern)
      if (sg->nodes.count(s)) local.midpattern.insert(s);
    out.with_offchain += cost_off_chain(model, *sg, local, t).off_chain_total;
    covered.insert(sg->nodes.begin(), sg->nodes.end());
  }
  for (const auto& s : model.states)
    if (!covered.count(s.id)) out.with_offchain += state_cost(p, s.id, t);
  return out;
}

// Config document: any subset of {sload, sstore, memop, stackop, pop, jump};
// missing keys keep their defaults.
inline GasTable gas_table_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "gas table must be an object");
  GasTable t;
  const std::map<std::string, Gas*> slots{{"sload", &t.sload},   {"sstore", &t.sstore},
                                          {"memop", &t.memop},   {"stackop", &t.stackop},
                                          {"pop", &t.pop},       {"jump", &t.jump}};
  for (const auto& [key, value] : doc.items()) {
    auto it = slots.find(key);
    if (it == slots.end()) throw Error(ErrorCode::InvalidConfig, "unknown gas table key '" + key + "'");
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
      throw Error(ErrorCode::InvalidConfig, "gas table entry '" + key + "' must be a nonnegative integer");
    *it->second = value.get<Gas>();
  }
  return t;
}

inline GasTable parse_gas_table(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed gas table: ") + e.what());
  }
  return gas_table_from_json(doc);
}

inline nlohmann::ordered_json gas_table_to_json(const GasTable& t) {
  nlohmann::ordered_json o;
  o["sload"] = t.sload;
  o["sstore"] = t.sstore;
  o["memop"] = t.memop;
  o["stackop"] = t.stackop;
  o["pop"] = t.pop;
  o["jump"] = t.jump;
  return o;
}

inline nlohmann::ordered_json comparison_to_json(const CostComparison& c) {
  nlohmann::ordered_json o;
  o["on_chain_only"] = c.on_chain_only;
  o["off_chain_total"] = c.off_chain_total;
  o["breakdown"] = {{"boundary_on_chain", c.breakdown.boundary_on_chain},
                    {"interface_overhead", c.breakdown.interface_overhead},
                    {"extra_offchain_access", c.breakdown.extra_offchain_access}};
  o["saving"] = c.saving;
  o["recommend_offchain"] = c.recommend_offchain;
  return o;
}

inline NodeSet parse_id_list(std::string_view csv) {
  NodeSet out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? csv.size() : comma;
    std::string item(csv.substr(start, end - start));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.insert(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace ofc
