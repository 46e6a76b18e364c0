#pragma once

// Deterministic execution of a partitioned model: mock ledger, off-chain
// cache, event bridge and attestation, with a gas meter.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofc/bridge_codegen.hpp"
#include "ofc/cost_model.hpp"
#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/hsm_transform.hpp"
#include "ofc/sha256.hpp"

namespace ofc {

enum class SimStatus { Running, AwaitingAttestation, Failed };
enum class Where { OnChain, OffChain };
enum class Verdict { Approve, Reject };

constexpr std::string_view status_name(SimStatus s) {
  switch (s) {
    case SimStatus::Running: return "Running";
    case SimStatus::AwaitingAttestation: return "AwaitingAttestation";
    case SimStatus::Failed: return "Failed";
  }
  return "Unknown";
}

struct LedgerEntry {
  std::uint64_t seq = 0;
  std::string key;
  std::string value;
  Gas gas_charged = 0;
};

struct CacheEntry {
  std::string value;
  bool dirty = false;
  std::uint64_t order = 0;  // write order
  Gas commit_gas = 0;
};

struct OffchainRecord {
  std::string transaction_id;
  std::string pattern;
  std::string from_address;
  std::string to_address;
  std::vector<std::string> actors;
  std::vector<std::string> signatures;
  std::vector<std::string> parameters;
};

struct SimulationState {
  std::string current_state;
  bool offchain_flag = false;
  std::vector<LedgerEntry> ledger;
  std::map<std::string, CacheEntry> cache;
  std::map<std::string, std::optional<Verdict>> pending_attestations;
  Gas gas_meter = 0;
  Gas unledgered_gas = 0;  // reads, jumps, marshaling, declared chain access
  std::vector<std::string> step_log;
  SimStatus status = SimStatus::Running;
  std::string active_pattern;
  std::vector<OffchainRecord> records;
};

struct InvocationResult {
  Where executed_where = Where::OnChain;
  std::string new_state;
  std::vector<std::string> outputs;
  std::vector<std::string> events_fired;
  Gas gas_delta = 0;
};

class Simulation {
 public:
  Simulation(const HsmModel& hsm, const std::vector<BridgeSpec>& specs, std::set<std::string> actors,
             DataProfile profile, GasTable table)
      : flat_(flatten(hsm)), actors_(std::move(actors)), profile_(std::move(profile)), table_(table) {
    std::map<std::string, const BridgeSpec*> by_id;
    for (const auto& s : specs) by_id[s.pattern_id] = &s;
    for (const auto& [id, m] : hsm.mappings) {
      (void)m;
      if (!by_id.count(id)) throw Error(ErrorCode::MissingSpec, "no bridge spec for '" + id + "'");
    }
    for (const auto& id : top_hierarchical(hsm)) {
      Region r;
      r.spec = *by_id.at(id);
      r.entry = resolve_entry(hsm, id);
      r.exit = resolve_exit(hsm, id);
      r.members = region_nodes(hsm, id);
      r.members.insert(r.entry);
      r.members.insert(r.exit);
      regions_.push_back(std::move(r));
    }
    if (actors_.empty())
      for (const auto& s : flat_.states) actors_.insert(s.actors.begin(), s.actors.end());
    state_.current_state = flat_.initial_state;
  }

  const SimulationState& state() const { return state_; }
  const FsmModel& model() const { return flat_; }
  bool has_offchain_regions() const { return !regions_.empty(); }

  // Records an attestation step that has nothing to attest: the model keeps
  // every state on-chain.
  void note_skipped_attestation(const std::string& actor) { log("contract attest skipped " + actor); }

  InvocationResult invoke(const std::string& method, const nlohmann::json& params = nlohmann::json::object()) {
    if (state_.status == SimStatus::Failed)
      throw Error(ErrorCode::SimulationFailed, "simulation failed; no further operations");
    if (state_.status == SimStatus::AwaitingAttestation)
      throw Error(ErrorCode::AttestationPending, "attestation in progress for " + state_.active_pattern);

    const Transition* t = nullptr;
    for (const auto& tr : flat_.transitions)
      if (tr.from == state_.current_state && tr.method_name == method && (!t || tr.id < t->id)) t = &tr;
    if (!t)
      throw Error(ErrorCode::NotEnabled,
                  "no transition '" + method + "' enabled at state '" + state_.current_state + "'");

    const Gas before = state_.gas_meter;
    InvocationResult res;

    if (!state_.offchain_flag) {
      for (const auto& r : regions_) {
        if (t->to == r.entry && !r.members.count(t->from)) {
          enter(r, *t, params);
          state_.current_state = t->to;
          res.executed_where = Where::OnChain;
          res.new_state = t->to;
          res.outputs = outputs_of(*t, params);
          res.gas_delta = state_.gas_meter - before;
          return res;
        }
      }
      for (const auto& r : regions_) {
        if (state_.current_state == r.entry && r.members.count(t->to) && t->to != r.entry) {
          enter(r, std::nullopt, params);
          break;
        }
      }
    }

    if (state_.offchain_flag) {
      run_offchain(*t, params, res);
    } else {
      charge_unledgered(table_.sload * static_cast<Gas>(profile_.at(t->to).reads));
      const StateData d = profile_.at(t->to);
      for (Words i = 0; i < d.writes; ++i) {
        const std::string key = write_key(t->to, i);
        append_ledger(key, value_for(method, params, key), table_.sstore);
      }
      log("contract invoke " + method);
      res.executed_where = Where::OnChain;
    }
    state_.current_state = t->to;
    res.new_state = t->to;
    res.outputs = outputs_of(*t, params);
    res.gas_delta = state_.gas_meter - before;
    return res;
  }

  const SimulationState& attest(const std::string& actor, Verdict verdict) {
    if (state_.status == SimStatus::Failed)
      throw Error(ErrorCode::SimulationFailed, "simulation failed; no further operations");
    if (state_.status != SimStatus::AwaitingAttestation)
      throw Error(ErrorCode::NotAwaiting, "no attestation is pending");
    auto it = state_.pending_attestations.find(actor);
    if (it == state_.pending_attestations.end() || !actors_.count(actor))
      throw Error(ErrorCode::UnknownActor, "'" + actor + "' is not an affected actor of " + state_.active_pattern);
    it->second = verdict;
    log(std::string("contract attestResults ") + (verdict == Verdict::Approve ? "approve " : "reject ") + actor);
    if (verdict == Verdict::Reject) {
      state_.status = SimStatus::Failed;
      state_.cache.clear();
      state_.offchain_flag = false;
      log("contract abort " + state_.active_pattern);
      return state_;
    }
    const bool unanimous = std::all_of(state_.pending_attestations.begin(), state_.pending_attestations.end(),
                                       [](const auto& kv) { return kv.second == Verdict::Approve; });
    if (unanimous) commit();
    return state_;
  }

 private:
  struct Region {
    BridgeSpec spec;
    std::string entry;
    std::string exit;
    NodeSet members;
  };

  const Region& active() const {
    for (const auto& r : regions_)
      if (r.spec.pattern_id == state_.active_pattern) return r;
    throw Error(ErrorCode::MissingSpec, "no active pattern");
  }

  Words boundary_words(const Region& r) const { return boundary_words_for(profile_, r.members); }

  void log(std::string s) { state_.step_log.push_back(std::move(s)); }

  void charge_unledgered(Gas g) {
    state_.unledgered_gas += g;
    state_.gas_meter += g;
  }

  void append_ledger(const std::string& key, const std::string& value, Gas gas) {
    const std::uint64_t seq = state_.ledger.empty() ? 1 : state_.ledger.back().seq + 1;
    state_.ledger.push_back({seq, key, value, gas});
    state_.gas_meter += gas;
  }

  static std::string value_for(const std::string& method, const nlohmann::json& params, const std::string& key) {
    return sha256_hex(method + "|" + params.dump() + "|" + key).substr(0, 16);
  }

  static std::vector<std::string> outputs_of(const Transition& t, const nlohmann::json& params) {
    std::vector<std::string> out;
    for (const auto& o : t.outputs) out.push_back(o.name + "=" + value_for(t.method_name, params, "out." + o.name));
    return out;
  }

  void cache_writes(const std::string& state, const std::string& method, const nlohmann::json& params, Gas per_word) {
    const StateData d = profile_.at(state);
    for (Words i = 0; i < d.writes; ++i) {
      const std::string key = write_key(state, i);
      auto [it, fresh] = state_.cache.try_emplace(key);
      if (fresh) {
        it->second.order = next_order_++;
        it->second.commit_gas = per_word;
      }
      it->second.value = value_for(method, params, key);
      it->second.dirty = true;
    }
  }

  // Switches the contract into off-chain mode for region r. With a
  // transition, the entry state's own method fires as part of the switch.
  void enter(const Region& r, const std::optional<Transition>& into, const nlohmann::json& params) {
    state_.offchain_flag = true;
    state_.active_pattern = r.spec.pattern_id;
    const Words bw = boundary_words(r);
    charge_unledgered(table_.jump + 2 * table_.memop * static_cast<Gas>(bw));
    charge_unledgered(table_.sload * static_cast<Gas>(profile_.at(r.entry).reads));
    // Chain access inside the pattern is declared in advance and paid once.
    for (const auto& s : profile_.midpattern)
      if (r.members.count(s)) charge_unledgered(state_cost(profile_, s, table_));
    if (into) {
      cache_writes(r.entry, into->method_name, params, table_.sstore);
    } else {
      // Entry already executed (initial or shared boundary state): its
      // current values are re-marshaled, not recomputed.
      cache_writes(r.entry, "enter", params, table_.sstore);
      for (auto& [key, e] : state_.cache)
        for (auto it = state_.ledger.rbegin(); it != state_.ledger.rend(); ++it)
          if (it->key == key) {
            e.value = it->value;
            break;
          }
    }
    log("contract set_offchain " + r.spec.pattern_id);
  }

  void run_offchain(const Transition& t, const nlohmann::json& params, InvocationResult& res) {
    const Region& r = active();
    const MethodSpec* m = r.spec.find_method(t.method_name);
    if (!m) throw Error(ErrorCode::MissingSpec, "method '" + t.method_name + "' missing from bridge spec");
    res.executed_where = Where::OffChain;
    log("contract emit " + m->offchain_event);
    res.events_fired.push_back(m->offchain_event);
    log("bridge wait " + m->offchain_event);
    if (!m->reads.empty()) log("bridge seed_cache " + m->method_name);
    log("bridge invoke " + m->method_name);
    const bool at_exit = t.to == r.exit;
    cache_writes(t.to, t.method_name, params, at_exit ? table_.sstore : 0);
    trail_.push_back(t.method_name + "(" + params.dump() + ")");
    if (at_exit) {
      const Words bw = boundary_words(r);
      charge_unledgered(table_.sload * static_cast<Gas>(profile_.at(r.exit).reads));
      charge_unledgered(table_.jump + 3 * table_.memop * static_cast<Gas>(bw));
      log("bridge marshal_writes");
      log("bridge request_attestation");
      state_.status = SimStatus::AwaitingAttestation;
      state_.pending_attestations.clear();
      for (const auto& a : r.spec.affected_actors) state_.pending_attestations[a] = std::nullopt;
    }
    log("bridge fire " + m->done_event);
    res.events_fired.push_back(m->done_event);
  }

  void commit() {
    const Region& r = active();
    std::vector<std::pair<std::string, CacheEntry>> dirty;
    for (const auto& kv : state_.cache)
      if (kv.second.dirty) dirty.push_back(kv);
    std::sort(dirty.begin(), dirty.end(), [](const auto& a, const auto& b) { return a.second.order < b.second.order; });

    OffchainRecord rec;
    rec.pattern = r.spec.pattern_id;
    rec.from_address = "bridge:" + r.spec.pattern_id;
    rec.to_address = "contract:" + flat_.initial_state;
    rec.parameters = trail_;
    for (const auto& [k, e] : dirty) rec.parameters.push_back(k + "=" + e.value);
    std::string payload = rec.pattern;
    for (const auto& p : rec.parameters) payload += "\n" + p;
    const std::string digest = sha256_hex(payload);
    rec.transaction_id = digest;
    for (const auto& [actor, v] : state_.pending_attestations) {
      (void)v;
      rec.actors.push_back(actor);
      rec.signatures.push_back("sig(" + actor + ", " + digest.substr(0, 16) + ")");
    }

    for (const auto& [k, e] : dirty) append_ledger(k, e.value, e.commit_gas);
    charge_unledgered(table_.jump);
    state_.records.push_back(std::move(rec));
    state_.cache.clear();
    state_.offchain_flag = false;
    state_.status = SimStatus::Running;
    state_.pending_attestations.clear();
    trail_.clear();
    log("contract commit " + r.spec.pattern_id);
    log("contract set_onchain " + r.spec.pattern_id);
    state_.active_pattern.clear();
  }

  FsmModel flat_;
  std::vector<Region> regions_;
  std::set<std::string> actors_;
  DataProfile profile_;
  GasTable table_;
  SimulationState state_;
  std::uint64_t next_order_ = 0;
  std::vector<std::string> trail_;
};

inline Simulation new_simulation(const HsmModel& hsm, const std::vector<BridgeSpec>& specs,
                                 const std::set<std::string>& actors, const DataProfile& profile,
                                 const GasTable& table) {
  return Simulation(hsm, specs, actors, profile, table);
}

// Specs for every hierarchical node, in id order.
inline std::vector<BridgeSpec> derive_all_specs(const HsmModel& hsm) {
  std::vector<BridgeSpec> out;
  for (const auto& [id, m] : hsm.mappings) {
    (void)m;
    out.push_back(derive_bridge_spec(hsm, id));
  }
  return out;
}

struct TraceStep {
  enum class Op { Invoke, Attest } op = Op::Invoke;
  std::string method;
  nlohmann::json params = nlohmann::json::object();
  std::string actor;
  Verdict verdict = Verdict::Approve;
};

inline std::vector<TraceStep> parse_trace(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, "malformed trace at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) detail::syntax("trace", "trace must be an array");
  std::vector<TraceStep> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "trace[" + std::to_string(i) + "]";
    const auto& j = doc[i];
    if (!j.is_object()) detail::syntax(where, "step must be an object");
    TraceStep s;
    const std::string op = detail::string_field(j, "op", where);
    if (op == "invoke") {
      s.op = TraceStep::Op::Invoke;
      s.method = detail::string_field(j, "method", where);
      if (auto p = j.find("params"); p != j.end()) {
        if (!p->is_object()) detail::syntax(where, "'params' must be an object");
        s.params = *p;
      }
    } else if (op == "attest") {
      s.op = TraceStep::Op::Attest;
      s.actor = detail::string_field(j, "actor", where);
      const std::string v = detail::string_field(j, "verdict", where);
      if (v != "approve" && v != "reject") detail::syntax(where, "verdict must be approve or reject");
      s.verdict = v == "approve" ? Verdict::Approve : Verdict::Reject;
    } else {
      detail::syntax(where, "unknown op '" + op + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct TraceResult {
  std::vector<LedgerEntry> final_ledger;
  Gas gas = 0;
  SimulationState state;
};

inline TraceResult run_trace(Simulation sim, const std::vector<TraceStep>& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    try {
      if (trace[i].op == TraceStep::Op::Invoke)
        sim.invoke(trace[i].method, trace[i].params);
      else if (!sim.has_offchain_regions())
        sim.note_skipped_attestation(trace[i].actor);  // same trace, all-on-chain baseline
      else
        sim.attest(trace[i].actor, trace[i].verdict);
    } catch (const Error& e) {
      throw Error(e.code(), "trace[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return {sim.state().ledger, sim.state().gas_meter, sim.state()};
}

inline TraceResult run_trace(const HsmModel& hsm, const std::vector<BridgeSpec>& specs,
                             const std::vector<TraceStep>& trace, const DataProfile& profile,
                             const GasTable& table, const std::set<std::string>& actors = {}) {
  return run_trace(Simulation(hsm, specs, actors, profile, table), trace);
}

// Key/value view of a ledger, ignoring sequence numbers and gas.
inline std::map<std::string, std::string> ledger_contents(const std::vector<LedgerEntry>& ledger) {
  std::map<std::string, std::string> out;
  for (const auto& e : ledger) out[e.key] = e.value;
  return out;
}

inline nlohmann::ordered_json record_to_json(const OffchainRecord& r) {
  nlohmann::ordered_json o;
  o["TransactionID"] = r.transaction_id;
  o["CurrentOffchainPatternAsSubmitted"] = r.pattern;
  o["SmartContractFromAddress"] = r.from_address;
  o["SmartContractToAddress"] = r.to_address;
  o["ParticipatedActors"] = r.actors;
  o["ParticipatedActorsSignatures"] = r.signatures;
  o["TransitionParameters"] = r.parameters;
  return o;
}

inline nlohmann::ordered_json trace_result_to_json(const TraceResult& r) {
  nlohmann::ordered_json o;
  o["status"] = status_name(r.state.status);
  o["final_state"] = r.state.current_state;
  o["gas"] = r.gas;
  o["ledger"] = nlohmann::ordered_json::array();
  for (const auto& e : r.final_ledger)
    o["ledger"].push_back({{"seq", e.seq}, {"key", e.key}, {"value", e.value}, {"gas_charged", e.gas_charged}});
  o["records"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.state.records) o["records"].push_back(record_to_json(rec));
  o["step_log"] = r.state.step_log;
  return o;
}

}  // namespace ofc
