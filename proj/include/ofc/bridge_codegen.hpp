#pragma once

// On/off-chain interface artifacts for hierarchical nodes: a contract
// skeleton in a platform-neutral template syntax, a bridge process script,
// and the off-chain storage record schema. Each artifact has a loader so
// generated text can be read back.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/hsm_transform.hpp"

namespace ofc {

struct MethodSpec {
  std::string method_name;
  std::vector<ParamSpec> params;
  std::vector<std::string> reads;   // data keys
  std::vector<std::string> writes;
  std::vector<std::string> targets; // states the method can move into
  std::string offchain_event;
  std::string done_event;

  bool operator==(const MethodSpec&) const = default;
};

struct BridgeSpec {
  std::string pattern_id;
  std::string entry_state;
  std::string exit_state;
  std::vector<MethodSpec> methods;
  std::set<std::string> affected_actors;

  const MethodSpec* find_method(const std::string& name) const {
    for (const auto& m : methods)
      if (m.method_name == name) return &m;
    return nullptr;
  }

  bool operator==(const BridgeSpec&) const = default;
};

inline std::string read_key(const std::string& state, Words i) {
  return state + ".r" + std::to_string(i);
}
inline std::string write_key(const std::string& state, Words i) {
  return state + ".w" + std::to_string(i);
}

// The nested region of a hierarchical node with every deeper level inlined.
inline FsmModel nested_flat(const HsmModel& h, const std::string& node) {
  if (!h.is_hierarchical(node))
    throw Error(ErrorCode::NotHierarchical, "'" + node + "' is not a hierarchical state");
  const Mapping& m = h.mapping(node);
  HsmModel sub{m.machine, h.mappings, {}};
  return flatten(sub);
}

inline BridgeSpec derive_bridge_spec(const HsmModel& h, const std::string& node) {
  const FsmModel region = nested_flat(h, node);
  BridgeSpec spec;
  spec.pattern_id = node;
  spec.entry_state = resolve_entry(h, node);
  spec.exit_state = resolve_exit(h, node);

  std::vector<const Transition*> ts;
  for (const auto& t : region.transitions) ts.push_back(&t);
  std::sort(ts.begin(), ts.end(), [](const Transition* a, const Transition* b) { return a->id < b->id; });

  std::map<std::string, std::size_t> index;
  for (const auto* t : ts) {
    auto [it, fresh] = index.emplace(t->method_name, spec.methods.size());
    if (fresh) {
      MethodSpec m;
      m.method_name = t->method_name;
      m.params = t->inputs;
      const std::string k = std::to_string(spec.methods.size() + 1);
      m.offchain_event = "offChainEvent" + k;
      m.done_event = "offChainDoneEvent" + k;
      spec.methods.push_back(std::move(m));
    }
    MethodSpec& m = spec.methods[it->second];
    if (std::find(m.targets.begin(), m.targets.end(), t->to) == m.targets.end()) {
      m.targets.push_back(t->to);
      const StateNode* s = region.find_state(t->to);
      for (Words i = 0; s && i < s->reads_words; ++i) m.reads.push_back(read_key(s->id, i));
      for (Words i = 0; s && i < s->writes_words; ++i) m.writes.push_back(write_key(s->id, i));
    }
    if (!t->actor.empty()) spec.affected_actors.insert(t->actor);
  }
  for (const auto& s : region.states) spec.affected_actors.insert(s.actors.begin(), s.actors.end());
  return spec;
}

inline void check_spec(const BridgeSpec& spec) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  if (spec.pattern_id.empty()) bad("empty pattern id");
  if (spec.entry_state.empty() || spec.exit_state.empty()) bad("missing entry or exit state");
  if (spec.entry_state == spec.exit_state) bad("entry and exit state coincide");
  if (spec.methods.empty()) bad("no off-chained methods");
  std::set<std::string> names, events;
  for (const auto& m : spec.methods) {
    if (m.method_name.empty()) bad("empty method name");
    if (!names.insert(m.method_name).second) bad("duplicate method " + m.method_name);
    if (!events.insert(m.offchain_event).second || !events.insert(m.done_event).second)
      bad("event names are not unique per method");
  }
}

namespace detail {

inline std::string join(const std::vector<std::string>& xs, const std::string& empty = "-") {
  if (xs.empty()) return empty;
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ',';
    out += x;
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s == "-" || s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

inline std::string params_text(const std::vector<ParamSpec>& ps) {
  std::vector<std::string> parts;
  for (const auto& p : ps) parts.push_back(p.name + ":" + std::to_string(p.words));
  return join(parts);
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto b = line.find_first_not_of(' ');
    if (b == std::string::npos || line[b] == '#') continue;
    out.push_back(line.substr(b));
  }
  return out;
}

inline std::vector<std::string> words_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

[[noreturn]] inline void load_error(const std::string& what, const std::string& line) {
  throw Error(ErrorCode::SyntaxError, what + ": '" + line + "'");
}

}  // namespace detail

inline std::string generate_contract_skeleton(const BridgeSpec& spec) {
  check_spec(spec);
  const std::vector<std::string> actors(spec.affected_actors.begin(), spec.affected_actors.end());
  std::ostringstream o;
  o << "# off-chain interface skeleton, platform-neutral template\n";
  o << "contract " << spec.pattern_id << "\n";
  o << "  state_var state : StateId\n";
  o << "  state_var offChain : bool = false\n";
  o << "  entry_state " << spec.entry_state << "\n";
  o << "  exit_state " << spec.exit_state << "\n";
  o << "  actors " << detail::join(actors) << "\n";
  for (const auto& m : spec.methods) {
    o << "\n  guard " << m.method_name << " event " << m.offchain_event << " done " << m.done_event << "\n";
    o << "    when state == " << spec.entry_state << " or offChain\n";
    o << "    params " << detail::params_text(m.params) << "\n";
    o << "    reads " << detail::join(m.reads) << "\n";
    o << "    writes " << detail::join(m.writes) << "\n";
    o << "    emit " << m.offchain_event << "(method=" << m.method_name << ", params, reads)\n";
    o << "  end\n";
  }
  o << "\n  on_enter " << spec.entry_state << "\n";
  o << "    set offChain = true\n";
  o << "  end\n";
  o << "\n  hook attestResults\n";
  o << "    actors " << detail::join(actors) << "\n";
  o << "    require unanimous approval\n";
  o << "  end\n";
  o << "\n  on_done " << spec.exit_state << "\n";
  o << "    call attestResults\n";
  o << "    set offChain = false\n";
  o << "    commit cached_writes\n";
  o << "    return outputs\n";
  o << "  end\n";
  o << "end\n";
  return o.str();
}

struct SkeletonGuard {
  std::string method_name;
  std::string offchain_event;
  std::string done_event;
  std::vector<ParamSpec> params;
  std::vector<std::string> reads;
  std::vector<std::string> writes;
};

struct ContractSkeleton {
  std::string pattern_id;
  std::string entry_state;
  std::string exit_state;
  std::set<std::string> actors;
  std::vector<SkeletonGuard> guards;
  int attest_hooks = 0;
  bool sets_offchain_on_entry = false;
  bool commits_on_done = false;
};

// Loader used by the simulator side; rejects anything outside the template.
inline ContractSkeleton load_contract_skeleton(const std::string& text) {
  ContractSkeleton c;
  const auto lines = detail::lines_of(text);
  std::size_t i = 0;
  auto next = [&]() -> const std::string& {
    if (i >= lines.size()) detail::load_error("unexpected end of skeleton", "");
    return lines[i++];
  };
  auto w = detail::words_of(next());
  if (w.size() != 2 || w[0] != "contract") detail::load_error("expected contract header", lines[0]);
  c.pattern_id = w[1];
  bool closed = false;
  while (i < lines.size()) {
    const std::string& line = next();
    w = detail::words_of(line);
    if (w[0] == "end") {
      closed = true;
      break;
    } else if (w[0] == "state_var") {
      continue;
    } else if (w[0] == "entry_state" && w.size() == 2) {
      c.entry_state = w[1];
    } else if (w[0] == "exit_state" && w.size() == 2) {
      c.exit_state = w[1];
    } else if (w[0] == "actors" && w.size() == 2) {
      for (const auto& a : detail::split_list(w[1])) c.actors.insert(a);
    } else if (w[0] == "guard" && w.size() == 6 && w[2] == "event" && w[4] == "done") {
      SkeletonGuard g{w[1], w[3], w[5], {}, {}, {}};
      for (std::string body = next(); body != "end"; body = next()) {
        const auto bw = detail::words_of(body);
        if (bw[0] == "params" && bw.size() == 2) {
          for (const auto& p : detail::split_list(bw[1])) {
            const auto colon = p.find(':');
            if (colon == std::string::npos) detail::load_error("bad parameter", body);
            g.params.push_back({p.substr(0, colon), std::stoull(p.substr(colon + 1))});
          }
        } else if (bw[0] == "reads" && bw.size() == 2) {
          g.reads = detail::split_list(bw[1]);
        } else if (bw[0] == "writes" && bw.size() == 2) {
          g.writes = detail::split_list(bw[1]);
        } else if (bw[0] != "when" && bw[0] != "emit") {
          detail::load_error("unknown guard line", body);
        }
      }
      c.guards.push_back(std::move(g));
    } else if (w[0] == "on_enter" && w.size() == 2) {
      for (std::string body = next(); body != "end"; body = next())
        if (body == "set offChain = true") c.sets_offchain_on_entry = true;
    } else if (w[0] == "hook" && w.size() == 2 && w[1] == "attestResults") {
      ++c.attest_hooks;
      for (std::string body = next(); body != "end"; body = next()) {
      }
    } else if (w[0] == "on_done" && w.size() == 2) {
      for (std::string body = next(); body != "end"; body = next())
        if (body == "commit cached_writes") c.commits_on_done = true;
    } else {
      detail::load_error("unknown skeleton line", line);
    }
  }
  if (!closed) detail::load_error("unterminated contract", c.pattern_id);
  if (c.entry_state.empty() || c.exit_state.empty()) detail::load_error("missing entry/exit", c.pattern_id);
  return c;
}

inline std::string generate_bridge_script(const BridgeSpec& spec) {
  check_spec(spec);
  std::ostringstream o;
  o << "# bridge process: wait for an off-chain event, run the mirrored method\n";
  o << "# against the local cache, fire the matching done event\n";
  o << "bridge " << spec.pattern_id << "\n";
  o << "  entry " << spec.entry_state << "\n";
  o << "  exit " << spec.exit_state << "\n";
  o << "  loop\n";
  for (const auto& m : spec.methods) {
    o << "    handler " << m.method_name << "\n";
    o << "      step wait " << m.offchain_event << "\n";
    if (!m.reads.empty()) o << "      step seed_cache " << m.method_name << "\n";
    o << "      step invoke " << m.method_name << "\n";
    o << "      step on_exit finalize\n";
    o << "      step fire " << m.done_event << "\n";
    o << "    end\n";
  }
  o << "  end\n";
  o << "  finalize\n";
  o << "    step marshal_writes\n";
  o << "    step request_attestation\n";
  o << "  end\n";
  o << "  cache_miss\n";
  o << "    note a read not seeded by the event pauses the mirrored method\n";
  o << "    note the bridge calls the on-chain getter for the missing key\n";
  o << "    note the fetched value is cached and the method resumes\n";
  o << "  end\n";
  o << "end\n";
  return o.str();
}

struct BridgeScript {
  std::string pattern_id;
  std::map<std::string, std::vector<std::string>> handlers;  // method -> steps
  std::vector<std::string> finalize;
  std::vector<std::string> cache_miss_notes;

  // Steps the bridge performs for one invocation of `method`.
  std::vector<std::string> steps_for(const std::string& method, bool reaches_exit) const {
    std::vector<std::string> out;
    auto it = handlers.find(method);
    if (it == handlers.end()) return out;
    for (const auto& s : it->second) {
      if (s == "on_exit finalize") {
        if (reaches_exit) out.insert(out.end(), finalize.begin(), finalize.end());
        continue;
      }
      out.push_back(s);
    }
    return out;
  }
};

inline BridgeScript load_bridge_script(const std::string& text) {
  BridgeScript b;
  const auto lines = detail::lines_of(text);
  std::size_t i = 0;
  auto next = [&]() -> const std::string& {
    if (i >= lines.size()) detail::load_error("unexpected end of bridge script", "");
    return lines[i++];
  };
  auto w = detail::words_of(next());
  if (w.size() != 2 || w[0] != "bridge") detail::load_error("expected bridge header", lines[0]);
  b.pattern_id = w[1];
  auto step_body = [](const std::string& line) {
    if (line.rfind("step ", 0) != 0) detail::load_error("expected step", line);
    return line.substr(5);
  };
  for (std::string line = next(); line != "end"; line = next()) {
    w = detail::words_of(line);
    if (w[0] == "entry" || w[0] == "exit") continue;
    if (w[0] == "loop") {
      for (std::string h = next(); h != "end"; h = next()) {
        const auto hw = detail::words_of(h);
        if (hw.size() != 2 || hw[0] != "handler") detail::load_error("expected handler", h);
        auto& steps = b.handlers[hw[1]];
        for (std::string s = next(); s != "end"; s = next()) steps.push_back(step_body(s));
      }
    } else if (w[0] == "finalize") {
      for (std::string s = next(); s != "end"; s = next()) b.finalize.push_back(step_body(s));
    } else if (w[0] == "cache_miss") {
      for (std::string s = next(); s != "end"; s = next()) b.cache_miss_notes.push_back(s);
    } else {
      detail::load_error("unknown bridge line", line);
    }
  }
  return b;
}

struct SchemaField {
  std::string name;
  std::string type;
  std::string note;

  bool operator==(const SchemaField&) const = default;
};

struct OffchainRecordSchema {
  std::string pattern_id;
  std::vector<SchemaField> fields;

  bool operator==(const OffchainRecordSchema&) const = default;
};

inline const std::vector<SchemaField>& record_fields() {
  static const std::vector<SchemaField> fields{
      {"TransactionID", "Byte[]", "sha-256 of the canonical record payload"},
      {"CurrentOffchainPatternAsSubmitted", "Byte[]", "hierarchical node id of the executed pattern"},
      {"SmartContractFromAddress", "Varchar", "address of the calling contract"},
      {"SmartContractToAddress", "Byte[]", "address of the called contract"},
      {"ParticipatedActors", "Enum", "actor ids involved in the run"},
      {"ParticipatedActorsSignatures", "Enum", "one approval signature per actor"},
      {"TransitionParameters", "Enum", "inputs and committed writes of the pattern"},
  };
  return fields;
}

inline std::string generate_storage_schema(const BridgeSpec& spec) {
  std::ostringstream o;
  o << "record OffchainRecord " << spec.pattern_id << "\n";
  for (const auto& f : record_fields())
    o << "  field " << f.name << " : " << f.type << " | " << f.note << "\n";
  o << "end\n";
  return o.str();
}

inline OffchainRecordSchema load_storage_schema(const std::string& text) {
  OffchainRecordSchema s;
  const auto lines = detail::lines_of(text);
  if (lines.empty()) detail::load_error("empty schema", "");
  auto w = detail::words_of(lines[0]);
  if (w.size() != 3 || w[0] != "record" || w[1] != "OffchainRecord")
    detail::load_error("expected record header", lines[0]);
  s.pattern_id = w[2];
  bool closed = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i] == "end") {
      closed = true;
      break;
    }
    const std::string& l = lines[i];
    const auto colon = l.find(" : ");
    const auto bar = l.find(" | ");
    if (l.rfind("field ", 0) != 0 || colon == std::string::npos || bar == std::string::npos || bar < colon)
      detail::load_error("bad field line", l);
    s.fields.push_back({l.substr(6, colon - 6), l.substr(colon + 3, bar - colon - 3), l.substr(bar + 3)});
  }
  if (!closed) detail::load_error("unterminated record", s.pattern_id);
  return s;
}

inline nlohmann::ordered_json bridge_spec_to_json(const BridgeSpec& spec) {
  nlohmann::ordered_json o;
  o["pattern_id"] = spec.pattern_id;
  o["entry_state"] = spec.entry_state;
  o["exit_state"] = spec.exit_state;
  o["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : spec.methods) {
    nlohmann::ordered_json j;
    j["method_name"] = m.method_name;
    j["params"] = detail::params_json(m.params);
    j["reads"] = m.reads;
    j["writes"] = m.writes;
    j["offchain_event"] = m.offchain_event;
    j["done_event"] = m.done_event;
    o["methods"].push_back(j);
  }
  o["affected_actors"] = std::vector<std::string>(spec.affected_actors.begin(), spec.affected_actors.end());
  return o;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes the three artifacts per spec and returns the manifest entries.
inline nlohmann::ordered_json write_bridge_artifacts(const std::filesystem::path& dir,
                                                     const std::vector<BridgeSpec>& specs) {
  nlohmann::ordered_json patterns = nlohmann::ordered_json::array();
  for (const auto& spec : specs) {
    const std::vector<std::pair<std::string, std::string>> files{
        {spec.pattern_id + ".contract.txt", generate_contract_skeleton(spec)},
        {spec.pattern_id + ".bridge.txt", generate_bridge_script(spec)},
        {spec.pattern_id + ".schema.txt", generate_storage_schema(spec)},
    };
    nlohmann::ordered_json entry;
    entry["pattern_id"] = spec.pattern_id;
    entry["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& [name, text] : files) {
      write_text(dir / name, text);
      entry["artifacts"].push_back(name);
    }
    entry["variant"] = "event-based";
    entry["note"] = "channel polling variant for permissioned chains not generated";
    patterns.push_back(entry);
  }
  return patterns;
}

}  // namespace ofc
