#pragma once

// FSM models of contract workflows: states with per-state chain-data
// profiles, transitions with typed inputs/outputs, and the JSON document
// format used by every other module.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ofc/error.hpp"

namespace ofc {

using Words = std::uint64_t;  // 1 word = 32 bytes
using NodeSet = std::set<std::string>;

struct ParamSpec {
  std::string name;
  Words words = 0;

  bool operator==(const ParamSpec&) const = default;
};

struct StateNode {
  std::string id;
  std::string label;
  Words reads_words = 0;
  Words writes_words = 0;
  std::set<std::string> actors;
  // Set only on nodes that stand for a nested machine (see hsm_transform).
  bool hierarchical = false;

  bool operator==(const StateNode&) const = default;
};

struct Transition {
  std::string id;
  std::string from;
  std::string to;
  std::string method_name;
  std::vector<ParamSpec> inputs;
  std::vector<ParamSpec> outputs;
  std::string actor;
  std::optional<std::uint32_t> quorum;

  bool operator==(const Transition&) const = default;
};

struct FsmModel {
  std::vector<StateNode> states;
  std::string initial_state;
  std::vector<Transition> transitions;

  const StateNode* find_state(std::string_view id) const {
    for (const auto& s : states)
      if (s.id == id) return &s;
    return nullptr;
  }

  const Transition* find_transition(std::string_view id) const {
    for (const auto& t : transitions)
      if (t.id == id) return &t;
    return nullptr;
  }

  NodeSet state_ids() const {
    NodeSet ids;
    for (const auto& s : states) ids.insert(s.id);
    return ids;
  }

  // States and transitions are keyed by id, so their document order carries
  // no meaning: the canonical form sorts both.
  FsmModel canonical() const {
    FsmModel out = *this;
    std::stable_sort(out.states.begin(), out.states.end(),
                     [](const StateNode& a, const StateNode& b) { return a.id < b.id; });
    std::stable_sort(out.transitions.begin(), out.transitions.end(),
                     [](const Transition& a, const Transition& b) { return a.id < b.id; });
    return out;
  }

  friend bool operator==(const FsmModel& a, const FsmModel& b) {
    const FsmModel ca = a.canonical();
    const FsmModel cb = b.canonical();
    return std::tie(ca.states, ca.initial_state, ca.transitions) ==
           std::tie(cb.states, cb.initial_state, cb.transitions);
  }
};

enum class Severity { Error, Warning };

struct Issue {
  Severity severity = Severity::Error;
  std::string message;
  std::string offending_id;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Issue> issues;

  bool operator==(const ValidationReport&) const = default;
};

namespace detail {

using nlohmann::json;

inline std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void syntax(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SyntaxError, where + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) syntax(where, std::string("missing key '") + key + "'");
  return *it;
}

inline std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) syntax(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

inline Words words_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_unsigned()) syntax(where, std::string("'") + key + "' must be a nonnegative integer");
  return v.get<Words>();
}

inline std::vector<ParamSpec> params_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) syntax(where, std::string("'") + key + "' must be an array");
  std::vector<ParamSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = where + "." + key + "[" + std::to_string(i) + "]";
    if (!v[i].is_object()) syntax(at, "parameter must be an object");
    out.push_back({string_field(v[i], "name", at), words_field(v[i], "words", at)});
  }
  return out;
}

inline nlohmann::ordered_json params_json(const std::vector<ParamSpec>& params) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : params) {
    nlohmann::ordered_json o;
    o["name"] = p.name;
    o["words"] = p.words;
    arr.push_back(o);
  }
  return arr;
}

inline StateNode state_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) syntax(where, "state must be an object");
  StateNode s;
  s.id = string_field(j, "id", where);
  s.label = string_field(j, "label", where);
  s.reads_words = words_field(j, "reads_words", where);
  s.writes_words = words_field(j, "writes_words", where);
  const json& actors = field(j, "actors", where);
  if (!actors.is_array()) syntax(where, "'actors' must be an array");
  for (const auto& a : actors) {
    if (!a.is_string()) syntax(where, "actor ids must be strings");
    s.actors.insert(a.get<std::string>());
  }
  if (auto it = j.find("hierarchical"); it != j.end()) {
    if (!it->is_boolean()) syntax(where, "'hierarchical' must be a boolean");
    s.hierarchical = it->get<bool>();
  }
  return s;
}

inline Transition transition_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) syntax(where, "transition must be an object");
  Transition t;
  t.id = string_field(j, "id", where);
  t.from = string_field(j, "from", where);
  t.to = string_field(j, "to", where);
  t.method_name = string_field(j, "method_name", where);
  t.inputs = params_field(j, "inputs", where);
  t.outputs = params_field(j, "outputs", where);
  t.actor = string_field(j, "actor", where);
  if (auto it = j.find("quorum"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0 ||
        it->get<std::uint64_t>() > UINT32_MAX)
      syntax(where, "'quorum' must be a positive integer");
    t.quorum = it->get<std::uint32_t>();
  }
  return t;
}

inline nlohmann::ordered_json state_to_json(const StateNode& s) {
  nlohmann::ordered_json o;
  o["id"] = s.id;
  o["label"] = s.label;
  o["reads_words"] = s.reads_words;
  o["writes_words"] = s.writes_words;
  o["actors"] = std::vector<std::string>(s.actors.begin(), s.actors.end());
  if (s.hierarchical) o["hierarchical"] = true;
  return o;
}

inline nlohmann::ordered_json transition_to_json(const Transition& t) {
  nlohmann::ordered_json o;
  o["id"] = t.id;
  o["from"] = t.from;
  o["to"] = t.to;
  o["method_name"] = t.method_name;
  o["inputs"] = params_json(t.inputs);
  o["outputs"] = params_json(t.outputs);
  o["actor"] = t.actor;
  if (t.quorum) o["quorum"] = *t.quorum;
  return o;
}

}  // namespace detail

// Builds a model from an already-parsed JSON value. `where` prefixes error
// locations (used for models nested inside HSM documents).
inline FsmModel model_from_json(const nlohmann::json& doc, const std::string& where = "model") {
  using detail::syntax;
  if (!doc.is_object()) syntax(where, "document must be an object");
  FsmModel m;
  const auto& states = detail::field(doc, "states", where);
  if (!states.is_array()) syntax(where, "'states' must be an array");
  std::set<std::string> seen_states;
  for (std::size_t i = 0; i < states.size(); ++i) {
    StateNode s = detail::state_from_json(states[i], where + ".states[" + std::to_string(i) + "]");
    if (!seen_states.insert(s.id).second)
      throw Error(ErrorCode::DuplicateId, "duplicate state id '" + s.id + "'");
    m.states.push_back(std::move(s));
  }
  m.initial_state = detail::string_field(doc, "initial_state", where);
  const auto& transitions = detail::field(doc, "transitions", where);
  if (!transitions.is_array()) syntax(where, "'transitions' must be an array");
  std::set<std::string> seen_transitions;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    Transition t = detail::transition_from_json(
        transitions[i], where + ".transitions[" + std::to_string(i) + "]");
    if (!seen_transitions.insert(t.id).second)
      throw Error(ErrorCode::DuplicateId, "duplicate transition id '" + t.id + "'");
    m.transitions.push_back(std::move(t));
  }
  return m;
}

inline nlohmann::ordered_json model_to_json(const FsmModel& model) {
  const FsmModel c = model.canonical();
  nlohmann::ordered_json doc;
  doc["states"] = nlohmann::ordered_json::array();
  for (const auto& s : c.states) doc["states"].push_back(detail::state_to_json(s));
  doc["initial_state"] = c.initial_state;
  doc["transitions"] = nlohmann::ordered_json::array();
  for (const auto& t : c.transitions) doc["transitions"].push_back(detail::transition_to_json(t));
  return doc;
}

// Parses a model document. Only syntax and id uniqueness are checked here;
// referential integrity and reachability belong to validate().
inline FsmModel parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError,
                "malformed document at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  return model_from_json(doc);
}

inline ValidationReport validate(const FsmModel& model) {
  ValidationReport report;
  auto error = [&](std::string message, std::string id) {
    report.issues.push_back({Severity::Error, std::move(message), std::move(id)});
  };

  std::map<std::string, int> state_count;
  for (const auto& s : model.states) ++state_count[s.id];
  for (const auto& [id, n] : state_count)
    if (n > 1) error("duplicate state id: " + id, id);

  std::map<std::string, int> transition_count;
  for (const auto& t : model.transitions) ++transition_count[t.id];
  for (const auto& [id, n] : transition_count)
    if (n > 1) error("duplicate transition id: " + id, id);

  const bool has_initial = state_count.count(model.initial_state) > 0;
  if (!has_initial) error("missing initial state: '" + model.initial_state + "'", model.initial_state);

  for (const auto& t : model.transitions) {
    if (t.from.empty() || t.to.empty()) {
      error("empty endpoint on transition " + t.id, t.id);
      continue;
    }
    for (const std::string* end : {&t.from, &t.to})
      if (!state_count.count(*end))
        error("dangling endpoint: transition " + t.id + " references unknown state '" + *end + "'", t.id);
    if (t.quorum && *t.quorum == 0) error("quorum must be positive on transition " + t.id, t.id);
  }

  if (has_initial) {
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& t : model.transitions) succ[t.from].push_back(t.to);
    std::set<std::string> seen{model.initial_state};
    std::deque<std::string> queue{model.initial_state};
    while (!queue.empty()) {
      const std::string cur = queue.front();
      queue.pop_front();
      for (const auto& next : succ[cur])
        if (state_count.count(next) && seen.insert(next).second) queue.push_back(next);
    }
    for (const auto& [id, n] : state_count)
      if (!seen.count(id)) error("unreachable: " + id, id);
  }

  report.ok = std::none_of(report.issues.begin(), report.issues.end(),
                           [](const Issue& i) { return i.severity == Severity::Error; });
  return report;
}

inline void require_valid(const FsmModel& model) {
  const ValidationReport report = validate(model);
  if (!report.ok) {
    std::string msg = "invalid model:";
    for (const auto& i : report.issues) msg += " [" + i.message + "]";
    throw Error(ErrorCode::InvalidModel, msg);
  }
}

// Canonical document: states and transitions sorted by id, fixed key order,
// two-space indentation, trailing newline.
inline std::string serialize(const FsmModel& model) {
  require_valid(model);
  return model_to_json(model).dump(2) + "\n";
}

inline nlohmann::ordered_json report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["ok"] = report.ok;
  doc["issues"] = nlohmann::ordered_json::array();
  for (const auto& i : report.issues) {
    nlohmann::ordered_json o;
    o["severity"] = i.severity == Severity::Error ? "error" : "warning";
    o["message"] = i.message;
    o["id"] = i.offending_id;
    doc["issues"].push_back(o);
  }
  return doc;
}

}  // namespace ofc
