#pragma once

// Decision sessions: ranked candidates with pattern labels and costs, an
// accept/reject loop with absorption of nested candidates, a replayable
// decision log, and export bundles.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofc/bridge_codegen.hpp"
#include "ofc/cost_model.hpp"
#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/hsm_transform.hpp"
#include "ofc/pattern_classifier.hpp"
#include "ofc/sha256.hpp"
#include "ofc/subgraph_discovery.hpp"

namespace ofc {

enum class Decision { Pending, Accepted, Rejected, Absorbed };
enum class Choice { Accept, Reject };

constexpr std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Pending: return "pending";
    case Decision::Accepted: return "accepted";
    case Decision::Rejected: return "rejected";
    case Decision::Absorbed: return "absorbed";
  }
  return "unknown";
}

inline Choice parse_choice(const std::string& s) {
  if (s == "accept") return Choice::Accept;
  if (s == "reject") return Choice::Reject;
  throw Error(ErrorCode::SyntaxError, "verdict must be 'accept' or 'reject', got '" + s + "'");
}

struct Candidate {
  SimpleSubgraph sg;
  PatternKind pattern;
  CostComparison cost;
  Decision decision = Decision::Pending;
  std::string absorbed_by;
};

struct SessionOptions {
  int max_states = kDefaultEnumerationCap;
  bool allow_whole_graph = false;
  GasTable table;
  std::string model_name = "model";
};

class DecisionSession {
 public:
  static DecisionSession create(std::string_view model_document, SessionOptions opts = {}) {
    FsmModel m = parse_model(model_document);
    require_valid(m);
    return DecisionSession(std::move(m), std::move(opts));
  }

  DecisionSession(FsmModel model, SessionOptions opts)
      : model_(std::move(model)), opts_(std::move(opts)), hsm_(as_hsm(model_)) {
    require_valid(model_);
    const DataProfile profile = profile_from_model(model_);
    for (auto& sg : find_simple_subgraphs(model_, opts_.max_states)) {
      Candidate c;
      c.pattern = classify_pattern(model_, sg);
      c.cost = cost_off_chain(model_, sg, profile, opts_.table);
      c.sg = std::move(sg);
      candidates_.push_back(std::move(c));
    }
  }

  const FsmModel& model() const { return model_; }
  const SessionOptions& options() const { return opts_; }
  const std::vector<Candidate>& candidates() const { return candidates_; }
  const HsmModel& derived_hsm() const { return hsm_; }
  const std::vector<std::string>& accepted_order() const { return accepted_; }
  const std::vector<nlohmann::ordered_json>& log() const { return log_; }

  // Index of the highest-ranked pending candidate; candidates().size() when
  // nothing is left to decide.
  std::size_t cursor() const {
    for (std::size_t i = 0; i < candidates_.size(); ++i)
      if (candidates_[i].decision == Decision::Pending) return i;
    return candidates_.size();
  }

  const Candidate& candidate(const std::string& id) const {
    for (const auto& c : candidates_)
      if (c.sg.id == id) return c;
    throw Error(ErrorCode::NotFound, "no candidate '" + id + "'");
  }

  void decide(const std::string& id, Choice choice) {
    Candidate& c = mutable_candidate(id);
    if (c.decision == Decision::Absorbed)
      throw Error(ErrorCode::Absorbed, id + " is absorbed by " + c.absorbed_by);
    if (c.decision != Decision::Pending) throw Error(ErrorCode::AlreadyDecided, id + " is already " +
                                                                                   std::string(decision_name(c.decision)));
    if (choice == Choice::Reject) {
      c.decision = Decision::Rejected;
      record(c, choice);
      return;
    }
    if (c.sg.whole_graph && !opts_.allow_whole_graph)
      throw Error(ErrorCode::WholeGraphNotConfirmed,
                  id + " covers the whole model; enable allow_whole_graph to accept it");
    for (const auto& other : accepted_) {
      const Candidate& a = candidate(other);
      const PairRelation rel = classify_relation(model_, c.sg, a.sg);
      if (rel.kind == RelationKind::OverlapSimple || rel.kind == RelationKind::TheoremViolation)
        throw Error(ErrorCode::OverlapConflict,
                    id + " partially overlaps accepted " + other + " (" + std::string(relation_name(rel.kind)) + ")");
    }
    std::vector<std::string> order = accepted_;
    order.push_back(id);
    HsmModel next = fold(order);

    hsm_ = std::move(next);
    accepted_ = std::move(order);
    c.decision = Decision::Accepted;
    for (auto& other : candidates_)
      if (other.decision == Decision::Pending && is_proper_subgraph(other.sg.nodes, c.sg.nodes)) {
        other.decision = Decision::Absorbed;
        other.absorbed_by = id;
      }
    record(c, choice);
  }

  CostComparison what_if(const std::string& id, std::optional<Words> words,
                         std::optional<NodeSet> midpattern) const {
    const Candidate& c = candidate(id);
    DataProfile p = profile_from_model(model_);
    if (words) p = with_uniform_words(std::move(p), *words);
    if (midpattern) p.midpattern = *midpattern;
    return cost_off_chain(model_, c.sg, p, opts_.table);
  }

  ContractTotals totals() const {
    std::vector<SimpleSubgraph> acc;
    for (const auto& id : accepted_) acc.push_back(candidate(id).sg);
    return contract_totals(model_, acc, profile_from_model(model_), opts_.table);
  }

  std::string log_text() const {
    std::string out = header().dump() + "\n";
    for (const auto& l : log_) out += l.dump() + "\n";
    return out;
  }

  // file name -> content; the manifest is included under "manifest.json".
  std::map<std::string, std::string> export_bundle() const {
    std::map<std::string, std::string> files;
    nlohmann::ordered_json manifest;
    manifest["model"] = opts_.model_name;
    manifest["files"] = nlohmann::ordered_json::array();
    manifest["patterns"] = nlohmann::ordered_json::array();

    files["derived.hsm.json"] = serialize_hsm(hsm_);
    manifest["files"].push_back("derived.hsm.json");
    for (const auto& [pid, m] : hsm_.mappings) {
      (void)m;
      const BridgeSpec spec = derive_bridge_spec(hsm_, pid);
      nlohmann::ordered_json entry;
      entry["pattern_id"] = pid;
      entry["artifacts"] = nlohmann::ordered_json::array();
      const std::vector<std::pair<std::string, std::string>> arts{
          {pid + ".contract.txt", generate_contract_skeleton(spec)},
          {pid + ".bridge.txt", generate_bridge_script(spec)},
          {pid + ".schema.txt", generate_storage_schema(spec)},
      };
      for (const auto& [name, text] : arts) {
        files[name] = text;
        manifest["files"].push_back(name);
        entry["artifacts"].push_back(name);
      }
      entry["variant"] = "event-based";
      entry["note"] = "channel polling variant for permissioned chains not generated";
      manifest["patterns"].push_back(entry);
    }
    if (!log_.empty()) {
      files["decisions.jsonl"] = log_text();
      manifest["files"].push_back("decisions.jsonl");
    }
    files["cost_report.json"] = cost_report().dump(2) + "\n";
    manifest["files"].push_back("cost_report.json");
    files["manifest.json"] = manifest.dump(2) + "\n";
    return files;
  }

  nlohmann::ordered_json export_to(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
      throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
    const auto files = export_bundle();
    for (const auto& [name, text] : files) write_text(dir / name, text);
    return nlohmann::ordered_json::parse(files.at("manifest.json"));
  }

  nlohmann::ordered_json cost_report() const {
    nlohmann::ordered_json r;
    r["gas_table"] = gas_table_to_json(opts_.table);
    r["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : candidates_) {
      nlohmann::ordered_json o;
      o["id"] = c.sg.id;
      o["nodes"] = std::vector<std::string>(c.sg.nodes.begin(), c.sg.nodes.end());
      o["kind"] = kind_name(c.pattern.kind);
      o["decision"] = decision_name(c.decision);
      o["cost"] = comparison_to_json(c.cost);
      r["candidates"].push_back(o);
    }
    const ContractTotals t = totals();
    r["totals"] = {{"full_on_chain", t.full_on_chain}, {"with_offchain", t.with_offchain}};
    return r;
  }

  nlohmann::ordered_json candidate_json(const Candidate& c) const {
    nlohmann::ordered_json o = subgraph_to_json(c.sg);
    nlohmann::ordered_json p = pattern_to_json(c.sg.id, c.pattern);
    p.erase("subgraph");
    o["pattern"] = p;
    o["cost"] = comparison_to_json(c.cost);
    o["decision"] = decision_name(c.decision);
    o["absorbed_by"] = c.absorbed_by.empty() ? nlohmann::ordered_json(nullptr)
                                              : nlohmann::ordered_json(c.absorbed_by);
    return o;
  }

  nlohmann::ordered_json candidates_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : candidates_) arr.push_back(candidate_json(c));
    return arr;
  }

  nlohmann::ordered_json session_json() const {
    nlohmann::ordered_json o;
    o["model"] = opts_.model_name;
    const std::size_t cur = cursor();
    o["cursor"] = cur;
    o["cursor_id"] = cur < candidates_.size() ? nlohmann::ordered_json(candidates_[cur].sg.id)
                                              : nlohmann::ordered_json(nullptr);
    o["allow_whole_graph"] = opts_.allow_whole_graph;
    nlohmann::ordered_json d = nlohmann::ordered_json::object();
    for (const auto& c : candidates_) d[c.sg.id] = decision_name(c.decision);
    o["decisions"] = d;
    o["accepted"] = accepted_;
    o["derived_hsm"] = hsm_to_json(hsm_);
    return o;
  }

  // Rebuilds a session from a decision log (header line + decision lines).
  static DecisionSession replay(std::string_view model_document, std::string_view log_text,
                                SessionOptions opts = {}) {
    std::vector<nlohmann::json> lines;
    std::size_t start = 0;
    while (start < log_text.size()) {
      std::size_t end = log_text.find('\n', start);
      if (end == std::string_view::npos) end = log_text.size();
      const std::string_view line = log_text.substr(start, end - start);
      if (!line.empty()) {
        try {
          lines.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::SyntaxError, std::string("malformed decision log line: ") + e.what());
        }
      }
      start = end + 1;
    }
    if (lines.empty() || lines[0].value("type", "") != "session")
      throw Error(ErrorCode::SyntaxError, "decision log must start with a session header");
    const auto& h = lines[0];
    opts.allow_whole_graph = h.value("allow_whole_graph", opts.allow_whole_graph);
    opts.max_states = h.value("max_states", opts.max_states);
    opts.model_name = h.value("model", opts.model_name);
    DecisionSession s = create(model_document, opts);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto& l = lines[i];
      if (l.value("type", "") != "decision") throw Error(ErrorCode::SyntaxError, "unexpected log line type");
      const std::string id = l.at("id").get<std::string>();
      const auto nodes = l.at("nodes").get<std::vector<std::string>>();
      if (NodeSet(nodes.begin(), nodes.end()) != s.candidate(id).sg.nodes)
        throw Error(ErrorCode::NotFound, "logged candidate " + id + " does not match the model");
      s.decide(id, parse_choice(l.at("verdict").get<std::string>()));
    }
    return s;
  }

  nlohmann::ordered_json header() const {
    nlohmann::ordered_json h;
    h["type"] = "session";
    h["model"] = opts_.model_name;
    h["model_sha256"] = sha256_hex(serialize(model_));
    h["max_states"] = opts_.max_states;
    h["allow_whole_graph"] = opts_.allow_whole_graph;
    return h;
  }

 private:
  Candidate& mutable_candidate(const std::string& id) {
    for (auto& c : candidates_)
      if (c.sg.id == id) return c;
    throw Error(ErrorCode::NotFound, "no candidate '" + id + "'");
  }

  HsmModel fold(const std::vector<std::string>& order) const {
    HsmModel h = as_hsm(model_);
    for (const auto& id : order) {
      const SimpleSubgraph& sg = candidate(id).sg;
      h = sg.whole_graph ? wrap_whole(h, sg) : replace_with_hsm(h, sg);
    }
    return h;
  }

  void record(const Candidate& c, Choice choice) {
    nlohmann::ordered_json l;
    l["type"] = "decision";
    l["seq"] = log_.size() + 1;
    l["id"] = c.sg.id;
    l["nodes"] = std::vector<std::string>(c.sg.nodes.begin(), c.sg.nodes.end());
    l["verdict"] = choice == Choice::Accept ? "accept" : "reject";
    log_.push_back(std::move(l));
  }

  FsmModel model_;
  SessionOptions opts_;
  std::vector<Candidate> candidates_;
  HsmModel hsm_;
  std::vector<std::string> accepted_;
  std::vector<nlohmann::ordered_json> log_;
};

inline DecisionSession create_session(std::string_view model_document, SessionOptions opts = {}) {
  return DecisionSession::create(model_document, std::move(opts));
}

}  // namespace ofc
