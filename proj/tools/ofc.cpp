// ofc: command-line front end for discovery, classification, costing,
// decision sessions, export and simulation.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "ofc/ofc.hpp"
#include "ofc/service.hpp"

namespace fs = std::filesystem;
using ofc::Error;
using ofc::ErrorCode;

namespace {

ofc::FsmModel load_model(const fs::path& p) { return ofc::parse_model(ofc::read_text(p)); }

ofc::GasTable load_table(const std::string& path) {
  return path.empty() ? ofc::GasTable{} : ofc::parse_gas_table(ofc::read_text(path));
}

void emit(const nlohmann::ordered_json& doc, const std::string& out = "") {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    ofc::write_text(out, doc.dump(2) + "\n");
  }
}

fs::path log_path_for(const fs::path& model) {
  return model.parent_path() / (model.stem().string() + ".decisions.jsonl");
}

ofc::DecisionSession open_session(const fs::path& model_path, ofc::SessionOptions opts) {
  opts.model_name = model_path.filename().string();
  const std::string doc = ofc::read_text(model_path);
  const fs::path log = log_path_for(model_path);
  if (fs::exists(log)) return ofc::DecisionSession::replay(doc, ofc::read_text(log), opts);
  return ofc::DecisionSession::create(doc, opts);
}

ofc::SimpleSubgraph find_candidate(const std::vector<ofc::SimpleSubgraph>& sgs, const std::string& id) {
  for (const auto& sg : sgs)
    if (sg.id == id) return sg;
  throw Error(ErrorCode::NotFound, "no simple subgraph '" + id + "'");
}

httplib::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-chain pattern toolchain for FSM smart-contract models"};
  app.require_subcommand(1);

  std::string model_path, out_path, relations_path, pattern_id, midpattern, gastable_path, trace_path;
  std::string hsm_path, session_path, ui_dir, verdict, candidate_id;
  int max_states = ofc::kDefaultEnumerationCap;
  int port = ofc::kDefaultPort;
  std::optional<ofc::Words> words;
  bool serve = false, allow_whole = false;

  auto* validate = app.add_subcommand("validate", "Check a model and print the validation report");
  validate->add_option("model", model_path, "Model document")->required();

  auto* discover = app.add_subcommand("discover", "List ranked simple subgraphs");
  discover->add_option("model", model_path, "Model document")->required();
  discover->add_option("--max-states", max_states, "Enumeration cap");
  discover->add_option("--out", out_path, "Write subgraphs here instead of stdout");
  discover->add_option("--relations", relations_path, "Also write pairwise relations here");

  auto* classify = app.add_subcommand("classify", "Label every simple subgraph with its pattern");
  classify->add_option("model", model_path, "Model document")->required();
  classify->add_option("--max-states", max_states, "Enumeration cap");

  auto* cost = app.add_subcommand("cost", "Compare on-chain and off-chain gas for one subgraph");
  cost->add_option("model", model_path, "Model document")->required();
  cost->add_option("--pattern", pattern_id, "Subgraph id (S<rank>)")->required();
  cost->add_option("--words", words, "Uniform data size M in words");
  cost->add_option("--midpattern", midpattern, "Comma-separated states with on-chain access");
  cost->add_option("--gastable", gastable_path, "Gas table config document");
  cost->add_option("--max-states", max_states, "Enumeration cap");

  auto* session = app.add_subcommand("session", "Open a decision session; --serve starts the HTTP API");
  session->add_option("model", model_path, "Model document")->required();
  session->add_flag("--serve", serve, "Serve the HTTP API on localhost");
  session->add_option("--port", port, "Port for --serve");
  session->add_option("--ui-dir", ui_dir, "Static UI assets to mount at /");
  session->add_flag("--allow-whole-graph", allow_whole, "Permit accepting the whole-graph candidate");
  session->add_option("--max-states", max_states, "Enumeration cap");
  session->add_option("--gastable", gastable_path, "Gas table config document");

  auto* decide = app.add_subcommand("decide", "Record one decision in the model's session log");
  decide->add_option("model", model_path, "Model document")->required();
  decide->add_option("id", candidate_id, "Candidate id")->required();
  decide->add_option("verdict", verdict, "accept or reject")->required()->check(CLI::IsMember({"accept", "reject"}));
  decide->add_flag("--allow-whole-graph", allow_whole, "Permit accepting the whole-graph candidate");
  decide->add_option("--max-states", max_states, "Enumeration cap");

  auto* exp = app.add_subcommand("export", "Write the derived HSM, bridge artifacts and reports");
  exp->add_option("session", session_path, "Decision log (or a model with a log beside it)")->required();
  exp->add_option("--out", out_path, "Output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run a trace against a (hierarchical) model");
  simulate->add_option("hsm", hsm_path, "HSM or plain model document")->required();
  simulate->add_option("--trace", trace_path, "Trace document")->required();
  simulate->add_option("--words", words, "Uniform data size M in words");
  simulate->add_option("--midpattern", midpattern, "Comma-separated states with on-chain access");
  simulate->add_option("--gastable", gastable_path, "Gas table config document");

  auto* gastable = app.add_subcommand("gastable", "Print the effective gas table");
  gastable->add_option("--config", gastable_path, "Gas table config document");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto report = ofc::validate(load_model(model_path));
      emit(ofc::report_to_json(report));
      return report.ok ? 0 : 1;
    }
    if (*discover) {
      const auto model = load_model(model_path);
      const auto sgs = ofc::find_simple_subgraphs(model, max_states);
      emit(ofc::subgraphs_to_json(sgs), out_path);
      if (!relations_path.empty()) emit(ofc::relations_to_json(ofc::all_relations(model, sgs)), relations_path);
      return 0;
    }
    if (*classify) {
      const auto model = load_model(model_path);
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& sg : ofc::find_simple_subgraphs(model, max_states))
        arr.push_back(ofc::pattern_to_json(sg.id, ofc::classify_pattern(model, sg)));
      emit(arr);
      return 0;
    }
    if (*cost) {
      const auto model = load_model(model_path);
      ofc::require_valid(model);
      const auto sg = find_candidate(ofc::find_simple_subgraphs(model, max_states), pattern_id);
      ofc::DataProfile p = ofc::profile_from_model(model);
      if (words) p = ofc::with_uniform_words(std::move(p), *words);
      p.midpattern = ofc::parse_id_list(midpattern);
      emit(ofc::comparison_to_json(ofc::cost_off_chain(model, sg, p, load_table(gastable_path))));
      return 0;
    }
    if (*session) {
      ofc::SessionOptions opts;
      opts.max_states = max_states;
      opts.allow_whole_graph = allow_whole;
      opts.table = load_table(gastable_path);
      auto s = open_session(model_path, opts);
      if (!serve) {
        emit(s.session_json());
        return 0;
      }
      ofc::Service service(std::move(s), log_path_for(model_path));
      httplib::Server server;
      service.bind(server, ui_dir.empty() ? std::nullopt : std::optional<fs::path>(ui_dir));
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      std::cerr << "serving on http://127.0.0.1:" << port << "\n";
      if (!server.listen("127.0.0.1", port)) throw Error(ErrorCode::IoError, "cannot bind port " + std::to_string(port));
      return 0;
    }
    if (*decide) {
      ofc::SessionOptions opts;
      opts.max_states = max_states;
      opts.allow_whole_graph = allow_whole;
      auto s = open_session(model_path, opts);
      s.decide(candidate_id, ofc::parse_choice(verdict));
      ofc::write_text(log_path_for(model_path), s.log_text());
      emit(s.session_json());
      return 0;
    }
    if (*exp) {
      fs::path log = session_path;
      if (log.extension() != ".jsonl") log = log_path_for(session_path);
      const std::string log_text = ofc::read_text(log);
      const auto header = nlohmann::json::parse(log_text.substr(0, log_text.find('\n')));
      const fs::path model = log.parent_path() / header.at("model").get<std::string>();
      ofc::SessionOptions opts;
      opts.model_name = model.filename().string();
      const auto s = ofc::DecisionSession::replay(ofc::read_text(model), log_text, opts);
      emit(s.export_to(out_path));
      return 0;
    }
    if (*simulate) {
      const auto hsm = ofc::parse_hsm(ofc::read_text(hsm_path));
      ofc::require_valid_hsm(hsm);
      ofc::DataProfile p = ofc::profile_from_model(ofc::flatten(hsm));
      if (words) p = ofc::with_uniform_words(std::move(p), *words);
      p.midpattern = ofc::parse_id_list(midpattern);
      const auto trace = ofc::parse_trace(ofc::read_text(trace_path));
      const auto result = ofc::run_trace(hsm, ofc::derive_all_specs(hsm), trace, p, load_table(gastable_path));
      emit(ofc::trace_result_to_json(result));
      return result.state.status == ofc::SimStatus::Failed ? 1 : 0;
    }
    if (*gastable) {
      emit(ofc::gas_table_to_json(load_table(gastable_path)));
      return 0;
    }
  } catch (const Error& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["code"] = e.name();
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", "Internal"}}.dump() << "\n";
    return 2;
  }
  return 0;
}
