#pragma once

// Local HTTP API over a decision session. Routing lives in a pure handler so
// it can be exercised without sockets; bind() attaches it to cpp-httplib.

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "ofc/error.hpp"
#include "ofc/session.hpp"

namespace ofc {

constexpr int kDefaultPort = 7420;

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AlreadyDecided:
    case ErrorCode::Absorbed:
    case ErrorCode::OverlapConflict:
    case ErrorCode::WholeGraphNotConfirmed:
    case ErrorCode::OverlappingDecisions: return 409;
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

inline Response error_response(const Error& e) {
  nlohmann::ordered_json b;
  b["error"] = e.what();
  b["code"] = e.name();
  return {http_status(e.code()), b};
}

class Service {
 public:
  using Query = std::map<std::string, std::string>;

  // `log_path`, when set, receives the decision log after every mutation.
  explicit Service(DecisionSession session, std::optional<std::filesystem::path> log_path = std::nullopt)
      : session_(std::move(session)), log_path_(std::move(log_path)) {}

  Response handle(const std::string& method, const std::string& path, const Query& query,
                  const std::string& body) {
    try {
      if (method == "GET") {
        std::shared_lock lock(mu_);
        return get(path, query);
      }
      if (method == "POST" && path == "/api/decisions") {
        std::unique_lock lock(mu_);
        return post_decision(body);
      }
      throw Error(ErrorCode::NotFound, "no route " + method + " " + path);
    } catch (const Error& e) {
      return error_response(e);
    } catch (const std::exception& e) {
      return error_response(Error(ErrorCode::SyntaxError, e.what()));
    }
  }

  void bind(httplib::Server& server, const std::optional<std::filesystem::path>& ui_dir = std::nullopt) {
    auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
      Query q;
      for (const auto& [k, v] : req.params) q[k] = v;
      const Response r = handle(req.method, req.path, q, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/api/.*)", adapt);
    server.Post(R"(/api/.*)", adapt);
    if (ui_dir) server.set_mount_point("/", ui_dir->string());
  }

  DecisionSession snapshot() const {
    std::shared_lock lock(mu_);
    return session_;
  }

 private:
  Response get(const std::string& path, const Query& query) const {
    if (path == "/api/model") return {200, model_to_json(session_.model())};
    if (path == "/api/candidates") return {200, session_.candidates_json()};
    if (path == "/api/session") return {200, session_.session_json()};
    if (path == "/api/export") {
      nlohmann::ordered_json o;
      const auto files = session_.export_bundle();
      o["manifest"] = nlohmann::ordered_json::parse(files.at("manifest.json"));
      o["files"] = nlohmann::ordered_json::object();
      for (const auto& [name, text] : files)
        if (name != "manifest.json") o["files"][name] = text;
      return {200, o};
    }
    const std::string prefix = "/api/candidates/";
    const std::string suffix = "/cost";
    if (path.rfind(prefix, 0) == 0 && path.size() > prefix.size() + suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
      std::optional<Words> words;
      std::optional<NodeSet> mid;
      if (auto it = query.find("words"); it != query.end()) {
        const std::string& w = it->second;
        if (w.empty() || w.find_first_not_of("0123456789") != std::string::npos || w.size() > 18)
          throw Error(ErrorCode::InvalidProfile, "words must be a nonnegative integer");
        words = std::stoull(w);
      }
      if (auto it = query.find("midpattern"); it != query.end()) mid = parse_id_list(it->second);
      return {200, comparison_to_json(session_.what_if(id, words, mid))};
    }
    throw Error(ErrorCode::NotFound, "no route GET " + path);
  }

  Response post_decision(const std::string& body) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SyntaxError, std::string("malformed request body: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() || !doc.contains("verdict") ||
        !doc["verdict"].is_string())
      throw Error(ErrorCode::SyntaxError, "body must be {\"id\": string, \"verdict\": \"accept\"|\"reject\"}");
    session_.decide(doc["id"].get<std::string>(), parse_choice(doc["verdict"].get<std::string>()));
    if (log_path_) write_text(*log_path_, session_.log_text());
    return {200, session_.session_json()};
  }

  mutable std::shared_mutex mu_;
  DecisionSession session_;
  std::optional<std::filesystem::path> log_path_;
};

}  // namespace ofc
