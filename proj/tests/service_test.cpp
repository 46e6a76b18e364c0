#include <filesystem>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "ofc/service.hpp"
#include "test_support.hpp"

namespace {

using ofc::Service;
using testing_support::fixture_text;

Service make_service(const std::string& name = "escrow_deposit_flow",
                     std::optional<std::filesystem::path> log = std::nullopt) {
  ofc::SessionOptions opts;
  opts.model_name = name + ".json";
  return Service(ofc::DecisionSession::create(fixture_text(name + ".json"), opts), std::move(log));
}

std::string diamond_id(const Service& svc) {
  for (const auto& c : svc.snapshot().candidates())
    if (c.sg.nodes == ofc::NodeSet{"p", "a", "b", "r"}) return c.sg.id;
  return "";
}

TEST(Service, ReadRoutes) {
  auto svc = make_service();
  auto r = svc.handle("GET", "/api/model", {}, "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["initial_state"], "x");
  r = svc.handle("GET", "/api/candidates", {}, "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.size(), svc.snapshot().candidates().size());
  r = svc.handle("GET", "/api/session", {}, "");
  EXPECT_EQ(r.body["cursor"], 0);
  r = svc.handle("GET", "/api/export", {}, "");
  EXPECT_TRUE(r.body["files"].contains("derived.hsm.json"));
  EXPECT_TRUE(r.body["manifest"].contains("patterns"));
}

TEST(Service, WhatIfCost) {
  auto svc = make_service();
  const std::string id = diamond_id(svc);
  auto r = svc.handle("GET", "/api/candidates/" + id + "/cost", {{"words", "1"}, {"midpattern", "a,b"}}, "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["off_chain_total"], 80845);
  EXPECT_EQ(r.body["saving"], -45);
  r = svc.handle("GET", "/api/candidates/" + id + "/cost", {{"words", "-3"}}, "");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "InvalidProfile");
  r = svc.handle("GET", "/api/candidates/S404/cost", {}, "");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["code"], "NotFound");
}

TEST(Service, DecisionsAndStatusCodes) {
  const auto log = std::filesystem::temp_directory_path() / "ofc_service_test.decisions.jsonl";
  std::filesystem::remove(log);
  auto svc = make_service("escrow_deposit_flow", log);
  const std::string id = diamond_id(svc);
  auto r = svc.handle("POST", "/api/decisions", {}, R"({"id":")" + id + R"(","verdict":"accept"})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["decisions"][id], "accepted");
  EXPECT_TRUE(std::filesystem::exists(log));
  r = svc.handle("POST", "/api/decisions", {}, R"({"id":")" + id + R"(","verdict":"reject"})");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "AlreadyDecided");
  r = svc.handle("POST", "/api/decisions", {}, R"({"id":"S1","verdict":"accept"})");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "WholeGraphNotConfirmed");
  r = svc.handle("POST", "/api/decisions", {}, R"({"id":"S1","verdict":"maybe"})");
  EXPECT_EQ(r.status, 400);
  r = svc.handle("POST", "/api/decisions", {}, "not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "SyntaxError");
  r = svc.handle("DELETE", "/api/decisions", {}, "");
  EXPECT_EQ(r.status, 404);
  const auto replayed = ofc::DecisionSession::replay(fixture_text("escrow_deposit_flow.json"), ofc::read_text(log));
  EXPECT_EQ(replayed.accepted_order(), std::vector<std::string>{id});
  std::filesystem::remove(log);
}

TEST(Service, LiveServer) {
  auto svc = make_service();
  httplib::Server server;
  svc.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/candidates");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  const auto cands = nlohmann::json::parse(res->body);
  EXPECT_FALSE(cands.empty());

  const std::string id = diamond_id(svc);
  res = client.Get("/api/candidates/" + id + "/cost?words=5");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["saving"], 201895);

  res = client.Post("/api/decisions", R"({"id":")" + id + R"(","verdict":"accept"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Post("/api/decisions", R"({"id":")" + id + R"(","verdict":"accept"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  res = client.Get("/api/nothing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  server.stop();
  t.join();
}

TEST(Service, ServesUiDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "ofc_service_ui_test";
  std::filesystem::create_directories(dir);
  ofc::write_text(dir / "index.html", "<html>ui</html>");
  auto svc = make_service();
  httplib::Server server;
  svc.bind(server, dir);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/index.html");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, "<html>ui</html>");
  server.stop();
  t.join();
  std::filesystem::remove_all(dir);
}

}  // namespace
