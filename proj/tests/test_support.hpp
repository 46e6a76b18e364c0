#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ofc/bridge_codegen.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/subgraph_discovery.hpp"

namespace testing_support {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(OFC_FIXTURE_DIR) / name;
}

inline std::string fixture_text(const std::string& name) { return ofc::read_text(fixture_path(name)); }

inline ofc::FsmModel fixture(const std::string& name) {
  return ofc::parse_model(fixture_text(name + ".json"));
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{
      "air_ground",  "badges",           "buyer_seller_escrow", "chain5",
      "delivery_chain", "escrow_deposit", "escrow_deposit_flow", "inspectors",
      "mortgage_variant", "real_estate"};
  return names;
}

inline int cap_for(const ofc::FsmModel& m) { return std::max<int>(ofc::kDefaultEnumerationCap, m.states.size()); }

inline ofc::SimpleSubgraph find_nodes(const std::vector<ofc::SimpleSubgraph>& sgs, const ofc::NodeSet& nodes) {
  for (const auto& sg : sgs)
    if (sg.nodes == nodes) return sg;
  throw ofc::Error(ofc::ErrorCode::NotFound, "no subgraph with the requested nodes");
}

// Code of the ofc::Error thrown by f; records a failure when none is thrown.
inline std::optional<ofc::ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ofc::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ofc::Error";
  return std::nullopt;
}

}  // namespace testing_support
