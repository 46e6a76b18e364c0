#include <random>
#include <string>

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "ofc/hsm_transform.hpp"
#include "test_support.hpp"

namespace {

using ofc::ErrorCode;
using ofc::NodeSet;
using testing_support::code_of;
using testing_support::fixture;
using testing_support::find_nodes;

TEST(HsmTransform, FoldsDiamondBetweenSignAndRelease) {
  const auto m = fixture("escrow_deposit_flow");
  const auto sg = find_nodes(ofc::find_simple_subgraphs(m), {"p", "a", "b", "r"});
  const auto h = ofc::replace_with_hsm(m, sg);
  const std::string id = ofc::hierarchical_id(sg.nodes, "p", "r");
  EXPECT_EQ(id.rfind("hsm_p_r_", 0), 0u);
  EXPECT_EQ(h.top.state_ids(), (NodeSet{"x", id, "y"}));
  EXPECT_TRUE(h.top.find_state(id)->hierarchical);
  EXPECT_EQ(h.top.find_state(id)->actors, (std::set<std::string>{"buyer", "escrowAgent", "seller"}));
  ASSERT_EQ(h.top.transitions.size(), 2u);
  for (const auto& t : h.top.transitions) {
    if (t.method_name == "sign") {
      EXPECT_EQ(t.to, id);
    } else {
      EXPECT_EQ(t.from, id);
    }
  }
  const auto& mp = h.mapping(id);
  EXPECT_EQ(mp.entry, "p");
  EXPECT_EQ(mp.exit, "r");
  EXPECT_EQ(mp.machine.transitions.size(), 4u);
  EXPECT_EQ(ofc::flatten(h), m.canonical());
  EXPECT_EQ(ofc::top_hierarchical(h), std::vector<std::string>{id});
}

TEST(HsmTransform, WholeGraphNeedsTheWrapPath) {
  const auto m = fixture("escrow_deposit");
  const auto sg = ofc::find_simple_subgraphs(m)[0];
  EXPECT_EQ(code_of([&] { ofc::replace_with_hsm(m, sg); }), ErrorCode::WholeGraph);
  const auto h = ofc::wrap_whole(ofc::as_hsm(m), sg);
  EXPECT_EQ(h.top.states.size(), 1u);
  EXPECT_TRUE(h.top.transitions.empty());
  EXPECT_EQ(ofc::flatten(h), m.canonical());
}

TEST(HsmTransform, RejectsNonSimpleOrStaleCandidates) {
  const auto m = fixture("escrow_deposit_flow");
  ofc::SimpleSubgraph bogus{"S9", {"a", "b"}, "a", "b", 0, false};
  EXPECT_EQ(code_of([&] { ofc::replace_with_hsm(m, bogus); }), ErrorCode::NotFound);
  ofc::SimpleSubgraph ghost{"S9", {"p", "zz"}, "p", "zz", 0, false};
  EXPECT_EQ(code_of([&] { ofc::replace_with_hsm(m, ghost); }), ErrorCode::NotFound);
  const auto sg = find_nodes(ofc::find_simple_subgraphs(m), {"p", "a", "b", "r"});
  const auto h = ofc::replace_with_hsm(m, sg);
  EXPECT_EQ(code_of([&] { ofc::replace_with_hsm(h, sg); }), ErrorCode::AlreadyDecided);
}

TEST(HsmTransform, TwoLevelNestingAndOrderIndependence) {
  const auto m = fixture("escrow_deposit_flow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto inner = find_nodes(sgs, {"p", "a", "b", "r"});
  const auto outer = find_nodes(sgs, {"x", "p", "a", "b", "r"});

  const auto child_first = ofc::replace_with_hsm(ofc::replace_with_hsm(m, inner), outer);
  EXPECT_EQ(child_first.mappings.size(), 2u);
  const auto outer_id = ofc::hierarchical_id(outer.nodes, "x", "r");
  const auto inner_id = ofc::hierarchical_id(inner.nodes, "p", "r");
  EXPECT_EQ(child_first.top.state_ids(), (NodeSet{outer_id, "y"}));
  EXPECT_EQ(child_first.mapping(outer_id).machine.state_ids(), (NodeSet{"x", inner_id}));
  EXPECT_EQ(child_first.mapping(outer_id).exit, inner_id);
  EXPECT_EQ(ofc::resolve_exit(child_first, outer_id), "r");
  EXPECT_EQ(ofc::flatten(child_first), m.canonical());

  const auto parent_only = ofc::replace_with_hsm(m, outer);
  EXPECT_EQ(ofc::flatten(parent_only), ofc::flatten(child_first));
  // Once the parent is folded its members are no longer separately addressable.
  EXPECT_EQ(code_of([&] { ofc::replace_with_hsm(parent_only, inner); }), ErrorCode::OverlapConflict);
}

TEST(HsmTransform, BoundarySharedHandoff) {
  const auto m = fixture("escrow_deposit_flow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto diamond = find_nodes(sgs, {"p", "a", "b", "r"});
  const auto release = find_nodes(sgs, {"r", "y"});
  const auto h = ofc::replace_with_hsm(ofc::replace_with_hsm(m, diamond), release);
  const auto d_id = ofc::hierarchical_id(diamond.nodes, "p", "r");
  const auto r_id = ofc::hierarchical_id(release.nodes, "r", "y");
  ASSERT_EQ(h.handoffs.size(), 1u);
  EXPECT_EQ(h.handoffs[0], (ofc::Handoff{d_id, r_id}));
  EXPECT_EQ(h.mapping(r_id).shared, (NodeSet{"r"}));
  EXPECT_EQ(h.mapping(r_id).entry, "r");
  EXPECT_EQ(ofc::region_nodes(h, r_id), (NodeSet{"y"}));
  EXPECT_EQ(ofc::owners(h).at("r"), d_id);
  EXPECT_EQ(ofc::flatten(h), m.canonical());
  EXPECT_NO_THROW(ofc::require_valid_hsm(h));
}

TEST(HsmTransform, BoundarySharedAtDepositsDone) {
  const auto m = fixture("buyer_seller_escrow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto deposits = find_nodes(sgs, {"contract_signed", "buyer_deposited", "seller_deposited", "deposits_done"});
  const auto legs = find_nodes(sgs, {"deposits_done", "customs_export", "in_transit", "customs_import", "buyer_pickup"});
  const auto h1 = ofc::replace_with_hsm(ofc::replace_with_hsm(m, deposits), legs);
  const auto h2 = ofc::replace_with_hsm(ofc::replace_with_hsm(m, legs), deposits);
  EXPECT_EQ(ofc::flatten(h1), m.canonical());
  EXPECT_EQ(ofc::flatten(h2), m.canonical());
  EXPECT_EQ(h1.handoffs.size(), 1u);
  EXPECT_EQ(h2.handoffs.size(), 1u);
}

TEST(HsmTransform, FlatInputIsIdentity) {
  for (const auto& name : testing_support::fixture_names()) {
    const auto m = fixture(name);
    EXPECT_EQ(ofc::flatten(ofc::as_hsm(m)), m.canonical()) << name;
    EXPECT_EQ(ofc::parse_hsm(ofc::serialize(m)).mappings.size(), 0u) << name;
  }
}

TEST(HsmTransform, JsonRoundTrip) {
  const auto m = fixture("buyer_seller_escrow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  auto h = ofc::replace_with_hsm(m, find_nodes(sgs, {"price_agreed", "buyer_signed", "seller_signed", "contract_signed"}));
  h = ofc::replace_with_hsm(h, find_nodes(sgs, {"contract_signed", "buyer_deposited", "seller_deposited", "deposits_done"}));
  const std::string text = ofc::serialize_hsm(h);
  const auto back = ofc::parse_hsm(text);
  EXPECT_EQ(ofc::serialize_hsm(back), text);
  EXPECT_EQ(ofc::flatten(back), m.canonical());
  EXPECT_EQ(back.handoffs, h.handoffs);
}

TEST(HsmTransform, BrokenMapping) {
  const auto m = fixture("escrow_deposit_flow");
  const auto h = ofc::replace_with_hsm(m, find_nodes(ofc::find_simple_subgraphs(m), {"p", "a", "b", "r"}));
  auto doc = nlohmann::json::parse(ofc::serialize_hsm(h));
  doc["mappings"] = nlohmann::json::array();
  EXPECT_EQ(code_of([&] { ofc::flatten(ofc::parse_hsm(doc.dump())); }), ErrorCode::BrokenMapping);
  EXPECT_EQ(code_of([&] { ofc::require_valid_hsm(ofc::parse_hsm(doc.dump())); }), ErrorCode::BrokenMapping);
}

TEST(HsmTransform, EquivalenceIgnoresIdsOfTransitions) {
  auto a = fixture("chain5");
  auto b = a;
  for (auto& t : b.transitions) t.id = "z" + t.id;
  EXPECT_TRUE(ofc::equivalent(a, b));
  b.transitions[0].method_name = "other";
  EXPECT_FALSE(ofc::equivalent(a, b));
}

// Fold a random sequence of compatible subgraphs; flattening always gives the
// original model back and the document round-trips.
TEST(HsmProperty, RandomFoldsRoundTrip) {
  std::mt19937_64 rng(401);
  int folds = 0;
  for (int i = 0; i < 150; ++i) {
    const auto m = oracle::random_model(rng, {4, 8, i % 2 == 0, 1.0});
    auto sgs = ofc::find_simple_subgraphs(m);
    std::shuffle(sgs.begin(), sgs.end(), rng);
    auto h = ofc::as_hsm(m);
    for (const auto& sg : sgs) {
      if (sg.whole_graph) continue;
      try {
        h = ofc::replace_with_hsm(h, sg);
        ++folds;
      } catch (const ofc::Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::OverlapConflict || e.code() == ErrorCode::AlreadyDecided) << e.what();
        continue;
      }
      ASSERT_EQ(ofc::flatten(h), m.canonical()) << oracle::describe(m);
      ASSERT_NO_THROW(ofc::require_valid_hsm(h));
    }
    EXPECT_EQ(ofc::flatten(ofc::parse_hsm(ofc::serialize_hsm(h))), m.canonical());
  }
  EXPECT_GT(folds, 100);
}

}  // namespace
