#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "ofc/subgraph_discovery.hpp"
#include "test_support.hpp"

namespace {

using ofc::ErrorCode;
using ofc::NodeSet;
using ofc::RelationKind;
using testing_support::code_of;
using testing_support::fixture;
using testing_support::find_nodes;

// Chain s0 -> s1 -> ... -> s(n-1).
ofc::FsmModel chain(int n) {
  ofc::FsmModel m;
  for (int i = 0; i < n; ++i) {
    ofc::StateNode s;
    s.id = "s" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    s.label = s.id;
    m.states.push_back(s);
  }
  m.initial_state = m.states[0].id;
  for (int i = 0; i + 1 < n; ++i) {
    ofc::Transition t;
    t.id = "t" + std::to_string(i);
    t.from = m.states[i].id;
    t.to = m.states[i + 1].id;
    t.method_name = "step";
    t.actor = "x";
    m.transitions.push_back(t);
  }
  return m;
}

TEST(EnumerateSubsets, CountsAndCap) {
  EXPECT_EQ(ofc::enumerate_subsets(chain(3)).size(), 4u);
  EXPECT_EQ(ofc::enumerate_subsets(chain(5)).size(), 26u);
  EXPECT_EQ(ofc::enumerate_subsets(chain(16)).size(), (1u << 16) - 17u);
  try {
    ofc::enumerate_subsets(chain(17));
    FAIL();
  } catch (const ofc::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos);
  }
  EXPECT_EQ(ofc::enumerate_subsets(chain(17), 17).size(), (1u << 17) - 18u);
}

TEST(IsSimpleSubgraph, ChainInterior) {
  const auto b = ofc::is_simple_subgraph(chain(4), {"s01", "s02"});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->entry, "s01");
  EXPECT_EQ(b->exit, "s02");
}

TEST(IsSimpleSubgraph, DiamondSidesAreNotSimple) {
  const auto m = fixture("escrow_deposit");
  EXPECT_FALSE(ofc::is_simple_subgraph(m, {"a", "b"}));
  EXPECT_FALSE(ofc::is_simple_subgraph(m, {"p", "a"}));
  EXPECT_FALSE(ofc::is_simple_subgraph(m, {"p", "a", "r"}));
  const auto whole = ofc::is_simple_subgraph(m, {"p", "a", "b", "r"});
  ASSERT_TRUE(whole);
  EXPECT_EQ(*whole, (ofc::Boundary{"p", "r"}));
}

TEST(IsSimpleSubgraph, RejectsUnknownIdsAndDisconnectedSets) {
  EXPECT_EQ(code_of([] { ofc::is_simple_subgraph(chain(3), {"s00", "zz"}); }), ErrorCode::NotASubset);
  // Two separate edges: one entry and one exit overall would need connectivity.
  EXPECT_FALSE(ofc::is_simple_subgraph(chain(4), {"s00", "s03"}));
}

TEST(FindSimpleSubgraphs, EscrowHasOnlyTheWholeDiamond) {
  const auto sgs = ofc::find_simple_subgraphs(fixture("escrow_deposit"));
  ASSERT_EQ(sgs.size(), 1u);
  EXPECT_EQ(sgs[0].id, "S1");
  EXPECT_EQ(sgs[0].entry, "p");
  EXPECT_EQ(sgs[0].exit, "r");
  EXPECT_TRUE(sgs[0].whole_graph);
  EXPECT_EQ(sgs[0].count, 0u);
}

TEST(FindSimpleSubgraphs, ChainIntervalsRankedByCount) {
  const auto sgs = ofc::find_simple_subgraphs(fixture("chain5"));
  ASSERT_EQ(sgs.size(), 10u);
  EXPECT_EQ(sgs[0].nodes, (NodeSet{"a", "b", "c", "d", "e"}));
  EXPECT_EQ(sgs[0].count, 9u);
  EXPECT_EQ(sgs[1].nodes, (NodeSet{"a", "b", "c", "d"}));
  EXPECT_EQ(sgs[2].nodes, (NodeSet{"b", "c", "d", "e"}));
  EXPECT_EQ(sgs[1].count, 5u);
  for (std::size_t i = 0; i < sgs.size(); ++i) EXPECT_EQ(sgs[i].id, "S" + std::to_string(i + 1));
  for (std::size_t i = 1; i < sgs.size(); ++i) EXPECT_FALSE(ofc::ranks_before(sgs[i], sgs[i - 1]));
}

TEST(FindSimpleSubgraphs, InvalidModelAndCap) {
  auto m = fixture("chain5");
  m.transitions[0].to = "ghost";
  EXPECT_EQ(code_of([&] { ofc::find_simple_subgraphs(m); }), ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { ofc::find_simple_subgraphs(fixture("real_estate")); }), ErrorCode::TooLarge);
  EXPECT_FALSE(ofc::find_simple_subgraphs(fixture("real_estate"), 22).empty());
}

TEST(FindSimpleSubgraphs, SelfLoopStaysInternal) {
  const auto m = fixture("buyer_seller_escrow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto sg = find_nodes(sgs, {"posted", "negotiating", "price_agreed"});
  EXPECT_EQ(sg.entry, "posted");
  EXPECT_EQ(sg.exit, "price_agreed");
  EXPECT_NO_THROW(find_nodes(sgs, {"negotiating", "price_agreed"}));
}

TEST(Relations, Kinds) {
  const auto m = fixture("escrow_deposit_flow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto diamond = find_nodes(sgs, {"p", "a", "b", "r"});
  const auto with_sign = find_nodes(sgs, {"x", "p", "a", "b", "r"});
  const auto sign = find_nodes(sgs, {"x", "p"});
  const auto release = find_nodes(sgs, {"r", "y"});
  EXPECT_EQ(ofc::classify_relation(m, diamond, with_sign).kind, RelationKind::Nested);
  EXPECT_EQ(ofc::classify_relation(m, diamond, diamond).kind, RelationKind::Nested);
  EXPECT_EQ(ofc::classify_relation(m, sign, diamond).kind, RelationKind::BoundaryShared);
  EXPECT_EQ(ofc::classify_relation(m, diamond, release).kind, RelationKind::BoundaryShared);
  EXPECT_EQ(ofc::classify_relation(m, sign, release).kind, RelationKind::Disjoint);

  const auto c = fixture("chain5");
  const auto csgs = ofc::find_simple_subgraphs(c);
  const auto r = ofc::classify_relation(c, find_nodes(csgs, {"a", "b", "c"}), find_nodes(csgs, {"b", "c", "d"}));
  EXPECT_EQ(r.kind, RelationKind::OverlapSimple);
  EXPECT_EQ(r.shared, (NodeSet{"b", "c"}));
}

TEST(Relations, AllPairsAreSymmetric) {
  for (const auto& name : {"chain5", "escrow_deposit_flow", "air_ground", "mortgage_variant"}) {
    const auto m = fixture(name);
    const auto sgs = ofc::find_simple_subgraphs(m);
    for (const auto& a : sgs)
      for (const auto& b : sgs) {
        const auto ab = ofc::classify_relation(m, a, b);
        const auto ba = ofc::classify_relation(m, b, a);
        EXPECT_EQ(ab.kind, ba.kind) << name << " " << a.id << " " << b.id;
        EXPECT_EQ(ab.shared, ba.shared);
      }
    const auto rows = ofc::all_relations(m, sgs);
    EXPECT_EQ(rows.size(), sgs.size() * (sgs.size() - 1) / 2) << name;
  }
}

TEST(Relations, BoundarySharedAtDepositsDone) {
  const auto m = fixture("buyer_seller_escrow");
  const auto sgs = ofc::find_simple_subgraphs(m);
  const auto deposits = find_nodes(sgs, {"contract_signed", "buyer_deposited", "seller_deposited", "deposits_done"});
  const auto export_leg = find_nodes(sgs, {"deposits_done", "customs_export"});
  const auto r = ofc::classify_relation(m, deposits, export_leg);
  EXPECT_EQ(r.kind, RelationKind::BoundaryShared);
  EXPECT_EQ(r.shared, (NodeSet{"deposits_done"}));
}

TEST(SubgraphJson, Shape) {
  const auto sgs = ofc::find_simple_subgraphs(fixture("escrow_deposit"));
  const auto j = ofc::subgraphs_to_json(sgs);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["id"], "S1");
  EXPECT_EQ(j[0]["nodes"], nlohmann::json::array({"a", "b", "p", "r"}));
  EXPECT_EQ(j[0]["entry"], "p");
  EXPECT_EQ(j[0]["whole_graph"], true);
}

// Every simple subset the definitional oracle finds is reported, nothing else
// is, and the counts agree.
TEST(DiscoveryProperty, MatchesDefinitionalOracle) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 150; ++i) {
    const auto m = oracle::random_model(rng, {4, 8, i % 2 == 0, 1.0});
    const auto sgs = ofc::find_simple_subgraphs(m);
    const auto regions = oracle::all_regions(m);
    ASSERT_EQ(sgs.size(), regions.size()) << oracle::describe(m);
    std::map<NodeSet, oracle::Region> by_nodes;
    for (const auto& r : regions) by_nodes[r.nodes] = r;
    for (const auto& sg : sgs) {
      auto it = by_nodes.find(sg.nodes);
      ASSERT_NE(it, by_nodes.end()) << oracle::describe(m);
      EXPECT_EQ(sg.entry, it->second.bounds.entry);
      EXPECT_EQ(sg.exit, it->second.bounds.exit);
      EXPECT_EQ(sg.count, it->second.count);
    }
  }
}

TEST(DiscoveryProperty, IsSimpleAgreesWithOracleOnEverySubset) {
  std::mt19937_64 rng(102);
  for (int i = 0; i < 60; ++i) {
    const auto m = oracle::random_model(rng, {3, 7, false, 1.5});
    for (const auto& s : oracle::all_subsets(m)) {
      const auto got = ofc::is_simple_subgraph(m, s);
      const auto want = oracle::simple(m, s);
      ASSERT_EQ(got.has_value(), want.has_value()) << oracle::describe(m);
      if (got) {
        EXPECT_EQ(got->entry, want->entry);
        EXPECT_EQ(got->exit, want->exit);
      }
    }
  }
}

// Shuffling declaration order changes nothing.
TEST(DiscoveryProperty, DeterministicUnderReordering) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 60; ++i) {
    auto m = oracle::random_model(rng, {4, 8, false, 1.0});
    const auto first = ofc::find_simple_subgraphs(m);
    std::shuffle(m.states.begin(), m.states.end(), rng);
    std::shuffle(m.transitions.begin(), m.transitions.end(), rng);
    EXPECT_EQ(ofc::find_simple_subgraphs(m), first);
  }
}

TEST(DiscoveryProperty, CountEqualsProperSubgraphsInList) {
  std::mt19937_64 rng(104);
  for (int i = 0; i < 60; ++i) {
    const auto m = oracle::random_model(rng, {4, 8, true, 1.0});
    const auto sgs = ofc::find_simple_subgraphs(m);
    for (const auto& a : sgs) {
      const auto n = std::count_if(sgs.begin(), sgs.end(),
                                   [&](const auto& b) { return ofc::is_proper_subgraph(b.nodes, a.nodes); });
      EXPECT_EQ(a.count, static_cast<std::uint64_t>(n));
    }
  }
}

}  // namespace
