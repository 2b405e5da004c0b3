#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "verstore/arborescence.hpp"
#include "verstore/extracted.hpp"
#include "verstore/greedy.hpp"
#include "verstore/oracle.hpp"
#include "verstore/tree_dp.hpp"

using namespace verstore;
using namespace verstore::testing;

TEST_CASE("extraction of a tree is the identity") {
  SplitMix64 rng(1);
  BidirectionalTree t = random_tree(rng, 6, 20, 20);
  ExtractedTree ext = extract_bidirectional_tree(t.graph(), 0);
  CHECK(ext.tree.graph().m() == t.graph().m());
  for (const Edge& e : t.graph().edges()) {
    REQUIRE(ext.tree.graph().has_edge(e.src, e.dst));
    const Edge& o = ext.tree.delta(e.src, e.dst);
    CHECK(o.s == e.s);
    CHECK(o.r == e.r);
  }
  for (char s : ext.synthesized) CHECK(!s);
}

TEST_CASE("off-tree shortcut is excluded") {
  // chain 0-1-2 plus an expensive shortcut (0,2)
  VersionGraph g({10, 10, 10});
  g.add_edge(0, 1, 2, 2);
  g.add_edge(1, 0, 2, 2);
  g.add_edge(1, 2, 2, 2);
  g.add_edge(2, 1, 2, 2);
  g.add_edge(0, 2, 9, 9);
  ExtractedTree ext = extract_bidirectional_tree(g, 0);
  CHECK_FALSE(ext.tree.graph().has_edge(0, 2));
  CHECK(ext.tree.graph().m() == 4);
}

TEST_CASE("missing reverse deltas are synthesized as re-materialization") {
  VersionGraph g({10, 8});
  g.add_edge(0, 1, 3, 2);  // no (1,0)
  ExtractedTree ext = extract_bidirectional_tree(g, 0);
  const Edge& rev = ext.tree.delta(1, 0);
  CHECK(rev.s == 10);
  CHECK(rev.r == 0);
  CHECK(ext.synthesized[*ext.tree.graph().edge_index(1, 0)]);

  // a tree solution storing the synthesized delta maps to materializing 0
  Solution tsol = make_solution({1, kSelf});
  Solution osol = to_original(ext, tsol);
  CHECK(osol.parent == std::vector<NodeId>{kSelf, kSelf});
}

TEST_CASE("unreachable root throws") {
  VersionGraph g({1, 1});
  CHECK_THROWS_AS(extract_bidirectional_tree(g, 0), UnreachableNodeError);
}

TEST_CASE("frontier shape and feasibility") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    VersionGraph g = random_connected(rng, 6, 30, 20, 20);
    Frontier f = dp_msr_heuristic(g, 0, Rational(1, 4), Rational(10));
    REQUIRE(!f.empty());
    for (size_t i = 0; i < f.size(); ++i) {
      CostReport rep = evaluate(g, f[i].solution);  // feasible on the original
      CHECK(rep.storage_total == f[i].storage);
      CHECK(rep.retrieval_sum == f[i].retrieval_sum);
      if (i > 0) {
        CHECK(f[i].storage > f[i - 1].storage);
        CHECK(f[i].retrieval_sum < f[i - 1].retrieval_sum);
      }
    }
  }
}

TEST_CASE("zero-retrieval point appears once everything is affordable") {
  SplitMix64 rng(29);
  VersionGraph g = random_connected(rng, 5, 30, 15, 15);
  Frontier f = dp_msr_heuristic(g, 0, Rational(1, 4), Rational(100));
  REQUIRE(!f.empty());
  CHECK(f.back().retrieval_sum == 0);
}

TEST_CASE("tree input with wide buckets reproduces the exact DP") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + (int)rng.next_in(0, 4);
    BidirectionalTree t = random_tree(rng, n, 15, 15);
    // epsilon small enough that every bucket is a single integer
    Frontier f = dp_msr_heuristic(t.graph(), 0, Rational(1, 1000000), Rational(1000));
    Cost min_storage = evaluate(t.graph(), dp_bmr_exact(t, kInf / 2)).storage_total;
    for (Cost budget : {min_storage, min_storage + 10, min_storage + 25}) {
      Cost best = -1;
      for (const FrontierPoint& p : f)
        if (p.storage <= budget && (best < 0 || p.retrieval_sum < best)) best = p.retrieval_sum;
      Solution exact = dp_msr_tree(t, budget, Rational(1, 1000000));
      CHECK(best == evaluate(t.graph(), exact).retrieval_sum);
    }
  }
}

TEST_CASE("chain fixture frontier hits the optimum") {
  VersionGraph g = fig_chain();
  Frontier f = dp_msr_heuristic(g, 0, Rational(1, 20), Rational(2));
  Cost best = -1;
  for (const FrontierPoint& p : f)
    if (p.storage <= 1109 && (best < 0 || p.retrieval_sum < best)) best = p.retrieval_sum;
  CHECK(best == 9);
}

TEST_CASE("bounded max retrieval heuristic") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 25; ++trial) {
    VersionGraph g = random_connected(rng, 6, 30, 20, 20);
    Cost prev = -1;
    for (Cost budget : {(Cost)0, (Cost)5, (Cost)10, (Cost)20, (Cost)40}) {
      Solution sol = dp_bmr_heuristic(g, 0, budget);
      CostReport rep = evaluate(g, sol);
      CHECK(rep.retrieval_max <= budget);
      if (prev >= 0) CHECK(rep.storage_total <= prev);  // monotone in the budget
      prev = rep.storage_total;
    }
  }
}

TEST_CASE("tree input gives the exact BMR optimum") {
  SplitMix64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + (int)rng.next_in(0, 5);
    BidirectionalTree t = random_tree(rng, n, 15, 15);
    Cost budget = (Cost)rng.next_in(0, 25);
    Solution sol = dp_bmr_heuristic(t.graph(), 0, budget);
    CHECK(evaluate(t.graph(), sol).storage_total ==
          brute_force(t.graph(), {Problem::BMR, budget}).objective);
  }
}
