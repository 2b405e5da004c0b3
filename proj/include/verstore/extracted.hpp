#ifndef VERSTORE_EXTRACTED_HPP
#define VERSTORE_EXTRACTED_HPP

#include "verstore/rational.hpp"
#include "verstore/tree.hpp"

namespace verstore {

// A bidirectional tree pulled out of an arbitrary version graph, remembering
// which reverse deltas had to be synthesized (absent in the source graph).
struct ExtractedTree {
  BidirectionalTree tree;
  std::vector<char> synthesized;  // per tree-graph edge index
};

// Minimum spanning arborescence under s+r rooted at `root`, completed into a
// bidirectional tree. A missing reverse delta (v,u) is synthesized as
// (s = s_u, r = 0): pricewise it re-materializes u, so extraction never
// invents a cheaper-than-possible delta. Throws UnreachableNodeError.
ExtractedTree extract_bidirectional_tree(const VersionGraph& g, NodeId root);

// Rewrites a tree solution so it is valid on the original graph: storing a
// synthesized delta becomes materializing its head (same storage, retrieval
// only drops).
Solution to_original(const ExtractedTree& ext, Solution tree_sol);

struct FrontierPoint {
  Cost storage = 0;
  Cost retrieval_sum = 0;
  Solution solution;
};

// Pareto points sorted by storage ascending, retrieval_sum strictly
// decreasing; costs are exact re-evaluations on the original graph.
using Frontier = std::vector<FrontierPoint>;

// One DP pass over the extracted tree with geometrically bucketed storage
// (ratio 1+epsilon, bucket lower bound as representative) and pruning of
// partial states above prune_factor times the min-storage arborescence
// weight. Every emitted solution is feasible on g.
Frontier dp_msr_heuristic(const VersionGraph& g, NodeId root, const Rational& epsilon,
                          const Rational& prune_factor);

// Exact BMR on the extracted tree; heuristic for g.
Solution dp_bmr_heuristic(const VersionGraph& g, NodeId root, Cost retrieval_budget);

}  // namespace verstore

#endif
