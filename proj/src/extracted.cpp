#include "verstore/extracted.hpp"

#include <algorithm>

#include "verstore/arborescence.hpp"
#include "verstore/tree_dp.hpp"

namespace verstore {

ExtractedTree extract_bidirectional_tree(const VersionGraph& g, NodeId root) {
  std::vector<int> choice = min_arborescence_edges(g.n(), g.edges(), root, WeightSel::SPlusR);

  VersionGraph tg(g.node_storages());
  struct Pending {
    NodeId u, v;
    Cost s, r;
    bool synth;
  };
  std::vector<Pending> pend;
  for (NodeId v = 0; v < g.n(); ++v) {
    if (v == root) continue;
    const Edge& e = g.edge(choice[v]);
    pend.push_back({e.src, e.dst, e.s, e.r, false});
    if (auto rev = g.edge_index(e.dst, e.src)) {
      const Edge& re = g.edge(*rev);
      pend.push_back({e.dst, e.src, re.s, re.r, false});
    } else {
      pend.push_back({e.dst, e.src, g.node_storage(e.src), 0, true});
    }
  }
  std::vector<char> synth;
  for (const Pending& p : pend) {
    tg.add_edge(p.u, p.v, p.s, p.r);
    synth.push_back(p.synth ? 1 : 0);
  }
  return ExtractedTree{BidirectionalTree::from_graph(std::move(tg), root), std::move(synth)};
}

Solution to_original(const ExtractedTree& ext, Solution tree_sol) {
  const VersionGraph& tg = ext.tree.graph();
  for (NodeId v = 0; v < tg.n(); ++v) {
    if (tree_sol.parent[v] == kSelf) continue;
    if (ext.synthesized[*tg.edge_index(tree_sol.parent[v], v)]) tree_sol.parent[v] = kSelf;
  }
  return make_solution(std::move(tree_sol.parent));
}

Frontier dp_msr_heuristic(const VersionGraph& g, NodeId root, const Rational& epsilon,
                          const Rational& prune_factor) {
  if (prune_factor.num < prune_factor.den) throw Error("prune_factor must be >= 1");
  ExtractedTree ext = extract_bidirectional_tree(g, root);
  BinarizedTree bin = binarize_tree(ext.tree);

  // Geometric storage buckets with ratio 1+epsilon; a partial storage value is
  // represented by its bucket's lower bound (optimistic, corrected by the
  // exact re-evaluation below).
  Cost min_pos = 0;
  auto note = [&](Cost c) {
    if (c > 0 && (min_pos == 0 || c < min_pos)) min_pos = c;
  };
  for (NodeId v = 0; v < bin.tree.n(); ++v) note(bin.tree.node_storage(v));
  for (const Edge& e : bin.tree.graph().edges()) note(e.s);

  Cost min_storage = min_arborescence_weight(g, WeightSel::S);
  __int128 lim128 = (__int128)min_storage * prune_factor.num / prune_factor.den;
  Cost limit = lim128 > kInf ? kInf : (Cost)lim128;

  std::vector<Cost> bounds;
  if (min_pos > 0) {
    Cost b = min_pos;
    while (b <= limit) {
      bounds.push_back(b);
      __int128 nb = (__int128)b * (epsilon.den + epsilon.num) / epsilon.den;
      Cost next = nb > kInf ? kInf : (Cost)nb;
      if (next <= b) next = b + 1;
      b = next;
    }
  }
  auto collapse = [&](Cost sigma) -> Cost {
    if (sigma <= 0 || bounds.empty() || sigma < bounds.front()) return sigma;
    auto it = std::upper_bound(bounds.begin(), bounds.end(), sigma);
    return *(it - 1);
  };

  std::vector<char> counts(bin.tree.n());
  for (NodeId v = 0; v < bin.tree.n(); ++v) counts[v] = v < g.n() ? 1 : 0;
  TreeMsrEngine engine(bin.tree, collapse, limit, std::move(counts));

  // Exact evaluation of each root entry on the original graph, then dominance
  // pruning on the exact values.
  Frontier raw;
  for (const auto& e : engine.root_entries()) {
    Solution bsol = engine.reconstruct(e);
    Solution tsol = project_solution(bin, ext.tree, bsol);
    Solution osol = to_original(ext, std::move(tsol));
    CostReport rep = evaluate(g, osol);
    raw.push_back(FrontierPoint{rep.storage_total, rep.retrieval_sum, std::move(osol)});
  }
  std::sort(raw.begin(), raw.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.storage != b.storage) return a.storage < b.storage;
    return a.retrieval_sum < b.retrieval_sum;
  });
  Frontier out;
  for (FrontierPoint& p : raw) {
    if (!out.empty() && p.retrieval_sum >= out.back().retrieval_sum) continue;
    out.push_back(std::move(p));
  }
  return out;
}

Solution dp_bmr_heuristic(const VersionGraph& g, NodeId root, Cost retrieval_budget) {
  ExtractedTree ext = extract_bidirectional_tree(g, root);
  Solution tsol = dp_bmr_exact(ext.tree, retrieval_budget);
  return to_original(ext, std::move(tsol));
}

}  // namespace verstore
