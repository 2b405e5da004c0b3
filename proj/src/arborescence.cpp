#include "verstore/arborescence.hpp"

#include <algorithm>
#include <tuple>

namespace verstore {

Cost edge_weight(const Edge& e, WeightSel sel) {
  switch (sel) {
    case WeightSel::S: return e.s;
    case WeightSel::R: return e.r;
    case WeightSel::SPlusR: return checked_add(e.s, e.r);
  }
  return 0;
}

namespace {

struct WEdge {
  NodeId src, dst;
  Cost w;
  int orig;            // index into the caller's edge list
  NodeId tb_src, tb_dst;  // original endpoints, for deterministic tie-breaks
};

// Recursive Chu-Liu/Edmonds with explicit cycle contraction and expansion.
// Returns the set of original edge indices forming the min arborescence.
std::vector<int> solve(int n, std::vector<WEdge> edges, NodeId root) {
  std::vector<int> best(n, -1);
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const WEdge& e = edges[i];
    if (e.dst == root || e.src == e.dst) continue;
    if (best[e.dst] == -1) {
      best[e.dst] = i;
      continue;
    }
    const WEdge& b = edges[best[e.dst]];
    if (std::make_tuple(e.w, e.tb_src, e.tb_dst) < std::make_tuple(b.w, b.tb_src, b.tb_dst))
      best[e.dst] = i;
  }
  for (NodeId v = 0; v < n; ++v)
    if (v != root && best[v] == -1) throw UnreachableNodeError("node unreachable from root");

  // Look for a cycle among the chosen in-edges.
  std::vector<int> color(n, 0);  // 0 unseen, 1 on stack, 2 done
  std::vector<NodeId> cycle;
  for (NodeId start = 0; start < n && cycle.empty(); ++start) {
    NodeId v = start;
    std::vector<NodeId> stack;
    while (v != root && color[v] == 0) {
      color[v] = 1;
      stack.push_back(v);
      v = edges[best[v]].src;
    }
    if (v != root && color[v] == 1) {
      // Unwind the stack back to v: that suffix is the cycle.
      auto it = std::find(stack.begin(), stack.end(), v);
      cycle.assign(it, stack.end());
    }
    for (NodeId u : stack) color[u] = 2;
  }

  if (cycle.empty()) {
    std::vector<int> chosen;
    for (NodeId v = 0; v < n; ++v)
      if (v != root) chosen.push_back(edges[best[v]].orig);
    return chosen;
  }

  // Contract the cycle into one super-node and recurse.
  std::vector<int> in_cycle(n, 0);
  for (NodeId v : cycle) in_cycle[v] = 1;
  std::vector<NodeId> remap(n, -1);
  int nn = 0;
  for (NodeId v = 0; v < n; ++v)
    if (!in_cycle[v]) remap[v] = nn++;
  const NodeId super = nn++;
  for (NodeId v : cycle) remap[v] = super;

  std::vector<WEdge> sub;
  // Edges of the contracted instance keep their identity (index into `edges`)
  // so the expansion step can recover which cycle in-edge gets displaced.
  std::vector<int> sub_origin;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const WEdge& e = edges[i];
    NodeId ns = remap[e.src], nd = remap[e.dst];
    if (ns == nd) continue;
    Cost w = e.w;
    if (in_cycle[e.dst]) w -= edges[best[e.dst]].w;  // standard reduction
    sub.push_back(WEdge{ns, nd, w, static_cast<int>(sub_origin.size()), e.tb_src, e.tb_dst});
    sub_origin.push_back(i);
  }

  std::vector<int> sub_chosen = solve(nn, sub, remap[root]);

  std::vector<int> chosen;
  int entering = -1;  // edge of `edges` that enters the contracted cycle
  for (int sc : sub_chosen) {
    const WEdge& e = edges[sub_origin[sc]];
    if (in_cycle[e.dst]) entering = sub_origin[sc];
    chosen.push_back(e.orig);
  }
  // The entering edge displaces exactly one cycle member's best in-edge.
  NodeId displaced = edges[entering].dst;
  for (NodeId v : cycle)
    if (v != displaced) chosen.push_back(edges[best[v]].orig);
  return chosen;
}

}  // namespace

std::vector<int> min_arborescence_edges(int n, const std::vector<Edge>& edges, NodeId root,
                                        WeightSel sel) {
  std::vector<WEdge> work;
  work.reserve(edges.size());
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const Edge& e = edges[i];
    work.push_back(WEdge{e.src, e.dst, edge_weight(e, sel), i, e.src, e.dst});
  }
  std::vector<int> chosen = solve(n, work, root);
  std::vector<int> per_node(n, -1);
  for (int idx : chosen) per_node[edges[idx].dst] = idx;
  return per_node;
}

namespace {

std::vector<Edge> extended_edge_list(const ExtendedGraph& g) {
  std::vector<Edge> all = g.base->edges();
  for (NodeId v = 0; v < g.base->n(); ++v)
    all.push_back(Edge{g.aux_root, v, g.base->node_storage(v), 0});
  return all;
}

}  // namespace

Solution min_arborescence(const ExtendedGraph& g, NodeId root, WeightSel sel) {
  std::vector<Edge> all = extended_edge_list(g);
  std::vector<int> per_node = min_arborescence_edges(g.n(), all, root, sel);
  std::vector<NodeId> parent(g.base->n(), kSelf);
  for (NodeId v = 0; v < g.base->n(); ++v) {
    const Edge& e = all[per_node[v]];
    parent[v] = e.src == g.aux_root ? kSelf : e.src;
  }
  return make_solution(std::move(parent));
}

Cost min_arborescence_weight(const VersionGraph& g, WeightSel sel) {
  ExtendedGraph ext = extend_with_aux_root(g);
  Solution sol = min_arborescence(ext, ext.aux_root, sel);
  CostReport rep = evaluate(g, sol);
  if (sel == WeightSel::S) return rep.storage_total;
  Cost total = 0;
  for (NodeId v = 0; v < g.n(); ++v) {
    if (sol.parent[v] == kSelf) {
      total = checked_add(total, g.node_storage(v));
    } else {
      const Edge& e = g.edge(*g.edge_index(sol.parent[v], v));
      total = checked_add(total, edge_weight(e, sel));
    }
  }
  return total;
}

}  // namespace verstore
