#include "verstore/tree.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace verstore {

BidirectionalTree BidirectionalTree::from_graph(VersionGraph g, NodeId root) {
  const int n = g.n();
  if (root < 0 || root >= n) throw UnknownNodeError("root out of range");
  if (g.m() != 2 * (n - 1))
    throw Error("bidirectional tree needs exactly 2(n-1) directed edges");
  for (const Edge& e : g.edges())
    if (!g.has_edge(e.dst, e.src)) throw Error("missing reverse delta");

  BidirectionalTree t;
  t.root_ = root;
  t.tpar_.assign(n, kSelf);
  t.kids_.assign(n, {});
  std::vector<char> seen(n, 0);
  std::queue<NodeId> bfs;
  bfs.push(root);
  seen[root] = 1;
  int reached = 1;
  while (!bfs.empty()) {
    NodeId v = bfs.front();
    bfs.pop();
    for (int ei : g.out_edges(v)) {
      NodeId w = g.edge(ei).dst;
      if (seen[w]) continue;
      seen[w] = 1;
      ++reached;
      t.tpar_[w] = v;
      t.kids_[v].push_back(w);
      bfs.push(w);
    }
  }
  if (reached != n) throw Error("underlying graph is not connected");
  t.g_ = std::move(g);
  return t;
}

void BidirectionalTree::set_delta(NodeId u, NodeId v, Cost s, Cost r) {
  auto idx = g_.edge_index(u, v);
  if (!idx) throw UnknownNodeError("no such delta");
  // VersionGraph has no in-place edit; rebuild is overkill for one field, so
  // poke through a fresh graph copy.
  VersionGraph ng(g_.node_storages());
  for (int i = 0; i < g_.m(); ++i) {
    Edge e = g_.edge(i);
    if (i == *idx) {
      e.s = s;
      e.r = r;
    }
    ng.add_edge(e.src, e.dst, e.s, e.r);
  }
  g_ = std::move(ng);
}

BinarizedTree binarize_tree(const BidirectionalTree& t) {
  const int n = t.n();
  // Build mutable structure first, then emit a graph.
  std::vector<Cost> s_v(t.graph().node_storages());
  std::vector<NodeId> orig_of(n);
  for (NodeId v = 0; v < n; ++v) orig_of[v] = v;
  struct DEdge {
    NodeId u, v;
    Cost s, r;
  };
  std::vector<DEdge> deltas;
  std::vector<std::vector<NodeId>> kids(n);
  for (NodeId v = 0; v < n; ++v) kids[v] = t.children(v);
  auto push_pair = [&](NodeId a, NodeId b, const Edge& down, const Edge& up) {
    deltas.push_back(DEdge{a, b, down.s, down.r});
    deltas.push_back(DEdge{b, a, up.s, up.r});
  };

  std::queue<NodeId> work;
  for (NodeId v = 0; v < n; ++v) work.push(v);
  while (!work.empty()) {
    NodeId v = work.front();
    work.pop();
    if (static_cast<int>(kids[v].size()) <= 2) continue;
    // Keep the left-most child; re-hang the rest under a helper, which may
    // itself need splitting.
    NodeId owner = orig_of[v];
    NodeId h = static_cast<NodeId>(s_v.size());
    s_v.push_back(t.node_storage(owner));
    orig_of.push_back(owner);
    kids.emplace_back(kids[v].begin() + 1, kids[v].end());
    kids[v].erase(kids[v].begin() + 1, kids[v].end());
    kids[v].push_back(h);
    deltas.push_back(DEdge{v, h, 0, 0});
    deltas.push_back(DEdge{h, v, 0, 0});
    work.push(h);
  }

  // Emit child deltas: for each structural parent-child pair (p, c) with c an
  // original node, costs come from the original (orig_of(p), c) deltas.
  const int nn = static_cast<int>(s_v.size());
  for (NodeId p = 0; p < nn; ++p) {
    for (NodeId c : kids[p]) {
      if (c >= n) continue;  // helper link already emitted
      NodeId op = orig_of[p];
      push_pair(p, c, t.delta(op, c), t.delta(c, op));
    }
  }

  VersionGraph g(s_v);
  for (const DEdge& d : deltas) g.add_edge(d.u, d.v, d.s, d.r);
  BinarizedTree out{BidirectionalTree::from_graph(std::move(g), t.root()), std::move(orig_of)};
  return out;
}

Solution project_solution(const BinarizedTree& bin, const BidirectionalTree& orig,
                          const Solution& bin_sol) {
  const int nn = bin.tree.n();
  const int n = orig.n();
  CostReport rep = evaluate(bin.tree.graph(), bin_sol);
  std::vector<int> depth(nn, -1);
  for (NodeId v = 0; v < nn; ++v) {
    int d = 0;
    NodeId u = v;
    while (bin_sol.parent[u] != kSelf) {
      ++d;
      u = bin_sol.parent[u];
    }
    depth[v] = d;
  }
  // Per original node, pick the cluster member with the best supply:
  // materialized wins; otherwise minimum (retrieval, depth). Minimality
  // guarantees that member's parent lies outside the cluster and that the
  // projected parent relation is acyclic (depth strictly decreases).
  std::vector<NodeId> entry(n, -1);
  std::vector<char> mat(n, 0);
  for (NodeId m = 0; m < nn; ++m) {
    NodeId v = bin.orig_of[m];
    if (bin_sol.parent[m] == kSelf) mat[v] = 1;
    if (entry[v] == -1 ||
        std::make_tuple(rep.retrieval_per_node[m], depth[m], m) <
            std::make_tuple(rep.retrieval_per_node[entry[v]], depth[entry[v]], entry[v]))
      entry[v] = m;
  }
  std::vector<NodeId> parent(n, kSelf);
  for (NodeId v = 0; v < n; ++v) {
    if (mat[v]) continue;
    NodeId q = bin_sol.parent[entry[v]];
    parent[v] = bin.orig_of[q];
  }
  return make_solution(std::move(parent));
}

Cost DiscretizationParams::discretize_r(Cost r) const {
  if (identity) return r;
  // ceil(r / l) with l = n^2 * r_max / t, all exact.
  __int128 num = static_cast<__int128>(r) * ticks;
  __int128 den = static_cast<__int128>(n) * n * r_max;
  return static_cast<Cost>((num + den - 1) / den);
}

Rational DiscretizationParams::undiscretize(Cost rho_ticks) const {
  if (identity) return Rational(rho_ticks);
  return Rational(checked_mul(tick_len.num, rho_ticks), tick_len.den);
}

std::pair<BidirectionalTree, DiscretizationParams> discretize(const BidirectionalTree& t,
                                                              const Rational& epsilon) {
  if (epsilon.num <= 0) throw Error("epsilon must be positive");
  DiscretizationParams p;
  p.epsilon = epsilon;
  p.n = t.n();
  for (const Edge& e : t.graph().edges()) p.r_max = std::max(p.r_max, e.r);
  if (p.r_max == 0) {
    p.identity = true;
    return {t, p};
  }
  // t(eps) = ceil(n^4 / eps); l = n^2 * r_max / t.
  Cost n4 = checked_mul(checked_mul((Cost)p.n, p.n), checked_mul((Cost)p.n, p.n));
  __int128 tnum = static_cast<__int128>(n4) * epsilon.den;
  p.ticks = static_cast<Cost>((tnum + epsilon.num - 1) / epsilon.num);
  p.tick_len = Rational(checked_mul(checked_mul((Cost)p.n, p.n), p.r_max), p.ticks);

  BidirectionalTree dt = t;
  for (const Edge& e : t.graph().edges()) dt.set_delta(e.src, e.dst, e.s, p.discretize_r(e.r));
  return {dt, p};
}

}  // namespace verstore
