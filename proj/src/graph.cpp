#include "verstore/graph.hpp"

#include <algorithm>
#include <tuple>

namespace verstore {

bool VersionGraph::add_edge(NodeId src, NodeId dst, Cost s, Cost r) {
  if (src < 0 || src >= n() || dst < 0 || dst >= n())
    throw UnknownNodeError("edge endpoint out of range");
  if (src == dst) throw Error("self-loop edge rejected");
  auto key = std::make_pair(src, dst);
  auto it = index_.find(key);
  if (it != index_.end()) {
    Edge& e = edges_[it->second];
    if (std::make_pair(s, r) < std::make_pair(e.s, e.r)) {
      e.s = s;
      e.r = r;
    }
    return false;
  }
  index_[key] = m();
  edges_.push_back(Edge{src, dst, s, r});
  adj_dirty_ = true;
  return true;
}

std::optional<int> VersionGraph::edge_index(NodeId src, NodeId dst) const {
  auto it = index_.find(std::make_pair(src, dst));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void VersionGraph::rebuild_adj() const {
  in_adj_.assign(n(), {});
  out_adj_.assign(n(), {});
  for (int i = 0; i < m(); ++i) {
    in_adj_[edges_[i].dst].push_back(i);
    out_adj_[edges_[i].src].push_back(i);
  }
  adj_dirty_ = false;
}

const std::vector<int>& VersionGraph::in_edges(NodeId v) const {
  if (adj_dirty_) rebuild_adj();
  return in_adj_.at(v);
}

const std::vector<int>& VersionGraph::out_edges(NodeId v) const {
  if (adj_dirty_) rebuild_adj();
  return out_adj_.at(v);
}

ExtendedGraph extend_with_aux_root(const VersionGraph& g) {
  return ExtendedGraph{&g, g.n()};
}

Solution make_solution(std::vector<NodeId> parent) {
  Solution sol;
  sol.parent = std::move(parent);
  for (NodeId v = 0; v < static_cast<NodeId>(sol.parent.size()); ++v) {
    if (sol.parent[v] == kSelf)
      sol.materialized.push_back(v);
    else
      sol.stored_edges.emplace_back(sol.parent[v], v);
  }
  std::sort(sol.stored_edges.begin(), sol.stored_edges.end());
  return sol;
}

const char* problem_name(Problem p) {
  switch (p) {
    case Problem::MSR: return "msr";
    case Problem::MMR: return "mmr";
    case Problem::BSR: return "bsr";
    case Problem::BMR: return "bmr";
  }
  return "?";
}

CostReport evaluate(const VersionGraph& g, const Solution& sol) {
  const int n = g.n();
  if (static_cast<int>(sol.parent.size()) != n)
    throw InvalidSolutionError("parent vector size mismatch");
  CostReport rep;
  rep.retrieval_per_node.assign(n, -1);
  // Storage: materializations plus stored edges.
  for (NodeId v = 0; v < n; ++v) {
    if (sol.parent[v] == kSelf) {
      rep.storage_total = checked_add(rep.storage_total, g.node_storage(v));
    } else {
      auto idx = g.edge_index(sol.parent[v], v);
      if (!idx) throw InvalidSolutionError("stored edge absent from graph");
      rep.storage_total = checked_add(rep.storage_total, g.edge(*idx).s);
    }
  }
  // Retrieval: iterative parent-chain walk with memoization; a chain longer
  // than n means a cycle.
  for (NodeId v = 0; v < n; ++v) {
    if (rep.retrieval_per_node[v] >= 0) continue;
    std::vector<NodeId> chain;
    NodeId u = v;
    while (rep.retrieval_per_node[u] < 0 && sol.parent[u] != kSelf) {
      chain.push_back(u);
      u = sol.parent[u];
      if (static_cast<int>(chain.size()) > n)
        throw InvalidSolutionError("cyclic parent chain");
    }
    Cost base = sol.parent[u] == kSelf ? 0 : rep.retrieval_per_node[u];
    if (sol.parent[u] == kSelf) rep.retrieval_per_node[u] = 0;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      base = checked_add(base, g.edge(*g.edge_index(sol.parent[*it], *it)).r);
      rep.retrieval_per_node[*it] = base;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    rep.retrieval_sum = checked_add(rep.retrieval_sum, rep.retrieval_per_node[v]);
    rep.retrieval_max = std::max(rep.retrieval_max, rep.retrieval_per_node[v]);
  }
  return rep;
}

Cost objective_of(const CostReport& rep, Problem kind) {
  switch (kind) {
    case Problem::MSR: return rep.retrieval_sum;
    case Problem::MMR: return rep.retrieval_max;
    case Problem::BSR:
    case Problem::BMR: return rep.storage_total;
  }
  return 0;
}

bool check_feasible(const VersionGraph& g, const Solution& sol, const ProblemSpec& spec) {
  CostReport rep = evaluate(g, sol);
  switch (spec.kind) {
    case Problem::MSR:
    case Problem::MMR: return rep.storage_total <= spec.bound;
    case Problem::BSR: return rep.retrieval_sum <= spec.bound;
    case Problem::BMR: return rep.retrieval_max <= spec.bound;
  }
  return false;
}

ValidationReport validate_graph(const VersionGraph& g, bool check_triangle) {
  ValidationReport rep;
  for (NodeId v = 0; v < g.n(); ++v)
    if (g.node_storage(v) < 0) rep.costs_nonnegative = false;
  for (const Edge& e : g.edges()) {
    if (e.s < 0 || e.r < 0) rep.costs_nonnegative = false;
    if (e.src == e.dst) rep.self_loops.push_back(e.src);
  }
  // Duplicates cannot survive add_edge; the check guards hand-built inputs.
  if (check_triangle) {
    for (const Edge& uv : g.edges()) {
      for (int wi : g.in_edges(uv.dst)) {
        const Edge& wv = g.edge(wi);
        if (wv.src == uv.src) continue;
        auto uw = g.edge_index(uv.src, wv.src);
        if (!uw) continue;
        if (uv.r > checked_add(g.edge(*uw).r, wv.r))
          rep.triangle_violations.emplace_back(uv.src, wv.src, uv.dst);
      }
      if (checked_add(g.node_storage(uv.src), uv.s) < g.node_storage(uv.dst))
        rep.generalized_violations.emplace_back(uv.src, uv.dst);
    }
  }
  return rep;
}

}  // namespace verstore
