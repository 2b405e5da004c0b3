#ifndef VERSTORE_GRAPH_HPP
#define VERSTORE_GRAPH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "verstore/errors.hpp"

namespace verstore {

using NodeId = int;
using Cost = long long;

constexpr NodeId kSelf = -1;  // parent[v] == kSelf: v is materialized

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  Cost s = 0;  // storage cost of keeping this delta
  Cost r = 0;  // retrieval cost of applying it
};

// Directed version graph. Node ids are dense 0..n-1; node_storage[v] is the
// materialization cost s_v. At most one edge per ordered pair, no self-loops.
class VersionGraph {
 public:
  VersionGraph() = default;
  explicit VersionGraph(std::vector<Cost> node_storage) : s_v_(std::move(node_storage)) {}

  int n() const { return static_cast<int>(s_v_.size()); }
  int m() const { return static_cast<int>(edges_.size()); }

  NodeId add_node(Cost s) {
    s_v_.push_back(s);
    return n() - 1;
  }

  Cost node_storage(NodeId v) const { return s_v_.at(v); }
  const std::vector<Cost>& node_storages() const { return s_v_; }

  // Adds an edge; a duplicate (src,dst) keeps the lexicographically cheaper
  // (s, r) pair and reports false.
  bool add_edge(NodeId src, NodeId dst, Cost s, Cost r);

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int idx) const { return edges_.at(idx); }
  std::optional<int> edge_index(NodeId src, NodeId dst) const;
  bool has_edge(NodeId src, NodeId dst) const { return edge_index(src, dst).has_value(); }

  // Indices of edges entering / leaving v.
  const std::vector<int>& in_edges(NodeId v) const;
  const std::vector<int>& out_edges(NodeId v) const;

 private:
  std::vector<Cost> s_v_;
  std::vector<Edge> edges_;
  std::map<std::pair<NodeId, NodeId>, int> index_;
  mutable std::vector<std::vector<int>> in_adj_, out_adj_;
  mutable bool adj_dirty_ = true;
  void rebuild_adj() const;
};

// The graph plus an auxiliary root with a zero-retrieval edge (aux, v) of
// storage s_v per node; storing that edge is materializing v, so every storage
// plan is a spanning arborescence rooted at aux_root.
struct ExtendedGraph {
  const VersionGraph* base = nullptr;
  NodeId aux_root = 0;  // == base->n()

  int n() const { return base->n() + 1; }
};

ExtendedGraph extend_with_aux_root(const VersionGraph& g);

struct Solution {
  std::vector<NodeId> materialized;                 // sorted
  std::vector<std::pair<NodeId, NodeId>> stored_edges;  // sorted (src, dst)
  std::vector<NodeId> parent;                       // parent[v] or kSelf

  bool operator==(const Solution& o) const { return parent == o.parent; }
};

// Builds the canonical Solution from a parent vector (kSelf = materialized).
Solution make_solution(std::vector<NodeId> parent);

struct CostReport {
  Cost storage_total = 0;
  std::vector<Cost> retrieval_per_node;
  Cost retrieval_sum = 0;
  Cost retrieval_max = 0;
};

enum class Problem { MSR, MMR, BSR, BMR };

struct ProblemSpec {
  Problem kind = Problem::MSR;
  Cost bound = 0;  // storage budget for MSR/MMR, retrieval budget for BSR/BMR
};

const char* problem_name(Problem p);

// Exact cost evaluation by walking parent chains. Throws InvalidSolutionError
// on cycles or edges absent from g.
CostReport evaluate(const VersionGraph& g, const Solution& sol);

bool check_feasible(const VersionGraph& g, const Solution& sol, const ProblemSpec& spec);

// Objective of sol under spec (sum/max retrieval for MSR/MMR, storage for BSR/BMR).
Cost objective_of(const CostReport& rep, Problem kind);

struct ValidationReport {
  bool costs_nonnegative = true;
  std::vector<NodeId> self_loops;
  std::vector<std::pair<NodeId, NodeId>> duplicate_edges;
  // (u, w, v): r(u,v) > r(u,w) + r(w,v)
  std::vector<std::tuple<NodeId, NodeId, NodeId>> triangle_violations;
  // (u, v): s_u + s(u,v) < s_v
  std::vector<std::pair<NodeId, NodeId>> generalized_violations;

  bool structurally_valid() const {
    return costs_nonnegative && self_loops.empty() && duplicate_edges.empty();
  }
};

ValidationReport validate_graph(const VersionGraph& g, bool check_triangle = false);

}  // namespace verstore

#endif
