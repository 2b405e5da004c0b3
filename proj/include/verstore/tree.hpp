#ifndef VERSTORE_TREE_HPP
#define VERSTORE_TREE_HPP

#include <vector>

#include "verstore/graph.hpp"
#include "verstore/rational.hpp"

namespace verstore {

// A digraph whose underlying undirected graph is a tree, with independent
// deltas in both directions of every edge, plus a designated root.
class BidirectionalTree {
 public:
  // Validates: connected, acyclic, both directions present for every edge.
  static BidirectionalTree from_graph(VersionGraph g, NodeId root);

  const VersionGraph& graph() const { return g_; }
  int n() const { return g_.n(); }
  NodeId root() const { return root_; }
  NodeId tree_parent(NodeId v) const { return tpar_[v]; }
  const std::vector<NodeId>& children(NodeId v) const { return kids_[v]; }
  Cost node_storage(NodeId v) const { return g_.node_storage(v); }
  const Edge& delta(NodeId u, NodeId v) const { return g_.edge(*g_.edge_index(u, v)); }

  // Replaces the (u,v) delta's costs (used by the FPTAS outer loop and
  // discretization); structure is untouched.
  void set_delta(NodeId u, NodeId v, Cost s, Cost r);

 private:
  VersionGraph g_;
  NodeId root_ = 0;
  std::vector<NodeId> tpar_;
  std::vector<std::vector<NodeId>> kids_;
};

struct BinarizedTree {
  BidirectionalTree tree;
  std::vector<NodeId> orig_of;  // new node -> original node (helpers map to their owner)
};

// Reduction to max two children per node. Helper nodes carry
// s_{v'} = s_v and zero-cost deltas to/from v; transferred child edges keep
// the original costs. Output has <= 2n nodes and the same MSR/BMR optima.
BinarizedTree binarize_tree(const BidirectionalTree& t);

// Maps a solution on the binarized tree back to the original tree without
// increasing storage, retrieval sum, or retrieval max. Each original node's
// cluster (itself plus its helpers) collapses to its best supply entry.
Solution project_solution(const BinarizedTree& bin, const BidirectionalTree& orig,
                          const Solution& bin_sol);

struct DiscretizationParams {
  Rational epsilon{1, 1};
  int n = 0;
  Cost r_max = 0;
  Cost ticks = 1;      // t = ceil(n^4 / epsilon)
  Rational tick_len{1, 1};  // l = n^2 * r_max / t
  bool identity = false;    // r_max == 0 degenerate case

  // r' = ceil(r / l); satisfies r <= l*r' <= r + l.
  Cost discretize_r(Cost r) const;
  // l * rho as an exact rational.
  Rational undiscretize(Cost rho_ticks) const;
};

// Returns a copy of t whose r costs are in ticks, plus the parameters.
std::pair<BidirectionalTree, DiscretizationParams> discretize(const BidirectionalTree& t,
                                                              const Rational& epsilon);

}  // namespace verstore

#endif
