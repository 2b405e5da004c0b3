#ifndef VERSTORE_TEST_HELPERS_HPP
#define VERSTORE_TEST_HELPERS_HPP

#include "verstore/graph.hpp"
#include "verstore/rng.hpp"
#include "verstore/tree.hpp"

namespace verstore::testing {

// Three-version chain A -> B -> C with s_A=a, s_B=b, s_C=c and single-weight
// deltas (1-eps)*b and (1-eps)*c where eps=b/c. The default (1000,10,100)
// instance has edge costs 9 and 90.
inline VersionGraph adversarial_chain(Cost a, Cost b, Cost c) {
  VersionGraph g({a, b, c});
  Cost e1 = b - b * b / c;  // (1-eps)*b, exact for c = k*b
  Cost e2 = c - b;          // (1-eps)*c
  g.add_edge(0, 1, e1, e1);
  g.add_edge(1, 2, e2, e2);
  return g;
}

inline VersionGraph fig_chain() { return adversarial_chain(1000, 10, 100); }

// u(s=10), v(s=8); (u,v): s=3,r=2; (v,u): s=4,r=1.
inline VersionGraph two_node() {
  VersionGraph g({10, 8});
  g.add_edge(0, 1, 3, 2);
  g.add_edge(1, 0, 4, 1);
  return g;
}

inline BidirectionalTree random_tree(SplitMix64& rng, int n, Cost max_s, Cost max_r) {
  std::vector<Cost> sv(n);
  for (auto& s : sv) s = (Cost)rng.next_in(1, max_s);
  VersionGraph g(sv);
  for (NodeId v = 1; v < n; ++v) {
    NodeId p = (NodeId)rng.next_in(0, v - 1);
    g.add_edge(p, v, (Cost)rng.next_in(0, max_s), (Cost)rng.next_in(0, max_r));
    g.add_edge(v, p, (Cost)rng.next_in(0, max_s), (Cost)rng.next_in(0, max_r));
  }
  return BidirectionalTree::from_graph(std::move(g), 0);
}

// Random digraph; edge_pct per ordered pair, out of 100.
inline VersionGraph random_graph(SplitMix64& rng, int n, int edge_pct, Cost max_s, Cost max_r) {
  std::vector<Cost> sv(n);
  for (auto& s : sv) s = (Cost)rng.next_in(1, max_s);
  VersionGraph g(sv);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      if ((long long)rng.next_in(0, 99) < edge_pct)
        g.add_edge(u, v, (Cost)rng.next_in(0, max_s),
                   (Cost)rng.next_in(0, max_r));
    }
  return g;
}

// Random connected graph: random tree skeleton (both directions) plus extras.
inline VersionGraph random_connected(SplitMix64& rng, int n, int extra_pct, Cost max_s,
                                     Cost max_r) {
  std::vector<Cost> sv(n);
  for (auto& s : sv) s = (Cost)rng.next_in(1, max_s);
  VersionGraph g(sv);
  for (NodeId v = 1; v < n; ++v) {
    NodeId p = (NodeId)rng.next_in(0, v - 1);
    g.add_edge(p, v, (Cost)rng.next_in(0, max_s), (Cost)rng.next_in(0, max_r));
    g.add_edge(v, p, (Cost)rng.next_in(0, max_s), (Cost)rng.next_in(0, max_r));
  }
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v) {
      if (u == v || g.has_edge(u, v)) continue;
      if ((long long)rng.next_in(0, 99) < extra_pct)
        g.add_edge(u, v, (Cost)rng.next_in(0, max_s),
                   (Cost)rng.next_in(0, max_r));
    }
  return g;
}

}  // namespace verstore::testing

#endif
