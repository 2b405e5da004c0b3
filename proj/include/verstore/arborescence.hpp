#ifndef VERSTORE_ARBORESCENCE_HPP
#define VERSTORE_ARBORESCENCE_HPP

#include <vector>

#include "verstore/graph.hpp"

namespace verstore {

enum class WeightSel { S, R, SPlusR };

Cost edge_weight(const Edge& e, WeightSel sel);

// Generic Chu-Liu/Edmonds on an explicit edge list. Returns, for each node
// except the root, the index (into `edges`) of its chosen in-edge. Ties broken
// toward the lower (src, dst) pair for reproducibility.
// Throws UnreachableNodeError if some node has no path from the root.
std::vector<int> min_arborescence_edges(int n, const std::vector<Edge>& edges, NodeId root,
                                        WeightSel sel);

// Minimum spanning arborescence of the aux-extended graph, as a Solution
// (aux edge chosen for v <=> v materialized).
Solution min_arborescence(const ExtendedGraph& g, NodeId root, WeightSel sel);

// Total selected weight of the arborescence that min_arborescence returns.
Cost min_arborescence_weight(const VersionGraph& g, WeightSel sel);

}  // namespace verstore

#endif
