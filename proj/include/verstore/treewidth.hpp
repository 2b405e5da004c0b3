#ifndef VERSTORE_TREEWIDTH_HPP
#define VERSTORE_TREEWIDTH_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "verstore/graph.hpp"
#include "verstore/tree.hpp"

namespace verstore {

// Rooted tree of bags; kind is advisory until the decomposition is niced.
struct TreeDecomposition {
  struct Node {
    std::vector<NodeId> bag;  // sorted
    int parent = -1;          // -1 = root
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = -1;

  int width() const;
};

enum class BagKind { Leaf, Introduce, Forget, Join };

// Nice form: leaves have singleton bags, introduce/forget change the bag by
// one vertex, joins have two children with identical bags. The root's bag is
// empty (a final forget chain), so root states carry no per-vertex data.
struct NiceTreeDecomposition {
  struct Node {
    std::vector<NodeId> bag;  // sorted
    BagKind kind = BagKind::Leaf;
    int parent = -1;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = -1;

  int width() const;
};

// File format: one line per bag, `bag <id> <kind> <parent-id|-> <v1> <v2> ...`
// with kind in {leaf, introduce, forget, join, bag}; ids are arbitrary
// non-negative integers, '-' marks the root.
TreeDecomposition parse_decomposition(const std::string& text);
TreeDecomposition load_decomposition(const std::string& path);

// Tree-decomposition conditions: every vertex covered, every edge's endpoints
// share a bag, and per-vertex bag connectivity. Throws
// InvalidDecompositionError naming the violated condition.
void validate_decomposition(const VersionGraph& g, const TreeDecomposition& d);

// Structural rules of the nice form (on top of the conditions above).
void validate_nice(const VersionGraph& g, const NiceTreeDecomposition& d);

NiceTreeDecomposition make_nice(const TreeDecomposition& d);

// Min-degree elimination heuristic; width reported, not guaranteed minimal.
TreeDecomposition min_degree_decomposition(const VersionGraph& g);

// Validates `provided` and converts it, or builds one heuristically.
NiceTreeDecomposition build_decomposition(const VersionGraph& g,
                                          const TreeDecomposition* provided = nullptr);

// One partial-solution signature over a bag. Vectors are parallel to the
// sorted bag. par entries are kSelf, a bag vertex, or an already-forgotten
// vertex; anc is a bitmask over bag positions (ancestors within the bag).
// dep counts dependents (or, in the max-retrieval variant, carries the
// highest dependent retrieval).
struct DPStateTuple {
  std::vector<NodeId> par;
  std::vector<Cost> dep;
  std::vector<Cost> ret;
  std::vector<uint32_t> anc;
  Cost rho = 0;
};

// Splits a merged bag state into its per-side "true restrictions". Vertices
// whose parent lies in side_a_private become roots of side b (and vice
// versa), with retrievals and ancestor sets of their bag descendants reduced
// accordingly. Throws CyclicAncError when anc is not acyclic.
std::pair<DPStateTuple, DPStateTuple> external_retrieval(const std::vector<NodeId>& bag,
                                                         const DPStateTuple& t,
                                                         const std::set<NodeId>& side_a_private);

// Number of dependents outside the bag whose nearest bag ancestor is each
// bag vertex.
std::vector<Cost> external_dependency(const std::vector<NodeId>& bag, const DPStateTuple& t);

// True iff (t_a, t_b) are exactly the two-sided restriction of t_z and the
// external dependents add up pointwise.
bool compatibility(const std::vector<NodeId>& bag, const DPStateTuple& t_z,
                   const DPStateTuple& t_a, const DPStateTuple& t_b);

// rho_z = rho_a + rho_b + distribute_retrieval(...): the retrieval mass that
// neither side has accounted for when a merged state is split two ways.
Cost distribute_retrieval(const std::vector<NodeId>& bag, const DPStateTuple& t_z,
                          const DPStateTuple& t_a, const DPStateTuple& t_b);

// Discretization of an arbitrary graph's retrieval costs (same tick scheme as
// the tree solvers).
std::pair<VersionGraph, DiscretizationParams> discretize_graph(const VersionGraph& g,
                                                               const Rational& epsilon);

// (1+epsilon)-approximate MSR / MMR for graphs of bounded treewidth.
// Throws WidthExceededError when the decomposition is wider than k_max and
// InfeasibleError when the budget is below the minimum storage.
Solution dp_msr_btw(const VersionGraph& g, const NiceTreeDecomposition& d, Cost storage_budget,
                    const Rational& epsilon, int k_max = 3);
Solution dp_mmr_btw(const VersionGraph& g, const NiceTreeDecomposition& d, Cost storage_budget,
                    const Rational& epsilon, int k_max = 3);

}  // namespace verstore

#endif
