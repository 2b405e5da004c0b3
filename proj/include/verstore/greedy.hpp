#ifndef VERSTORE_GREEDY_HPP
#define VERSTORE_GREEDY_HPP

#include <string>
#include <vector>

#include "verstore/graph.hpp"

namespace verstore {

struct GreedyStep {
  int iter = 0;
  bool is_swap = false;     // false: materialization, true: edge swap
  NodeId target = 0;        // node whose supply changed
  NodeId new_parent = kSelf;
  // rho as an exact rational; den == 0 encodes infinity (free improvement).
  Cost rho_num = 0;
  Cost rho_den = 1;
  Cost storage_after = 0;
  Cost retrieval_sum_after = 0;
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;
};

std::string trace_to_csv(const GreedyTrace& trace);

struct GreedyResult {
  Solution solution;
  GreedyTrace trace;
};

// Ratio greedy: start from the min-storage arborescence, repeatedly
// materialize the feasible node with the best retrieval-reduction per unit of
// extra storage. Throws InfeasibleError if even the arborescence busts the
// budget.
GreedyResult lmg(const VersionGraph& g, Cost storage_budget);

// Same loop over the full move set: any edge swap (u,v) with u not a
// descendant of v, plus materializations. Moves are ranked by per-dependent
// efficiency (the re-parented node's own retrieval drop per unit of extra
// storage); a move that frees storage while strictly improving retrieval
// ranks as infinity.
GreedyResult lmg_all(const VersionGraph& g, Cost storage_budget);

// Prim-style BMR baseline: grow from the aux root, always adding the cheapest
// storage edge that keeps every connected node's retrieval within the budget.
// Reconstruction of a prior system's heuristic; not canonical.
Solution mp_baseline(const VersionGraph& g, Cost retrieval_budget);

}  // namespace verstore

#endif
