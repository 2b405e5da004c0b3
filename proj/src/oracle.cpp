#include "verstore/oracle.hpp"

#include <tuple>
#include <vector>

namespace verstore {

void for_each_solution(const VersionGraph& g, const std::function<void(const Solution&)>& fn) {
  const int n = g.n();
  std::vector<NodeId> parent(n, kSelf);
  // choice[v] ranges over {materialize} + in-edges of v.
  std::vector<int> choice(n, -1);

  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      // Reject cyclic parent assignments.
      std::vector<int> state(n, 0);
      for (NodeId s = 0; s < n; ++s) {
        NodeId u = s;
        std::vector<NodeId> path;
        while (state[u] == 0 && parent[u] != kSelf) {
          state[u] = 1;
          path.push_back(u);
          u = parent[u];
        }
        if (parent[u] != kSelf && state[u] == 1) return;  // cycle
        for (NodeId w : path) state[w] = 2;
        state[u] = 2;
      }
      fn(make_solution(parent));
      return;
    }
    parent[v] = kSelf;
    rec(v + 1);
    for (int ei : g.in_edges(v)) {
      parent[v] = g.edge(ei).src;
      rec(v + 1);
    }
    parent[v] = kSelf;
  };
  rec(0);
}

OracleResult brute_force(const VersionGraph& g, const ProblemSpec& spec, int limit) {
  if (g.n() > limit) throw TooLargeError("oracle limit exceeded");
  bool found = false;
  Cost best_obj = 0, best_second = 0;
  Solution best;
  for_each_solution(g, [&](const Solution& sol) {
    CostReport rep = evaluate(g, sol);
    Cost bounded, obj, second;
    switch (spec.kind) {
      case Problem::MSR: bounded = rep.storage_total; obj = rep.retrieval_sum; break;
      case Problem::MMR: bounded = rep.storage_total; obj = rep.retrieval_max; break;
      case Problem::BSR: bounded = rep.retrieval_sum; obj = rep.storage_total; break;
      case Problem::BMR: bounded = rep.retrieval_max; obj = rep.storage_total; break;
      default: return;
    }
    second = spec.kind == Problem::BSR || spec.kind == Problem::BMR ? rep.retrieval_sum
                                                                    : rep.storage_total;
    if (bounded > spec.bound) return;
    auto key = std::make_tuple(obj, second, sol.parent);
    if (!found || key < std::make_tuple(best_obj, best_second, best.parent)) {
      found = true;
      best_obj = obj;
      best_second = second;
      best = sol;
    }
  });
  if (!found) throw InfeasibleError("no configuration satisfies the bound");
  return OracleResult{best_obj, best};
}

}  // namespace verstore
