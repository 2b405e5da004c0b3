#ifndef VERSTORE_ORACLE_HPP
#define VERSTORE_ORACLE_HPP

#include <functional>
#include <optional>

#include "verstore/graph.hpp"

namespace verstore {

struct OracleResult {
  Cost objective = 0;
  Solution solution;
};

// Enumerates every storage plan (each node picks one incoming stored edge or
// materialization; cyclic picks are rejected) and calls fn on it. Completeness
// is self-evident, which is the whole point of the oracle.
void for_each_solution(const VersionGraph& g, const std::function<void(const Solution&)>& fn);

// Exhaustive exact solver. Throws TooLargeError when n > limit, and
// InfeasibleError when no plan satisfies the bound. Deterministic: ties on the
// objective are broken by the secondary cost, then by the parent vector.
OracleResult brute_force(const VersionGraph& g, const ProblemSpec& spec, int limit = 8);

}  // namespace verstore

#endif
