#ifndef VERSTORE_TREE_DP_HPP
#define VERSTORE_TREE_DP_HPP

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "verstore/tree.hpp"

namespace verstore {

constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;

struct BmrTable {
  int n = 0;
  std::vector<std::vector<Cost>> dp;  // dp[v][u], kInf when out of budget
  std::vector<Cost> opt;              // opt[v] = min_{u in subtree(v)} dp[v][u]
};

// Exact minimum-storage plan with every node's retrieval <= budget. O(n^2).
Solution dp_bmr_exact(const BidirectionalTree& t, Cost retrieval_budget,
                      BmrTable* table_out = nullptr);

std::string dump_bmr_table(const BmrTable& table);

// Generic budget<->bound adapter: binary search for the smallest bound in
// [0, hi_bound] whose bounded-problem solution fits storage_target. Requires
// the solver's storage to be non-increasing in the bound. Solver call count
// is <= ceil(log2(hi_bound+1)) + 1 (reported via calls_out).
Solution dual_binary_search(const std::function<Solution(Cost)>& bounded_solver,
                            const VersionGraph& g, Cost hi_bound, Cost storage_target,
                            int* calls_out = nullptr);

// Exact MMR on a bidirectional tree: binary search over dp_bmr_exact.
Solution mmr_via_bmr(const BidirectionalTree& t, Cost storage_budget, int* calls_out = nullptr);

// --- MSR on trees -----------------------------------------------------------

// One row of the (sparse) MSR table, for diagnostics and tests.
struct MsrTableRow {
  NodeId v;
  int k;
  bool mat;
  Cost gamma;  // ticks
  Cost rho;    // ticks
  Cost sigma;
};

std::string dump_msr_table(const std::vector<MsrTableRow>& rows);

// Single DP pass: binarize, discretize with epsilon, solve, project back.
// Guarantee: true retrieval_sum <= OPT + epsilon * r_max.
Solution dp_msr_tree(const BidirectionalTree& t, Cost storage_budget, const Rational& epsilon,
                     std::vector<MsrTableRow>* table_out = nullptr);

// Full approximation scheme: repeat dp_msr_tree, each round zeroing the
// heaviest retrieval edge (r := 0, s := s_head, i.e. materialization-priced),
// and keep the best recorded output evaluated on the original costs.
// Guarantee: retrieval_sum <= (1 + epsilon) * OPT.
Solution dp_msr_tree_fptas(const BidirectionalTree& t, Cost storage_budget,
                           const Rational& epsilon);

// --- shared MSR engine (also drives the extracted-tree heuristic) -----------

// Runs the eight-case DP on an already-binary tree whose r costs are in final
// units. collapse_sigma (optional) maps a partial storage value onto its
// bucket representative; sigma_limit (optional, -1 = off) prunes states.
// counts_retrieval (optional) excludes nodes from the objective: helper nodes
// of a binarized tree are structural copies and must not contribute their own
// retrieval to rho or to dependency counts.
class TreeMsrEngine {
 public:
  TreeMsrEngine(const BidirectionalTree& binary_tree,
                std::function<Cost(Cost)> collapse_sigma = nullptr, Cost sigma_limit = -1,
                std::vector<char> counts_retrieval = {});

  struct RootEntry {
    Cost rho;
    Cost sigma;
    int state;  // opaque handles for reconstruct()
    int entry;
  };

  const std::vector<RootEntry>& root_entries() const { return roots_; }
  Solution reconstruct(const RootEntry& e) const;  // solution on the binary tree
  std::vector<MsrTableRow> table_rows() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  std::vector<RootEntry> roots_;
};

}  // namespace verstore

#endif
