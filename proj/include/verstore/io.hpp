#ifndef VERSTORE_IO_HPP
#define VERSTORE_IO_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "verstore/graph.hpp"

namespace verstore {

// Edge-list text format: `node <id> <s_v>` and `edge <src> <dst> <s_e> <r_e>`
// records, one per line, '#' comments. Node ids must form 0..n-1.
VersionGraph load_edge_list(const std::string& path);
VersionGraph parse_edge_list(const std::string& text);
void save_edge_list(const VersionGraph& g, const std::string& path);
std::string edge_list_text(const VersionGraph& g);

// Commit history dump, the hermetic stand-in for live repository access. A
// companion script (tools/git_dump.py) produces this JSON from a real
// repository; the library only ever reads dumps.
struct CommitDump {
  struct Commit {
    std::string id;
    Cost bytes = 0;
    std::vector<std::string> parents;
  };
  struct Delta {
    std::string from, to;
    Cost bytes = 0;
  };
  std::vector<Commit> commits;
  std::vector<Delta> deltas;
};

CommitDump parse_commit_dump(const std::string& json_text);
CommitDump load_commit_dump(const std::string& path);

// One node per commit (s_v = bytes); two directed single-weight edges
// (s_e = r_e = delta bytes) per parent-child pair. Throws CyclicHistoryError
// when parent references loop, ParseError when a delta is missing.
VersionGraph ingest_git(const CommitDump& dump);

// Per edge: s' = round(s * U[0.3,1]) clamped to [1, s] when s >= 1,
// r' = round(1.2 * r), half-up. Node costs and topology untouched.
VersionGraph random_compression(const VersionGraph& g, uint64_t seed);

// (s, r) costs for a directed delta; drawn per direction.
using DeltaModel = std::function<std::pair<Cost, Cost>(NodeId from, NodeId to)>;

// Random graph: per unordered pair one Bernoulli(p) draw; on success both
// directions are added. Default delta model: s = r uniform in
// [1, max(1, avg node storage / 10)].
VersionGraph er_construction(std::vector<Cost> node_storage, double p, uint64_t seed,
                             DeltaModel model = nullptr);

// Flow-based integer program for MSR over the aux-extended graph; x_e counts
// the retrievals crossing e, binary I_e marks e as stored.
struct IlpModel {
  struct Var {
    std::string name;
    Cost obj_coeff = 0;   // retrieval cost (x) or 0 (I)
    Cost storage = 0;     // storage cost (I vars)
    int edge = 0;         // index into `edges`
    bool indicator = false;
  };
  std::vector<Edge> edges;  // extended edge list, aux edges last
  int n = 0;                // non-aux node count
  Cost storage_budget = 0;
  std::vector<Var> vars;    // all x vars then all I vars
};

IlpModel build_ilp(const VersionGraph& g, Cost storage_budget);
std::string ilp_to_text(const IlpModel& model);
void export_ilp(const VersionGraph& g, Cost storage_budget, const std::string& path);

// Substitutes a solution into the model: returns its objective and checks
// every constraint (used by tests in place of an external solver).
struct IlpCheck {
  bool feasible = false;
  Cost objective = 0;
};
IlpCheck ilp_substitute(const IlpModel& model, const VersionGraph& g, const Solution& sol);

struct StatsSummary {
  int nodes = 0;
  int edges = 0;
  Cost avg_node_storage = 0;  // integer mean, half-up
  Cost avg_edge_storage = 0;
};

StatsSummary stats(const VersionGraph& g);

}  // namespace verstore

#endif
