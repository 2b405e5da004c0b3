#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "verstore/extracted.hpp"
#include "verstore/greedy.hpp"
#include "verstore/io.hpp"
#include "verstore/oracle.hpp"
#include "verstore/tree_dp.hpp"
#include "verstore/treewidth.hpp"

using namespace verstore;

namespace {

Problem parse_problem(const std::string& s) {
  if (s == "msr") return Problem::MSR;
  if (s == "mmr") return Problem::MMR;
  if (s == "bsr") return Problem::BSR;
  if (s == "bmr") return Problem::BMR;
  throw ParseError("unknown problem: " + s);
}

struct SolveOpts {
  Rational epsilon{1, 4};
  Rational prune{3, 1};
  NodeId root = 0;
};

// The (problem, algo) support matrix; unsupported pairs are input errors.
Solution solve_once(const VersionGraph& g, Problem p, const std::string& algo, Cost bound,
                    const SolveOpts& o) {
  switch (p) {
    case Problem::MSR:
      if (algo == "lmg") return lmg(g, bound).solution;
      if (algo == "lmg-all") return lmg_all(g, bound).solution;
      if (algo == "dp-tree")
        return dp_msr_tree_fptas(BidirectionalTree::from_graph(g, o.root), bound, o.epsilon);
      if (algo == "dp-btw") return dp_msr_btw(g, build_decomposition(g), bound, o.epsilon);
      if (algo == "dp-extracted") {
        Frontier fr = dp_msr_heuristic(g, o.root, o.epsilon, o.prune);
        const FrontierPoint* best = nullptr;
        for (const FrontierPoint& pt : fr)
          if (pt.storage <= bound) best = &pt;  // sorted: last fitting = least retrieval
        if (!best) throw InfeasibleError("no frontier point within the storage budget");
        return best->solution;
      }
      if (algo == "oracle") return brute_force(g, {Problem::MSR, bound}).solution;
      break;
    case Problem::MMR:
      if (algo == "dp-tree")
        return mmr_via_bmr(BidirectionalTree::from_graph(g, o.root), bound);
      if (algo == "dp-btw") return dp_mmr_btw(g, build_decomposition(g), bound, o.epsilon);
      if (algo == "oracle") return brute_force(g, {Problem::MMR, bound}).solution;
      break;
    case Problem::BMR:
      if (algo == "mp") return mp_baseline(g, bound);
      if (algo == "dp-tree")
        return dp_bmr_exact(BidirectionalTree::from_graph(g, o.root), bound);
      if (algo == "dp-extracted") return dp_bmr_heuristic(g, o.root, bound);
      if (algo == "oracle") return brute_force(g, {Problem::BMR, bound}).solution;
      break;
    case Problem::BSR:
      if (algo == "oracle") return brute_force(g, {Problem::BSR, bound}).solution;
      break;
  }
  throw ParseError("algo '" + algo + "' does not support problem '" + std::string(problem_name(p)) +
                   "'");
}

long long ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               t0)
      .count();
}

void write_solution_file(const Solution& sol, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IOError("cannot write " + path);
  f << "# node parent (-1 = materialized)\n";
  for (NodeId v = 0; v < (NodeId)sol.parent.size(); ++v) f << v << " " << sol.parent[v] << "\n";
}

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::vector<Cost> parse_bounds(const std::string& spec) {
  long long start, stop, steps;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> start >> c1 >> stop >> c2 >> steps) || c1 != ':' || c2 != ':' || steps < 1 ||
      stop < start)
    throw ParseError("bad bounds spec (want start:stop:steps): " + spec);
  std::vector<Cost> out;
  for (long long i = 0; i < steps; ++i)
    out.push_back(steps == 1 ? start : start + (stop - start) * i / (steps - 1));
  return out;
}

int default_jobs() {
  if (const char* env = std::getenv("VERSTORE_JOBS")) {
    int j = std::atoi(env);
    if (j >= 1) return j;
  }
  return 1;
}

int run_solve(const std::string& graph_path, const std::string& problem, const std::string& algo,
              Cost bound, const SolveOpts& o, const std::string& out_path) {
  VersionGraph g = load_edge_list(graph_path);
  Problem p = parse_problem(problem);
  auto t0 = std::chrono::steady_clock::now();
  Solution sol = solve_once(g, p, algo, bound, o);
  long long ms = ms_since(t0);
  CostReport rep = evaluate(g, sol);
  std::cout << objective_of(rep, p) << "," << rep.storage_total << "," << rep.retrieval_sum << ","
            << rep.retrieval_max << "," << ms << "\n";
  if (!out_path.empty()) write_solution_file(sol, out_path);
  return 0;
}

int run_bench(const std::string& graph_path, const std::string& problem,
              const std::string& algo_list, const std::string& bounds_spec, const SolveOpts& o,
              int jobs, const std::string& out_path) {
  VersionGraph g = load_edge_list(graph_path);
  Problem p = parse_problem(problem);
  std::string ds = dataset_name(graph_path);
  std::vector<Cost> bounds = parse_bounds(bounds_spec);
  std::vector<std::string> algos;
  {
    std::istringstream in(algo_list);
    for (std::string a; std::getline(in, a, ',');)
      if (!a.empty()) algos.push_back(a);
  }
  if (algos.empty()) throw ParseError("empty algo list");

  // One task per output block; blocks are printed in construction order, so
  // the CSV is deterministic no matter how the pool schedules them.
  std::vector<std::function<std::string()>> tasks;
  for (const std::string& algo : algos) {
    bool frontier_algo = algo == "dp-extracted" && p == Problem::MSR;
    if (frontier_algo) {
      // Whole frontier from one run; every row shares that run's time.
      tasks.push_back([&, algo]() {
        std::ostringstream out;
        auto t0 = std::chrono::steady_clock::now();
        Frontier fr = dp_msr_heuristic(g, o.root, o.epsilon, o.prune);
        long long ms = ms_since(t0);
        for (Cost b : bounds) {
          const FrontierPoint* best = nullptr;
          for (const FrontierPoint& pt : fr)
            if (pt.storage <= b) best = &pt;
          if (best)
            out << algo << "," << ds << "," << b << "," << best->retrieval_sum << "," << ms << "\n";
          else
            out << algo << "," << ds << "," << b << ",infeasible," << ms << "\n";
        }
        for (const FrontierPoint& pt : fr)
          out << algo << "-frontier," << ds << "," << pt.storage << "," << pt.retrieval_sum << ","
              << ms << "\n";
        return out.str();
      });
      continue;
    }
    for (Cost b : bounds) {
      tasks.push_back([&, algo, b]() {
        std::ostringstream out;
        auto t0 = std::chrono::steady_clock::now();
        try {
          Solution sol = solve_once(g, p, algo, b, o);
          long long ms = ms_since(t0);
          out << algo << "," << ds << "," << b << "," << objective_of(evaluate(g, sol), p) << ","
              << ms << "\n";
        } catch (const InfeasibleError&) {
          out << algo << "," << ds << "," << b << ",infeasible," << ms_since(t0) << "\n";
        }
        return out.str();
      });
    }
  }

  std::vector<std::string> blocks(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
      blocks[i] = tasks[i]();
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ostringstream csv;
  csv << "algo,dataset,budget,objective,runtime_ms\n";
  for (const std::string& b : blocks) csv << b;
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw IOError("cannot write " + out_path);
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"version-graph storage/retrieval toolkit"};
  app.require_subcommand(1);

  std::string graph_path, problem = "msr", algo = "lmg", out_path, dump_path, in_path;
  std::string epsilon_s = "1/4", prune_s = "3", algos, bounds_spec;
  long long bound = 0, budget = 0;
  NodeId root = 0;
  uint64_t seed = 0;
  double er_p = -1;
  bool compress = false;
  int jobs = default_jobs();

  CLI::App* solve = app.add_subcommand(
      "solve", "solve one instance; prints objective,storage,retrieval_sum,retrieval_max,runtime_ms");
  solve->add_option("--problem", problem, "msr|mmr|bsr|bmr")->required();
  solve->add_option("--algo", algo, "lmg|lmg-all|mp|dp-tree|dp-btw|dp-extracted|oracle")
      ->required();
  solve->add_option("--graph", graph_path)->required();
  solve->add_option("--bound", bound, "storage budget (msr/mmr) or retrieval budget (bsr/bmr)")
      ->required();
  solve->add_option("--epsilon", epsilon_s, "approximation parameter, p/q or decimal");
  solve->add_option("--prune", prune_s, "frontier pruning factor (dp-extracted)");
  solve->add_option("--root", root, "extraction root (dp-tree / dp-extracted)");
  solve->add_option("--seed", seed);
  solve->add_option("--out", out_path, "write the storage plan here");

  CLI::App* bench = app.add_subcommand("bench", "sweep budgets; CSV algo,dataset,budget,objective,runtime_ms");
  bench->add_option("--graph", graph_path)->required();
  bench->add_option("--problem", problem)->required();
  bench->add_option("--algos", algos, "comma-separated algo list")->required();
  bench->add_option("--bounds", bounds_spec, "start:stop:steps")->required();
  bench->add_option("--epsilon", epsilon_s);
  bench->add_option("--prune", prune_s);
  bench->add_option("--root", root);
  bench->add_option("--seed", seed);
  bench->add_option("--jobs", jobs, "parallel cells (default $VERSTORE_JOBS or 1)");
  bench->add_option("--out", out_path, "CSV path (default stdout)");

  CLI::App* ingest = app.add_subcommand("ingest", "commit-dump JSON to edge list");
  ingest->add_option("--dump", dump_path)->required();
  ingest->add_option("--out", out_path)->required();

  CLI::App* transform = app.add_subcommand("transform", "rewrite a graph file");
  transform->add_flag("--compress", compress, "random compression of edge costs");
  transform->add_option("--er", er_p, "Erdos-Renyi re-wiring with this pair probability");
  transform->add_option("--seed", seed);
  transform->add_option("input", in_path)->required();
  transform->add_option("output", out_path)->required();

  CLI::App* export_cmd = app.add_subcommand("export-ilp", "write the flow ILP as an LP file");
  export_cmd->add_option("--graph", graph_path)->required();
  export_cmd->add_option("--budget", budget)->required();
  export_cmd->add_option("--out", out_path)->required();

  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset summary");
  stats_cmd->add_option("--graph", graph_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    SolveOpts opts{parse_rational(epsilon_s), parse_rational(prune_s), root};
    if (solve->parsed()) return run_solve(graph_path, problem, algo, bound, opts, out_path);
    if (bench->parsed())
      return run_bench(graph_path, problem, algos, bounds_spec, opts, jobs, out_path);
    if (ingest->parsed()) {
      save_edge_list(ingest_git(load_commit_dump(dump_path)), out_path);
      return 0;
    }
    if (transform->parsed()) {
      VersionGraph g = load_edge_list(in_path);
      if (compress == (er_p >= 0))
        throw ParseError("transform needs exactly one of --compress / --er");
      VersionGraph out =
          compress ? random_compression(g, seed) : er_construction(g.node_storages(), er_p, seed);
      save_edge_list(out, out_path);
      return 0;
    }
    if (export_cmd->parsed()) {
      export_ilp(load_edge_list(graph_path), budget, out_path);
      return 0;
    }
    if (stats_cmd->parsed()) {
      StatsSummary s = stats(load_edge_list(graph_path));
      std::cout << "nodes,edges,avg_node_storage,avg_edge_storage\n"
                << s.nodes << "," << s.edges << "," << s.avg_node_storage << ","
                << s.avg_edge_storage << "\n";
      return 0;
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
