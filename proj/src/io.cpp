#include "verstore/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "verstore/rng.hpp"

namespace verstore {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IOError("write failed on " + path);
}

Cost half_up(__int128 num, Cost den) {
  return static_cast<Cost>((num * 2 + den) / (2 * den));
}

}  // namespace

VersionGraph parse_edge_list(const std::string& text) {
  std::map<NodeId, Cost> nodes;
  struct RawEdge {
    NodeId src, dst;
    Cost s, r;
    int line;
  };
  std::vector<RawEdge> edges;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto fail = [&](const std::string& what) {
      throw ParseError("line " + std::to_string(lineno) + ": " + what);
    };
    if (kind == "node") {
      NodeId id;
      Cost s;
      if (!(ls >> id >> s)) fail("expected `node <id> <s_v>`");
      if (id < 0 || s < 0) fail("negative value");
      if (nodes.count(id)) fail("node " + std::to_string(id) + " declared twice");
      nodes[id] = s;
    } else if (kind == "edge") {
      NodeId src, dst;
      Cost s, r;
      if (!(ls >> src >> dst >> s >> r)) fail("expected `edge <src> <dst> <s> <r>`");
      if (s < 0 || r < 0) fail("negative cost");
      if (src == dst) fail("self-loop");
      edges.push_back({src, dst, s, r, lineno});
    } else {
      fail("unknown record `" + kind + "`");
    }
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
  }

  std::vector<Cost> sv(nodes.size());
  for (auto& [id, s] : nodes) {
    if (id >= static_cast<NodeId>(nodes.size()))
      throw ParseError("node ids must be dense 0..n-1; got " + std::to_string(id));
    sv[id] = s;
  }
  VersionGraph g(sv);
  for (const RawEdge& e : edges) {
    if (e.src >= g.n() || e.dst >= g.n())
      throw UnknownNodeError("line " + std::to_string(e.line) + ": undeclared node");
    if (!g.add_edge(e.src, e.dst, e.s, e.r))
      throw DuplicateEdgeError("line " + std::to_string(e.line) + ": duplicate edge " +
                               std::to_string(e.src) + "->" + std::to_string(e.dst));
  }
  return g;
}

VersionGraph load_edge_list(const std::string& path) { return parse_edge_list(read_file(path)); }

std::string edge_list_text(const VersionGraph& g) {
  std::ostringstream out;
  for (NodeId v = 0; v < g.n(); ++v) out << "node " << v << ' ' << g.node_storage(v) << '\n';
  for (const Edge& e : g.edges())
    out << "edge " << e.src << ' ' << e.dst << ' ' << e.s << ' ' << e.r << '\n';
  return out.str();
}

void save_edge_list(const VersionGraph& g, const std::string& path) {
  write_file(path, edge_list_text(g));
}

CommitDump parse_commit_dump(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad commit dump: ") + e.what());
  }
  CommitDump dump;
  try {
    for (const auto& c : j.at("commits")) {
      CommitDump::Commit commit;
      commit.id = c.at("id").get<std::string>();
      commit.bytes = c.at("bytes").get<Cost>();
      for (const auto& p : c.value("parents", nlohmann::json::array()))
        commit.parents.push_back(p.get<std::string>());
      dump.commits.push_back(std::move(commit));
    }
    for (const auto& d : j.value("deltas", nlohmann::json::array()))
      dump.deltas.push_back({d.at("from").get<std::string>(), d.at("to").get<std::string>(),
                             d.at("bytes").get<Cost>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad commit dump: ") + e.what());
  }
  return dump;
}

CommitDump load_commit_dump(const std::string& path) {
  return parse_commit_dump(read_file(path));
}

VersionGraph ingest_git(const CommitDump& dump) {
  std::map<std::string, NodeId> index;
  std::vector<Cost> sv;
  for (const auto& c : dump.commits) {
    if (index.count(c.id)) throw ParseError("commit " + c.id + " appears twice");
    if (c.bytes < 0) throw ParseError("negative size for commit " + c.id);
    index[c.id] = static_cast<NodeId>(sv.size());
    sv.push_back(c.bytes);
  }
  auto lookup = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw UnknownNodeError("unknown commit " + id);
    return it->second;
  };

  std::map<std::pair<NodeId, NodeId>, Cost> delta;
  for (const auto& d : dump.deltas) {
    if (d.bytes < 0) throw ParseError("negative delta bytes");
    delta[{lookup(d.from), lookup(d.to)}] = d.bytes;
  }

  VersionGraph g(sv);
  std::vector<std::vector<NodeId>> parents(g.n());
  for (const auto& c : dump.commits)
    for (const auto& p : c.parents) parents[index[c.id]].push_back(lookup(p));

  // cycle check over the parent DAG (three-color DFS)
  {
    std::vector<int> color(g.n(), 0);
    std::function<void(NodeId)> dfs = [&](NodeId v) {
      color[v] = 1;
      for (NodeId p : parents[v]) {
        if (color[p] == 1) throw CyclicHistoryError("commit ancestry contains a cycle");
        if (color[p] == 0) dfs(p);
      }
      color[v] = 2;
    };
    for (NodeId v = 0; v < g.n(); ++v)
      if (color[v] == 0) dfs(v);
  }

  for (const auto& c : dump.commits) {
    NodeId child = index[c.id];
    for (const auto& pid : c.parents) {
      NodeId par = lookup(pid);
      for (auto [from, to] : {std::pair{par, child}, std::pair{child, par}}) {
        auto it = delta.find({from, to});
        if (it == delta.end())
          throw ParseError("missing delta " + dump.commits[from].id + " -> " +
                           dump.commits[to].id);
        g.add_edge(from, to, it->second, it->second);
      }
    }
  }
  return g;
}

VersionGraph random_compression(const VersionGraph& g, uint64_t seed) {
  SplitMix64 rng(seed);
  VersionGraph out(g.node_storages());
  for (const Edge& e : g.edges()) {
    double u = 0.3 + 0.7 * rng.next_unit();
    Cost s = static_cast<Cost>(e.s * u + 0.5);
    // rounding can undershoot 0.3*s by up to 0.5; clamp so s'/s stays in [0.3, 1]
    if (e.s >= 1) s = std::clamp(s, std::max((Cost)1, (3 * e.s + 9) / 10), e.s);
    Cost r = half_up((__int128)e.r * 12, 10);
    out.add_edge(e.src, e.dst, s, r);
  }
  return out;
}

VersionGraph er_construction(std::vector<Cost> node_storage, double p, uint64_t seed,
                             DeltaModel model) {
  SplitMix64 rng(seed);
  Cost total = 0;
  for (Cost s : node_storage) total += s;
  Cost cap = 1;
  if (!node_storage.empty())
    cap = std::max((Cost)1, half_up((__int128)total, (Cost)node_storage.size()) / 10);
  if (!model)
    model = [&rng, cap](NodeId, NodeId) {
      Cost c = (Cost)rng.next_in(1, cap);
      return std::pair<Cost, Cost>{c, c};
    };
  VersionGraph g(std::move(node_storage));
  for (NodeId u = 0; u < g.n(); ++u)
    for (NodeId v = u + 1; v < g.n(); ++v) {
      if (rng.next_unit() >= p) continue;
      auto [s1, r1] = model(u, v);
      g.add_edge(u, v, s1, r1);
      auto [s2, r2] = model(v, u);
      g.add_edge(v, u, s2, r2);
    }
  return g;
}

IlpModel build_ilp(const VersionGraph& g, Cost storage_budget) {
  IlpModel m;
  m.n = g.n();
  m.storage_budget = storage_budget;
  for (const Edge& e : g.edges()) m.edges.push_back(e);
  for (NodeId v = 0; v < g.n(); ++v)
    m.edges.push_back(Edge{g.n(), v, g.node_storage(v), 0});  // aux edges last

  auto name = [&](const char* prefix, const Edge& e) {
    std::string src = e.src == g.n() ? "aux" : std::to_string(e.src);
    return std::string(prefix) + "_" + src + "_" + std::to_string(e.dst);
  };
  for (int i = 0; i < (int)m.edges.size(); ++i)
    m.vars.push_back({name("x", m.edges[i]), m.edges[i].r, 0, i, false});
  for (int i = 0; i < (int)m.edges.size(); ++i)
    m.vars.push_back({name("I", m.edges[i]), 0, m.edges[i].s, i, true});
  return m;
}

std::string ilp_to_text(const IlpModel& m) {
  const int ne = (int)m.edges.size();
  std::ostringstream out;
  out << "Minimize\n obj:";
  for (int i = 0; i < ne; ++i)
    out << (i ? " + " : " ") << m.vars[i].obj_coeff << " " << m.vars[i].name;
  out << "\nSubject To\n";
  for (int i = 0; i < ne; ++i)
    out << " ind_" << m.vars[i].name << ": " << m.vars[i].name << " - " << m.n << " "
        << m.vars[ne + i].name << " <= 0\n";
  out << " storage:";
  for (int i = 0; i < ne; ++i)
    out << (i ? " + " : " ") << m.edges[i].s << " " << m.vars[ne + i].name;
  out << " <= " << m.storage_budget << "\n";
  for (NodeId u = 0; u < m.n; ++u) {
    out << " sink_" << u << ":";
    bool first = true;
    for (int i = 0; i < ne; ++i) {
      if (m.edges[i].dst == u) {
        out << (first ? " " : " + ") << m.vars[i].name;
        first = false;
      }
    }
    for (int i = 0; i < ne; ++i)
      if (m.edges[i].src == u) out << " - " << m.vars[i].name;
    out << " = 1\n";
  }
  out << "Bounds\n";
  for (int i = 0; i < ne; ++i) out << " 0 <= " << m.vars[i].name << " <= " << m.n << "\n";
  out << "Generals\n";
  for (int i = 0; i < ne; ++i) out << " " << m.vars[i].name;
  out << "\nBinaries\n";
  for (int i = 0; i < ne; ++i) out << " " << m.vars[ne + i].name;
  out << "\nEnd\n";
  return out.str();
}

void export_ilp(const VersionGraph& g, Cost storage_budget, const std::string& path) {
  write_file(path, ilp_to_text(build_ilp(g, storage_budget)));
}

IlpCheck ilp_substitute(const IlpModel& m, const VersionGraph& g, const Solution& sol) {
  const int ne = (int)m.edges.size();
  // x_e = number of retrieval chains crossing e; I_e = e stored.
  std::vector<Cost> x(ne, 0);
  std::vector<char> stored(ne, 0);
  auto find_edge = [&](NodeId src, NodeId dst) {
    for (int i = 0; i < ne; ++i)
      if (m.edges[i].src == src && m.edges[i].dst == dst) return i;
    return -1;
  };
  for (NodeId v = 0; v < g.n(); ++v) {
    NodeId w = v;
    while (true) {
      NodeId p = sol.parent[w];
      int ei = find_edge(p == kSelf ? g.n() : p, w);
      if (ei < 0) return {false, 0};
      stored[ei] = 1;
      ++x[ei];
      if (p == kSelf) break;
      w = p;
    }
  }

  IlpCheck res;
  res.feasible = true;
  for (int i = 0; i < ne; ++i) {
    res.objective += m.edges[i].r * x[i];
    if (x[i] > (Cost)m.n * (stored[i] ? 1 : 0)) res.feasible = false;  // indicator
    if (x[i] < 0 || x[i] > m.n) res.feasible = false;                  // bounds
  }
  Cost storage = 0;
  for (int i = 0; i < ne; ++i)
    if (stored[i]) storage += m.edges[i].s;
  if (storage > m.storage_budget) res.feasible = false;
  for (NodeId u = 0; u < m.n; ++u) {
    Cost flow = 0;
    for (int i = 0; i < ne; ++i) {
      if (m.edges[i].dst == u) flow += x[i];
      if (m.edges[i].src == u) flow -= x[i];
    }
    if (flow != 1) res.feasible = false;  // sink constraint
  }
  return res;
}

StatsSummary stats(const VersionGraph& g) {
  StatsSummary s;
  s.nodes = g.n();
  s.edges = g.m();
  if (g.n()) {
    __int128 total = 0;
    for (NodeId v = 0; v < g.n(); ++v) total += g.node_storage(v);
    s.avg_node_storage = half_up(total, g.n());
  }
  if (g.m()) {
    __int128 total = 0;
    for (const Edge& e : g.edges()) total += e.s;
    s.avg_edge_storage = half_up(total, g.m());
  }
  return s;
}

}  // namespace verstore
