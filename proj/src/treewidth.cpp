#include "verstore/treewidth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "verstore/tree_dp.hpp"

namespace verstore {

namespace {

// Children derived from parent fields; the `children` member is a producer
// convenience, not the source of truth.
template <typename D>
std::vector<std::vector<int>> derived_children(const D& d) {
  std::vector<std::vector<int>> kids(d.nodes.size());
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    int p = d.nodes[i].parent;
    if (p >= 0) kids[p].push_back(static_cast<int>(i));
  }
  return kids;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int pos_of(const std::vector<NodeId>& bag, NodeId v) {
  auto it = std::lower_bound(bag.begin(), bag.end(), v);
  if (it == bag.end() || *it != v) return -1;
  return static_cast<int>(it - bag.begin());
}

// Ancestors-first order over the bag; throws when anc has a cycle.
std::vector<int> anc_topo_order(const std::vector<uint32_t>& anc) {
  const int k = static_cast<int>(anc.size());
  std::vector<int> order;
  uint32_t done = 0;
  while (static_cast<int>(order.size()) < k) {
    bool progressed = false;
    for (int i = 0; i < k; ++i) {
      if (done & (1u << i)) continue;
      if ((anc[i] & ~done) == 0) {
        order.push_back(i);
        done |= 1u << i;
        progressed = true;
      }
    }
    if (!progressed) throw CyclicAncError("ancestor relation has a cycle");
  }
  return order;
}

}  // namespace

int TreeDecomposition::width() const {
  int w = -1;
  for (const auto& nd : nodes) w = std::max(w, static_cast<int>(nd.bag.size()) - 1);
  return w;
}

int NiceTreeDecomposition::width() const {
  int w = -1;
  for (const auto& nd : nodes) w = std::max(w, static_cast<int>(nd.bag.size()) - 1);
  return w;
}

TreeDecomposition parse_decomposition(const std::string& text) {
  struct Raw {
    long long id;
    long long parent;  // -1 = root
    std::vector<NodeId> bag;
  };
  std::vector<Raw> raws;
  std::map<long long, int> by_id;

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head != "bag")
      throw ParseError("line " + std::to_string(lineno) + ": expected 'bag', got '" + head + "'");
    Raw raw;
    std::string kind, parent_tok;
    if (!(ls >> raw.id >> kind >> parent_tok))
      throw ParseError("line " + std::to_string(lineno) + ": malformed bag record");
    if (raw.id < 0) throw ParseError("line " + std::to_string(lineno) + ": negative bag id");
    if (kind != "leaf" && kind != "introduce" && kind != "forget" && kind != "join" &&
        kind != "bag")
      throw ParseError("line " + std::to_string(lineno) + ": unknown bag kind '" + kind + "'");
    if (parent_tok == "-") {
      raw.parent = -1;
    } else {
      try {
        size_t used = 0;
        raw.parent = std::stoll(parent_tok, &used);
        if (used != parent_tok.size() || raw.parent < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad parent id '" + parent_tok +
                         "'");
      }
    }
    long long v;
    while (ls >> v) {
      if (v < 0) throw ParseError("line " + std::to_string(lineno) + ": negative vertex");
      raw.bag.push_back(static_cast<NodeId>(v));
    }
    if (!ls.eof())
      throw ParseError("line " + std::to_string(lineno) + ": trailing garbage");
    std::sort(raw.bag.begin(), raw.bag.end());
    if (std::adjacent_find(raw.bag.begin(), raw.bag.end()) != raw.bag.end())
      throw ParseError("line " + std::to_string(lineno) + ": duplicate vertex in bag");
    if (by_id.count(raw.id))
      throw ParseError("line " + std::to_string(lineno) + ": duplicate bag id");
    by_id[raw.id] = static_cast<int>(raws.size());
    raws.push_back(std::move(raw));
  }

  TreeDecomposition d;
  d.nodes.resize(raws.size());
  int roots = 0;
  for (size_t i = 0; i < raws.size(); ++i) {
    d.nodes[i].bag = raws[i].bag;
    if (raws[i].parent < 0) {
      d.nodes[i].parent = -1;
      d.root = static_cast<int>(i);
      ++roots;
    } else {
      auto it = by_id.find(raws[i].parent);
      if (it == by_id.end())
        throw InvalidDecompositionError("bag " + std::to_string(raws[i].id) +
                                        " references unknown parent");
      d.nodes[i].parent = it->second;
    }
  }
  if (roots != 1) throw InvalidDecompositionError("decomposition needs exactly one root bag");
  auto kids = derived_children(d);
  for (size_t i = 0; i < d.nodes.size(); ++i) d.nodes[i].children = kids[i];
  return d;
}

TreeDecomposition load_decomposition(const std::string& path) {
  return parse_decomposition(read_text_file(path));
}

void validate_decomposition(const VersionGraph& g, const TreeDecomposition& d) {
  if (d.nodes.empty()) throw InvalidDecompositionError("decomposition has no bags");
  if (d.root < 0 || d.root >= static_cast<int>(d.nodes.size()))
    throw InvalidDecompositionError("root index out of range");
  // Every bag must reach the root through parent links (tree shape).
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    std::vector<char> seen(d.nodes.size(), 0);
    int x = static_cast<int>(i);
    while (x != d.root) {
      if (x < 0 || x >= static_cast<int>(d.nodes.size()) || seen[x])
        throw InvalidDecompositionError("bag tree is not a tree rooted at the root bag");
      seen[x] = 1;
      x = d.nodes[x].parent;
    }
  }

  const int n = g.n();
  // Condition (i): vertices covered, bag members in range.
  std::vector<char> covered(n, 0);
  for (const auto& nd : d.nodes)
    for (NodeId v : nd.bag) {
      if (v < 0 || v >= n)
        throw InvalidDecompositionError("condition (i): bag vertex " + std::to_string(v) +
                                        " is not a graph vertex");
      covered[v] = 1;
    }
  for (NodeId v = 0; v < n; ++v)
    if (!covered[v])
      throw InvalidDecompositionError("condition (i): vertex " + std::to_string(v) +
                                      " is in no bag");

  // Condition (iii): both endpoints of every edge share a bag.
  for (const Edge& e : g.edges()) {
    bool found = false;
    for (const auto& nd : d.nodes)
      if (pos_of(nd.bag, e.src) >= 0 && pos_of(nd.bag, e.dst) >= 0) {
        found = true;
        break;
      }
    if (!found)
      throw InvalidDecompositionError("condition (iii): edge (" + std::to_string(e.src) + "," +
                                      std::to_string(e.dst) + ") has no common bag");
  }

  // Condition (ii): the bags containing v induce a connected subtree.
  auto kids = derived_children(d);
  for (NodeId v = 0; v < n; ++v) {
    int total = 0, start = -1;
    for (size_t i = 0; i < d.nodes.size(); ++i)
      if (pos_of(d.nodes[i].bag, v) >= 0) {
        ++total;
        start = static_cast<int>(i);
      }
    if (total == 0) continue;
    std::vector<int> stack{start};
    std::vector<char> seen(d.nodes.size(), 0);
    seen[start] = 1;
    int reached = 0;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      ++reached;
      std::vector<int> nbrs = kids[x];
      if (d.nodes[x].parent >= 0) nbrs.push_back(d.nodes[x].parent);
      for (int y : nbrs)
        if (!seen[y] && pos_of(d.nodes[y].bag, v) >= 0) {
          seen[y] = 1;
          stack.push_back(y);
        }
    }
    if (reached != total)
      throw InvalidDecompositionError("condition (ii): bags containing vertex " +
                                      std::to_string(v) + " are disconnected");
  }
}

void validate_nice(const VersionGraph& g, const NiceTreeDecomposition& d) {
  TreeDecomposition plain;
  plain.root = d.root;
  plain.nodes.resize(d.nodes.size());
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    plain.nodes[i].bag = d.nodes[i].bag;
    plain.nodes[i].parent = d.nodes[i].parent;
  }
  validate_decomposition(g, plain);

  auto kids = derived_children(d);
  auto subset = [](const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    const auto& nd = d.nodes[i];
    const auto& ch = kids[i];
    switch (nd.kind) {
      case BagKind::Leaf:
        if (!ch.empty() || nd.bag.size() != 1)
          throw InvalidDecompositionError("nice rule: leaf bags have size 1 and no children");
        break;
      case BagKind::Introduce:
        if (ch.size() != 1 || d.nodes[ch[0]].bag.size() + 1 != nd.bag.size() ||
            !subset(d.nodes[ch[0]].bag, nd.bag))
          throw InvalidDecompositionError(
              "nice rule: introduce child bag must be the bag minus one vertex");
        break;
      case BagKind::Forget:
        if (ch.size() != 1 || nd.bag.size() + 1 != d.nodes[ch[0]].bag.size() ||
            !subset(nd.bag, d.nodes[ch[0]].bag))
          throw InvalidDecompositionError(
              "nice rule: forget child bag must be the bag plus one vertex");
        break;
      case BagKind::Join:
        if (ch.size() != 2 || d.nodes[ch[0]].bag != nd.bag || d.nodes[ch[1]].bag != nd.bag)
          throw InvalidDecompositionError(
              "nice rule: join needs two children with identical bags");
        break;
    }
  }
}

NiceTreeDecomposition make_nice(const TreeDecomposition& d) {
  if (d.nodes.empty()) throw InvalidDecompositionError("decomposition has no bags");
  NiceTreeDecomposition out;
  auto add = [&](std::vector<NodeId> bag, BagKind kind, std::vector<int> ch) -> int {
    int idx = static_cast<int>(out.nodes.size());
    NiceTreeDecomposition::Node nd;
    nd.bag = std::move(bag);
    nd.kind = kind;
    out.nodes.push_back(std::move(nd));
    for (int c : ch) out.nodes[c].parent = idx;
    return idx;
  };
  // Grow a chain from `cur` (top bag `from`) up to bag `to` by forgetting the
  // surplus, then introducing the missing vertices.
  auto lift = [&](int cur, std::vector<NodeId> from, const std::vector<NodeId>& to) -> int {
    for (NodeId v : std::vector<NodeId>(from)) {
      if (pos_of(to, v) >= 0) continue;
      std::vector<NodeId> next;
      for (NodeId w : from)
        if (w != v) next.push_back(w);
      cur = add(next, BagKind::Forget, {cur});
      from = std::move(next);
    }
    for (NodeId v : to) {
      if (pos_of(from, v) >= 0) continue;
      std::vector<NodeId> next = from;
      next.insert(std::lower_bound(next.begin(), next.end(), v), v);
      cur = add(next, BagKind::Introduce, {cur});
      from = std::move(next);
    }
    return cur;
  };

  auto kids = derived_children(d);
  // Post-order build; built[i] = nice node whose top bag equals d's bag i,
  // or -1 for an empty leafless subtree.
  std::vector<int> built(d.nodes.size(), -2);
  std::vector<std::pair<int, int>> stack{{d.root, 0}};
  while (!stack.empty()) {
    auto& [i, phase] = stack.back();
    if (phase == 0) {
      phase = 1;
      for (int c : kids[i]) stack.push_back({c, 0});
      continue;
    }
    stack.pop_back();
    const auto& bag = d.nodes[i].bag;
    std::vector<int> subs;
    for (int c : kids[i]) {
      if (built[c] < 0) continue;
      subs.push_back(lift(built[c], d.nodes[c].bag, bag));
    }
    if (subs.empty()) {
      if (bag.empty()) {
        built[i] = -1;
        continue;
      }
      int cur = add({bag[0]}, BagKind::Leaf, {});
      std::vector<NodeId> have{bag[0]};
      built[i] = lift(cur, have, bag);
      continue;
    }
    while (subs.size() > 1) {
      int b = subs.back();
      subs.pop_back();
      int a = subs.back();
      subs.pop_back();
      subs.push_back(add(bag, BagKind::Join, {a, b}));
    }
    built[i] = subs[0];
  }
  if (built[d.root] < 0)
    throw InvalidDecompositionError("decomposition covers no vertices");
  // Forget everything above the old root so the nice root carries no state.
  out.root = lift(built[d.root], d.nodes[d.root].bag, {});

  auto nk = derived_children(out);
  for (size_t i = 0; i < out.nodes.size(); ++i) out.nodes[i].children = nk[i];
  return out;
}

TreeDecomposition min_degree_decomposition(const VersionGraph& g) {
  const int n = g.n();
  if (n == 0) throw InvalidDecompositionError("graph has no vertices");
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const Edge& e : g.edges()) {
    adj[e.src][e.dst] = 1;
    adj[e.dst][e.src] = 1;
  }
  std::vector<char> alive(n, 1);
  TreeDecomposition d;
  d.nodes.resize(n);
  std::vector<int> elim_pos(n, -1);
  std::vector<NodeId> order(n);
  for (int step = 0; step < n; ++step) {
    NodeId best = -1;
    int best_deg = n + 1;
    for (NodeId v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      int deg = 0;
      for (NodeId w = 0; w < n; ++w)
        if (alive[w] && adj[v][w]) ++deg;
      if (deg < best_deg) {
        best_deg = deg;
        best = v;
      }
    }
    std::vector<NodeId> bag{best};
    for (NodeId w = 0; w < n; ++w)
      if (alive[w] && adj[best][w]) bag.push_back(w);
    std::sort(bag.begin(), bag.end());
    d.nodes[step].bag = std::move(bag);
    // Fill in: the remaining neighbours must stay pairwise connected.
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b)
        if (a != b && alive[a] && alive[b] && adj[best][a] && adj[best][b]) adj[a][b] = 1;
    alive[best] = 0;
    elim_pos[best] = step;
    order[step] = best;
  }
  for (int i = 0; i < n; ++i) {
    int parent_step = -1;
    for (NodeId w : d.nodes[i].bag) {
      if (w == order[i]) continue;
      if (parent_step == -1 || elim_pos[w] < parent_step) parent_step = elim_pos[w];
    }
    if (parent_step == -1) parent_step = (i + 1 < n) ? i + 1 : -1;
    d.nodes[i].parent = parent_step;
  }
  d.root = n - 1;
  auto kids = derived_children(d);
  for (int i = 0; i < n; ++i) d.nodes[i].children = kids[i];
  return d;
}

NiceTreeDecomposition build_decomposition(const VersionGraph& g,
                                          const TreeDecomposition* provided) {
  TreeDecomposition base = provided ? *provided : min_degree_decomposition(g);
  validate_decomposition(g, base);
  NiceTreeDecomposition nice = make_nice(base);
  validate_nice(g, nice);
  return nice;
}

// --- bag state algebra -------------------------------------------------------

namespace {

void check_tuple(const std::vector<NodeId>& bag, const DPStateTuple& t) {
  const size_t k = bag.size();
  if (t.par.size() != k || t.dep.size() != k || t.ret.size() != k || t.anc.size() != k)
    throw Error("state tuple does not match the bag");
}

// Nearest bag ancestor of position w: the direct parent when it is in the
// bag, otherwise the deepest member of anc (the one with the most ancestors
// of its own); -1 when the chain leaves the bag for good.
int nearest_in_bag(const std::vector<NodeId>& bag, const std::vector<NodeId>& par,
                   const std::vector<uint32_t>& anc, int w) {
  if (par[w] == kSelf) return -1;
  int p = pos_of(bag, par[w]);
  if (p >= 0) return p;
  if (anc[w] == 0) return -1;
  int best = -1;
  for (int i = 0; i < static_cast<int>(bag.size()); ++i) {
    if (!(anc[w] >> i & 1u)) continue;
    if (best == -1 || std::popcount(anc[i]) > std::popcount(anc[best])) best = i;
  }
  return best;
}

}  // namespace

std::pair<DPStateTuple, DPStateTuple> external_retrieval(const std::vector<NodeId>& bag,
                                                         const DPStateTuple& t,
                                                         const std::set<NodeId>& side_a_private) {
  check_tuple(bag, t);
  const int k = static_cast<int>(bag.size());
  std::vector<int> order = anc_topo_order(t.anc);
  DPStateTuple ta = t, tb = t;
  auto uproot = [&](DPStateTuple& x, int i) {
    for (int w = 0; w < k; ++w) {
      if (w == i) continue;
      if (x.anc[w] >> i & 1u) {
        // w keeps i as an ancestor (i is now its root on this side); only
        // the severed part of the chain above i disappears.
        x.ret[w] -= x.ret[i];
        x.anc[w] &= ~x.anc[i];
      }
    }
    x.par[i] = kSelf;
    x.ret[i] = 0;
    x.anc[i] = 0;
  };
  for (int i : order) {
    NodeId p = t.par[i];
    if (p == kSelf || pos_of(bag, p) >= 0) continue;  // bag-internal edges stay on both sides
    if (side_a_private.count(p))
      uproot(tb, i);
    else
      uproot(ta, i);
  }
  return {ta, tb};
}

std::vector<Cost> external_dependency(const std::vector<NodeId>& bag, const DPStateTuple& t) {
  check_tuple(bag, t);
  anc_topo_order(t.anc);  // cycle check
  const int k = static_cast<int>(bag.size());
  std::vector<Cost> ext(t.dep);
  for (int i = 0; i < k; ++i) ext[i] -= 1;
  for (int w = 0; w < k; ++w) {
    int nb = nearest_in_bag(bag, t.par, t.anc, w);
    if (nb >= 0) ext[nb] -= t.dep[w];
  }
  return ext;
}

bool compatibility(const std::vector<NodeId>& bag, const DPStateTuple& t_z,
                   const DPStateTuple& t_a, const DPStateTuple& t_b) {
  check_tuple(bag, t_z);
  check_tuple(bag, t_a);
  check_tuple(bag, t_b);
  const int k = static_cast<int>(bag.size());
  std::set<NodeId> priv_a, priv_b;
  for (int i = 0; i < k; ++i) {
    if (t_a.par[i] != kSelf && pos_of(bag, t_a.par[i]) < 0) priv_a.insert(t_a.par[i]);
    if (t_b.par[i] != kSelf && pos_of(bag, t_b.par[i]) < 0) priv_b.insert(t_b.par[i]);
  }
  for (NodeId v : priv_a)
    if (priv_b.count(v)) return false;  // a forgotten vertex lives on one side only

  auto [ra, rb] = external_retrieval(bag, t_z, priv_a);
  if (ra.par != t_a.par || ra.ret != t_a.ret || ra.anc != t_a.anc) return false;
  if (rb.par != t_b.par || rb.ret != t_b.ret || rb.anc != t_b.anc) return false;

  std::vector<Cost> ez = external_dependency(bag, t_z);
  std::vector<Cost> ea = external_dependency(bag, t_a);
  std::vector<Cost> eb = external_dependency(bag, t_b);
  for (int i = 0; i < k; ++i)
    if (ez[i] != ea[i] + eb[i]) return false;
  return true;
}

Cost distribute_retrieval(const std::vector<NodeId>& bag, const DPStateTuple& t_z,
                          const DPStateTuple& t_a, const DPStateTuple& t_b) {
  check_tuple(bag, t_z);
  check_tuple(bag, t_a);
  check_tuple(bag, t_b);
  const int k = static_cast<int>(bag.size());
  // Each side that still roots v at SELF has v's whole subtree sitting at its
  // pre-merge offsets; hanging that subtree under v's merged parent shifts it
  // by Ret_z(v) per dependent. Bag vertices themselves are counted by both
  // sides, so their merged retrieval is subtracted once.
  Cost delta = 0;
  for (int i = 0; i < k; ++i) {
    if (t_z.par[i] != kSelf) {
      if (t_a.par[i] == kSelf) delta += t_a.dep[i] * t_z.ret[i];
      if (t_b.par[i] == kSelf) delta += t_b.dep[i] * t_z.ret[i];
    }
    delta -= t_z.ret[i];
  }
  return delta;
}

std::pair<VersionGraph, DiscretizationParams> discretize_graph(const VersionGraph& g,
                                                               const Rational& epsilon) {
  if (epsilon.num <= 0) throw Error("epsilon must be positive");
  DiscretizationParams p;
  p.epsilon = epsilon;
  p.n = g.n();
  for (const Edge& e : g.edges()) p.r_max = std::max(p.r_max, e.r);
  if (p.r_max == 0) {
    p.identity = true;
    return {g, p};
  }
  Cost n4 = checked_mul(checked_mul((Cost)p.n, p.n), checked_mul((Cost)p.n, p.n));
  __int128 tnum = static_cast<__int128>(n4) * epsilon.den;
  p.ticks = static_cast<Cost>((tnum + epsilon.num - 1) / epsilon.num);
  p.tick_len = Rational(checked_mul(checked_mul((Cost)p.n, p.n), p.r_max), p.ticks);

  VersionGraph dg(g.node_storages());
  for (const Edge& e : g.edges()) dg.add_edge(e.src, e.dst, e.s, p.discretize_r(e.r));
  return {dg, p};
}

// --- the DP over the decomposition ------------------------------------------

namespace {

enum class Mode { Sum, Max };

// par entries here are bag positions, kSelf (-1), or -2 for a parent that has
// already been forgotten.
constexpr int kExtPos = -2;

struct StateData {
  std::vector<int> par;
  std::vector<Cost> dep, ret;
  std::vector<uint32_t> anc;
};

struct BackPtr {
  BagKind kind = BagKind::Leaf;
  int sa = -1, ea = -1;
  int sb = -1, eb = -1;
  NodeId intro = kSelf;
  NodeId intro_par = kSelf;  // kSelf = materialized on introduction
  std::vector<NodeId> adopted;
};

struct Entry {
  Cost rho = 0, sigma = 0;
  BackPtr bp;
};

std::vector<Cost> key_of(const StateData& sd) {
  std::vector<Cost> key;
  key.reserve(4 * sd.par.size());
  for (int p : sd.par) key.push_back(p);
  for (Cost d : sd.dep) key.push_back(d);
  for (Cost r : sd.ret) key.push_back(r);
  for (uint32_t a : sd.anc) key.push_back(a);
  return key;
}

struct NodeTable {
  std::vector<StateData> states;
  std::vector<std::vector<Entry>> entries;
  std::map<std::vector<Cost>, int> index;

  int add_state(StateData sd) {
    auto key = key_of(sd);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int idx = static_cast<int>(states.size());
    states.push_back(std::move(sd));
    entries.emplace_back();
    index.emplace(std::move(key), idx);
    return idx;
  }

  void add_entry(int s, Cost rho, Cost sigma, BackPtr bp) {
    auto& v = entries[s];
    for (const Entry& e : v)
      if (e.rho <= rho && e.sigma <= sigma) return;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [&](const Entry& e) { return e.rho >= rho && e.sigma >= sigma; }),
            v.end());
    Entry ne{rho, sigma, std::move(bp)};
    auto pos = std::lower_bound(v.begin(), v.end(), rho,
                                [](const Entry& e, Cost r) { return e.rho < r; });
    v.insert(pos, std::move(ne));
  }
};

class DecompositionDP {
 public:
  DecompositionDP(const VersionGraph& g, const NiceTreeDecomposition& d, Mode mode)
      : g_(g), d_(d), mode_(mode), kids_(derived_children(d)), tables_(d.nodes.size()) {
    state_cap_ = resource_guard();
    std::vector<std::pair<int, int>> stack{{d_.root, 0}};
    while (!stack.empty()) {
      auto& [z, phase] = stack.back();
      if (phase == 0) {
        phase = 1;
        for (int c : kids_[z]) stack.push_back({c, 0});
        continue;
      }
      int node = z;
      stack.pop_back();
      process(node);
      if (static_cast<double>(tables_[node].states.size()) > state_cap_)
        throw TooLargeError("state table exceeds the per-bag resource bound");
      // Child tables feeding only this node could be dropped here; kept for
      // reconstruction.
    }
  }

  // Smallest rho whose storage fits the budget, as a parent assignment.
  Solution best(Cost storage_budget) const {
    const NodeTable& rt = tables_[d_.root];
    for (size_t s = 0; s < rt.states.size(); ++s)
      for (size_t e = 0; e < rt.entries[s].size(); ++e)
        if (rt.entries[s][e].sigma <= storage_budget) {
          std::vector<NodeId> parent(g_.n(), kSelf);
          reconstruct(d_.root, static_cast<int>(s), static_cast<int>(e), parent);
          return make_solution(std::move(parent));
        }
    throw InfeasibleError("no plan fits the storage budget");
  }

 private:
  const VersionGraph& g_;
  const NiceTreeDecomposition& d_;
  Mode mode_;
  std::vector<std::vector<int>> kids_;
  std::vector<NodeTable> tables_;
  double state_cap_ = 0;

  double resource_guard() const {
    int k = std::max(0, d_.width());
    double t = 1;
    for (const Edge& e : g_.edges()) t = std::max(t, static_cast<double>(e.r));
    double nticks = std::max<double>(t * g_.n() + 1, 2);
    double cap = std::pow(k + 2, k + 1) * std::pow(g_.n() + 1, k + 1) *
                 std::pow(nticks, k + 1) * std::pow(2.0, (k + 1) * (k + 1)) * nticks;
    return std::max(cap, 1e6);
  }

  Cost edge_s(NodeId u, NodeId v) const { return g_.edge(*g_.edge_index(u, v)).s; }
  Cost edge_r(NodeId u, NodeId v) const { return g_.edge(*g_.edge_index(u, v)).r; }

  void process(int z) {
    switch (d_.nodes[z].kind) {
      case BagKind::Leaf:
        leaf(z);
        break;
      case BagKind::Introduce:
        introduce(z);
        break;
      case BagKind::Forget:
        forget(z);
        break;
      case BagKind::Join:
        join(z);
        break;
    }
  }

  void leaf(int z) {
    NodeId v = d_.nodes[z].bag[0];
    StateData sd;
    sd.par = {kSelf};
    sd.dep = {mode_ == Mode::Sum ? 1 : 0};
    sd.ret = {0};
    sd.anc = {0};
    int s = tables_[z].add_state(std::move(sd));
    BackPtr bp;
    bp.kind = BagKind::Leaf;
    tables_[z].add_entry(s, 0, g_.node_storage(v), std::move(bp));
  }

  void introduce(int z) {
    const auto& nbag = d_.nodes[z].bag;
    int c = kids_[z][0];
    const auto& cbag = d_.nodes[c].bag;
    const int k = static_cast<int>(nbag.size());
    const int ck = static_cast<int>(cbag.size());
    NodeId v0 = kSelf;
    for (NodeId v : nbag)
      if (pos_of(cbag, v) < 0) v0 = v;
    const int iv0 = pos_of(nbag, v0);
    std::vector<int> up(ck);
    for (int i = 0; i < ck; ++i) up[i] = pos_of(nbag, cbag[i]);
    auto remap = [&](uint32_t m) {
      uint32_t o = 0;
      for (int i = 0; i < ck; ++i)
        if (m >> i & 1u) o |= 1u << up[i];
      return o;
    };

    // Positions (in the new bag) a freshly introduced v0 can adopt or hang
    // below; only vertices already in the bag can be its neighbours here.
    std::vector<int> par_choices{-1};
    for (int j = 0; j < k; ++j)
      if (j != iv0 && g_.has_edge(nbag[j], v0)) par_choices.push_back(j);

    const NodeTable& ct = tables_[c];
    NodeTable& out = tables_[z];
    for (int cs = 0; cs < static_cast<int>(ct.states.size()); ++cs) {
      const StateData& old = ct.states[cs];
      StateData base;
      base.par.assign(k, kSelf);
      base.dep.assign(k, 0);
      base.ret.assign(k, 0);
      base.anc.assign(k, 0);
      for (int i = 0; i < ck; ++i) {
        int ni = up[i];
        base.par[ni] = old.par[i] >= 0 ? up[old.par[i]] : old.par[i];
        base.dep[ni] = old.dep[i];
        base.ret[ni] = old.ret[i];
        base.anc[ni] = remap(old.anc[i]);
      }
      std::vector<int> wcand;
      for (int i = 0; i < ck; ++i)
        if (old.par[i] == kSelf && g_.has_edge(v0, cbag[i])) wcand.push_back(up[i]);

      auto bag_top = [&](int i) {
        if (base.anc[i] == 0) return i;
        for (int j = 0; j < k; ++j)
          if ((base.anc[i] >> j & 1u) && base.anc[j] == 0) return j;
        return i;  // unreachable in consistent states
      };

      for (int p0 : par_choices) {
        // v0's chain may not be re-rooted under v0 itself.
        int forbidden = -1;
        if (p0 >= 0) {
          int t = bag_top(p0);
          if (base.par[t] == kSelf) forbidden = t;
        }
        const int wn = static_cast<int>(wcand.size());
        for (int mask = 0; mask < (1 << wn); ++mask) {
          bool skip = false;
          for (int b = 0; b < wn; ++b)
            if ((mask >> b & 1) && wcand[b] == forbidden) skip = true;
          if (skip) continue;

          StateData nd = base;
          Cost dsig = 0, dr_sum = 0, rmax_cand = 0;
          if (p0 < 0) {
            nd.par[iv0] = kSelf;
            nd.ret[iv0] = 0;
            nd.anc[iv0] = 0;
            nd.dep[iv0] = mode_ == Mode::Sum ? 1 : 0;
            dsig += g_.node_storage(v0);
          } else {
            Cost rv0 = nd.ret[p0] + edge_r(nbag[p0], v0);
            nd.par[iv0] = p0;
            nd.anc[iv0] = nd.anc[p0] | (1u << p0);
            nd.ret[iv0] = rv0;
            nd.dep[iv0] = mode_ == Mode::Sum ? 1 : rv0;
            dsig += edge_s(nbag[p0], v0);
            if (mode_ == Mode::Sum)
              dr_sum += rv0;
            else
              rmax_cand = std::max(rmax_cand, rv0);
            for (int j = 0; j < k; ++j)
              if (nd.anc[iv0] >> j & 1u)
                nd.dep[j] = mode_ == Mode::Sum ? nd.dep[j] + 1 : std::max(nd.dep[j], rv0);
          }
          const uint32_t v0anc = nd.anc[iv0];
          std::vector<NodeId> adopted;
          for (int b = 0; b < wn; ++b) {
            if (!(mask >> b & 1)) continue;
            int u = wcand[b];
            adopted.push_back(nbag[u]);
            Cost du = nd.dep[u];  // untouched so far: u headed its own subtree
            Cost delta = nd.ret[iv0] + edge_r(v0, nbag[u]);
            dsig += edge_s(v0, nbag[u]) - g_.node_storage(nbag[u]);
            for (int w = 0; w < k; ++w) {
              if (w == u || !(nd.anc[w] >> u & 1u)) continue;
              nd.ret[w] += delta;
              nd.anc[w] |= v0anc | (1u << iv0);
              if (mode_ == Mode::Max) nd.dep[w] += delta;
            }
            nd.par[u] = iv0;
            nd.ret[u] = delta;
            nd.anc[u] = v0anc | (1u << iv0);
            if (mode_ == Mode::Sum) {
              dr_sum += du * delta;
              nd.dep[iv0] += du;
              for (int j = 0; j < k; ++j)
                if (v0anc >> j & 1u) nd.dep[j] += du;
            } else {
              nd.dep[u] += delta;
              Cost val = nd.dep[u];
              rmax_cand = std::max(rmax_cand, val);
              nd.dep[iv0] = std::max(nd.dep[iv0], val);
              for (int j = 0; j < k; ++j)
                if (v0anc >> j & 1u) nd.dep[j] = std::max(nd.dep[j], val);
            }
          }

          int si = out.add_state(std::move(nd));
          for (int ei = 0; ei < static_cast<int>(ct.entries[cs].size()); ++ei) {
            const Entry& e = ct.entries[cs][ei];
            Cost rho =
                mode_ == Mode::Sum ? e.rho + dr_sum : std::max(e.rho, rmax_cand);
            BackPtr bp;
            bp.kind = BagKind::Introduce;
            bp.sa = cs;
            bp.ea = ei;
            bp.intro = v0;
            bp.intro_par = p0 < 0 ? kSelf : nbag[p0];
            bp.adopted = adopted;
            out.add_entry(si, rho, e.sigma + dsig, std::move(bp));
          }
        }
      }
    }
  }

  void forget(int z) {
    const auto& nbag = d_.nodes[z].bag;
    int c = kids_[z][0];
    const auto& cbag = d_.nodes[c].bag;
    const int ck = static_cast<int>(cbag.size());
    int iw = -1;
    for (int i = 0; i < ck; ++i)
      if (pos_of(nbag, cbag[i]) < 0) iw = i;
    std::vector<int> down(ck, -1);
    for (int i = 0; i < ck; ++i)
      if (i != iw) down[i] = pos_of(nbag, cbag[i]);

    const NodeTable& ct = tables_[c];
    NodeTable& out = tables_[z];
    const int k = static_cast<int>(nbag.size());
    for (int cs = 0; cs < static_cast<int>(ct.states.size()); ++cs) {
      const StateData& old = ct.states[cs];
      StateData nd;
      nd.par.assign(k, kSelf);
      nd.dep.assign(k, 0);
      nd.ret.assign(k, 0);
      nd.anc.assign(k, 0);
      for (int i = 0; i < ck; ++i) {
        if (i == iw) continue;
        int ni = down[i];
        int p = old.par[i];
        nd.par[ni] = (p == iw) ? kExtPos : (p >= 0 ? down[p] : p);
        nd.dep[ni] = old.dep[i];
        nd.ret[ni] = old.ret[i];
        uint32_t m = old.anc[i] & ~(1u << iw);
        uint32_t o = 0;
        for (int j = 0; j < ck; ++j)
          if (m >> j & 1u) o |= 1u << down[j];
        nd.anc[ni] = o;
      }
      int si = out.add_state(std::move(nd));
      for (int ei = 0; ei < static_cast<int>(ct.entries[cs].size()); ++ei) {
        const Entry& e = ct.entries[cs][ei];
        BackPtr bp;
        bp.kind = BagKind::Forget;
        bp.sa = cs;
        bp.ea = ei;
        out.add_entry(si, e.rho, e.sigma, std::move(bp));
      }
    }
  }

  // Per-state side data reused across join pairings: how many dependents
  // outside the bag sit closest below each bag position (sum mode).
  static std::vector<Cost> ext_dep_positions(const StateData& sd) {
    const int k = static_cast<int>(sd.par.size());
    std::vector<Cost> ext(sd.dep);
    for (int i = 0; i < k; ++i) ext[i] -= 1;
    for (int w = 0; w < k; ++w) {
      int nb = -1;
      if (sd.par[w] >= 0) {
        nb = sd.par[w];
      } else if (sd.par[w] == kExtPos && sd.anc[w] != 0) {
        for (int i = 0; i < k; ++i) {
          if (!(sd.anc[w] >> i & 1u)) continue;
          if (nb == -1 || std::popcount(sd.anc[i]) > std::popcount(sd.anc[nb])) nb = i;
        }
      }
      if (nb >= 0) ext[nb] -= sd.dep[w];
    }
    return ext;
  }

  void join(int z) {
    const auto& bag = d_.nodes[z].bag;
    const int k = static_cast<int>(bag.size());
    const NodeTable& A = tables_[kids_[z][0]];
    const NodeTable& B = tables_[kids_[z][1]];
    NodeTable& out = tables_[z];

    std::map<std::vector<int>, std::vector<int>> b_by_par;
    for (int sb = 0; sb < static_cast<int>(B.states.size()); ++sb)
      b_by_par[B.states[sb].par].push_back(sb);

    std::vector<std::vector<Cost>> ext_a(A.states.size()), ext_b(B.states.size());
    if (mode_ == Mode::Sum) {
      for (size_t i = 0; i < A.states.size(); ++i) ext_a[i] = ext_dep_positions(A.states[i]);
      for (size_t i = 0; i < B.states.size(); ++i) ext_b[i] = ext_dep_positions(B.states[i]);
    }

    for (int sa = 0; sa < static_cast<int>(A.states.size()); ++sa) {
      const StateData& a = A.states[sa];
      // A vertex materialized on side a is either materialized on side b too
      // or hangs off one of b's forgotten vertices; everything else must match.
      std::vector<int> selfpos;
      for (int i = 0; i < k; ++i)
        if (a.par[i] == kSelf) selfpos.push_back(i);
      const int sn = static_cast<int>(selfpos.size());
      for (int mask = 0; mask < (1 << sn); ++mask) {
        std::vector<int> bpar(k);
        for (int i = 0; i < k; ++i) bpar[i] = a.par[i] == kExtPos ? kSelf : a.par[i];
        for (int b = 0; b < sn; ++b)
          if (mask >> b & 1) bpar[selfpos[b]] = kExtPos;
        auto it = b_by_par.find(bpar);
        if (it == b_by_par.end()) continue;
        for (int sb : it->second) combine_pair(z, sa, sb, &ext_a[sa], &ext_b[sb]);
      }
    }
    (void)out;
  }

  void combine_pair(int z, int sa, int sb, const std::vector<Cost>* exta,
                    const std::vector<Cost>* extb) {
    const auto& bag = d_.nodes[z].bag;
    const int k = static_cast<int>(bag.size());
    const NodeTable& A = tables_[kids_[z][0]];
    const NodeTable& B = tables_[kids_[z][1]];
    const StateData& a = A.states[sa];
    const StateData& b = B.states[sb];

    // Per vertex: merged parent, plus the nearest bag vertex on its merged
    // chain (pi) and the retrieval of the segment leading up to it.
    std::vector<int> par_z(k), pi(k, -1);
    std::vector<Cost> seg(k, 0), fin(k, 0);
    std::vector<char> is_final(k, 0);
    auto nba_of = [&](const StateData& s, int i) {
      int nb = -1;
      for (int j = 0; j < k; ++j) {
        if (!(s.anc[i] >> j & 1u)) continue;
        if (nb == -1 || std::popcount(s.anc[j]) > std::popcount(s.anc[nb])) nb = j;
      }
      return nb;
    };
    for (int i = 0; i < k; ++i) {
      if (a.par[i] == kSelf && b.par[i] == kSelf) {
        par_z[i] = kSelf;
      } else if (a.par[i] == kExtPos && b.par[i] == kSelf) {
        par_z[i] = kExtPos;
        int nb = nba_of(a, i);
        if (nb < 0) {
          is_final[i] = 1;
          fin[i] = a.ret[i];
        } else {
          pi[i] = nb;
          seg[i] = a.ret[i] - a.ret[nb];
        }
      } else if (a.par[i] == kSelf && b.par[i] == kExtPos) {
        par_z[i] = kExtPos;
        int nb = nba_of(b, i);
        if (nb < 0) {
          is_final[i] = 1;
          fin[i] = b.ret[i];
        } else {
          pi[i] = nb;
          seg[i] = b.ret[i] - b.ret[nb];
        }
      } else {  // both sides agree on a bag parent (the pairing guarantees it)
        par_z[i] = a.par[i];
        pi[i] = a.par[i];
        seg[i] = a.ret[i] - a.ret[a.par[i]];
      }
    }

    // Merged retrieval offsets, chains resolved top-down; a cyclic pi means
    // the two sides' private chains close a loop, so the pair is incompatible.
    std::vector<int> order;
    {
      std::vector<char> done(k, 0);
      while (static_cast<int>(order.size()) < k) {
        bool progressed = false;
        for (int i = 0; i < k; ++i) {
          if (done[i]) continue;
          if (pi[i] == -1 || done[pi[i]]) {
            done[i] = 1;
            order.push_back(i);
            progressed = true;
          }
        }
        if (!progressed) return;
      }
    }
    std::vector<Cost> retz(k, 0);
    std::vector<uint32_t> ancz(k, 0);
    for (int i : order) {
      if (par_z[i] == kSelf) continue;
      if (pi[i] == -1) {
        retz[i] = fin[i];
        ancz[i] = 0;
      } else {
        retz[i] = seg[i] + retz[pi[i]];
        ancz[i] = ancz[pi[i]] | (1u << pi[i]);
      }
    }

    Cost csig = 0;
    for (int i = 0; i < k; ++i) {
      if (par_z[i] >= 0)
        csig += edge_s(bag[par_z[i]], bag[i]);  // edge paid on both sides
      else
        csig += g_.node_storage(bag[i]);  // materialization paid twice or undone
    }

    std::vector<Cost> depz(k, 0);
    Cost radj = 0, rmax_cand = 0;
    if (mode_ == Mode::Sum) {
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int i = *it;
        depz[i] = 1 + (*exta)[i] + (*extb)[i];
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int i = *it;
        if (pi[i] >= 0) depz[pi[i]] += depz[i];
      }
      Cost shift = 0;
      for (int i = 0; i < k; ++i) {
        if (par_z[i] != kSelf) {
          if (a.par[i] == kSelf) shift += a.dep[i] * retz[i];
          if (b.par[i] == kSelf) shift += b.dep[i] * retz[i];
        }
        shift -= retz[i];
      }
      radj = shift;
    } else {
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int i = *it;
        Cost m = std::max(a.dep[i] + (retz[i] - a.ret[i]), b.dep[i] + (retz[i] - b.ret[i]));
        depz[i] = std::max(depz[i], m);
        if (pi[i] >= 0) depz[pi[i]] = std::max(depz[pi[i]], depz[i]);
      }
      for (int i = 0; i < k; ++i) rmax_cand = std::max(rmax_cand, depz[i]);
    }

    StateData nd;
    nd.par = std::move(par_z);
    nd.dep = std::move(depz);
    nd.ret = std::move(retz);
    nd.anc = std::move(ancz);
    NodeTable& out = tables_[z];
    int si = out.add_state(std::move(nd));
    for (int ea = 0; ea < static_cast<int>(A.entries[sa].size()); ++ea) {
      for (int eb = 0; eb < static_cast<int>(B.entries[sb].size()); ++eb) {
        const Entry& x = A.entries[sa][ea];
        const Entry& y = B.entries[sb][eb];
        Cost rho = mode_ == Mode::Sum ? x.rho + y.rho + radj
                                      : std::max({x.rho, y.rho, rmax_cand});
        BackPtr bp;
        bp.kind = BagKind::Join;
        bp.sa = sa;
        bp.ea = ea;
        bp.sb = sb;
        bp.eb = eb;
        out.add_entry(si, rho, x.sigma + y.sigma - csig, std::move(bp));
      }
    }
  }

  void reconstruct(int z, int s, int e, std::vector<NodeId>& parent) const {
    const Entry& en = tables_[z].entries[s][e];
    const BackPtr& bp = en.bp;
    switch (bp.kind) {
      case BagKind::Leaf:
        break;
      case BagKind::Introduce:
        if (bp.intro_par != kSelf) parent[bp.intro] = bp.intro_par;
        for (NodeId u : bp.adopted) parent[u] = bp.intro;
        reconstruct(kids_[z][0], bp.sa, bp.ea, parent);
        break;
      case BagKind::Forget:
        reconstruct(kids_[z][0], bp.sa, bp.ea, parent);
        break;
      case BagKind::Join:
        reconstruct(kids_[z][0], bp.sa, bp.ea, parent);
        reconstruct(kids_[z][1], bp.sb, bp.eb, parent);
        break;
    }
  }
};

NiceTreeDecomposition ensure_empty_root(const NiceTreeDecomposition& d) {
  if (d.nodes[d.root].bag.empty()) return d;
  NiceTreeDecomposition out = d;
  std::vector<NodeId> bag = out.nodes[out.root].bag;
  int cur = out.root;
  while (!bag.empty()) {
    std::vector<NodeId> next(bag.begin() + 1, bag.end());
    NiceTreeDecomposition::Node nd;
    nd.bag = next;
    nd.kind = BagKind::Forget;
    nd.parent = -1;
    int idx = static_cast<int>(out.nodes.size());
    out.nodes[cur].parent = idx;
    nd.children = {cur};
    out.nodes.push_back(std::move(nd));
    cur = idx;
    bag = std::move(next);
  }
  out.root = cur;
  return out;
}

VersionGraph with_edge_zeroed(const VersionGraph& g, int zero_idx) {
  VersionGraph ng(g.node_storages());
  for (int i = 0; i < g.m(); ++i) {
    Edge e = g.edge(i);
    if (i == zero_idx) {
      e.s = g.node_storage(e.dst);
      e.r = 0;
    }
    ng.add_edge(e.src, e.dst, e.s, e.r);
  }
  return ng;
}

Solution dp_btw(const VersionGraph& g, const NiceTreeDecomposition& d, Cost storage_budget,
                const Rational& epsilon, int k_max, Mode mode) {
  if (epsilon.num <= 0) throw Error("epsilon must be positive");
  if (d.width() > k_max)
    throw WidthExceededError("decomposition width " + std::to_string(d.width()) +
                             " exceeds the configured maximum " + std::to_string(k_max));
  validate_nice(g, d);
  NiceTreeDecomposition nice = ensure_empty_root(d);

  VersionGraph work = g;
  std::vector<char> modified(g.m(), 0);

  bool have_best = false;
  Solution best;
  Cost best_obj = 0;

  // Outer rounds re-price the heaviest remaining retrieval edge as a
  // materialization; one of the rounds leaves every edge the optimum uses
  // untouched with r_max at most the optimum, which yields the (1+eps) bound.
  const int rounds = g.m() + 1;
  for (int round = 0; round < rounds; ++round) {
    try {
      auto [gd, params] = discretize_graph(work, epsilon);
      (void)params;
      DecompositionDP dp(gd, nice, mode);
      Solution sol = dp.best(storage_budget);
      for (NodeId v = 0; v < g.n(); ++v) {
        if (sol.parent[v] == kSelf) continue;
        int ei = *g.edge_index(sol.parent[v], v);
        if (modified[ei]) sol.parent[v] = kSelf;
      }
      sol = make_solution(std::move(sol.parent));
      CostReport rep = evaluate(g, sol);
      Cost obj = mode == Mode::Sum ? rep.retrieval_sum : rep.retrieval_max;
      if (rep.storage_total <= storage_budget && (!have_best || obj < best_obj)) {
        have_best = true;
        best = std::move(sol);
        best_obj = obj;
      }
    } catch (const InfeasibleError&) {
      // Re-pricing can push the minimum storage over the budget; later rounds
      // may recover, so an infeasible round is skipped, not terminal.
    }
    int heavy = -1;
    for (int ei = 0; ei < work.m(); ++ei) {
      if (modified[ei]) continue;
      const Edge& e = work.edge(ei);
      if (e.r == 0) continue;
      if (heavy == -1) {
        heavy = ei;
        continue;
      }
      const Edge& h = work.edge(heavy);
      if (std::make_tuple(-e.r, e.src, e.dst) < std::make_tuple(-h.r, h.src, h.dst)) heavy = ei;
    }
    if (heavy == -1) break;
    modified[heavy] = 1;
    work = with_edge_zeroed(work, heavy);
  }
  if (!have_best) throw InfeasibleError("storage budget below minimum achievable storage");
  return best;
}

}  // namespace

Solution dp_msr_btw(const VersionGraph& g, const NiceTreeDecomposition& d, Cost storage_budget,
                    const Rational& epsilon, int k_max) {
  return dp_btw(g, d, storage_budget, epsilon, k_max, Mode::Sum);
}

Solution dp_mmr_btw(const VersionGraph& g, const NiceTreeDecomposition& d, Cost storage_budget,
                    const Rational& epsilon, int k_max) {
  return dp_btw(g, d, storage_budget, epsilon, k_max, Mode::Max);
}

}  // namespace verstore
