#include "verstore/tree_dp.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

namespace verstore {

namespace {

Cost sat_add(Cost a, Cost b) {
  if (a >= kInf || b >= kInf) return kInf;
  return a + b;
}

// Undirected tree adjacency from the structural parent/children maps.
std::vector<std::vector<NodeId>> neighbors(const BidirectionalTree& t) {
  std::vector<std::vector<NodeId>> adj(t.n());
  for (NodeId v = 0; v < t.n(); ++v)
    for (NodeId c : t.children(v)) {
      adj[v].push_back(c);
      adj[c].push_back(v);
    }
  return adj;
}

}  // namespace

// --------------------------------------------------------------------------
// BMR: DP over (node, supplier) pairs.

Solution dp_bmr_exact(const BidirectionalTree& t, Cost retrieval_budget, BmrTable* table_out) {
  const int n = t.n();
  auto adj = neighbors(t);

  // rpath[u][v]: retrieval cost of the directed u -> v tree path;
  // pred[u][v]: the node just before v on that path.
  std::vector<std::vector<Cost>> rpath(n, std::vector<Cost>(n, 0));
  std::vector<std::vector<NodeId>> pred(n, std::vector<NodeId>(n, kSelf));
  for (NodeId u = 0; u < n; ++u) {
    std::queue<NodeId> q;
    q.push(u);
    std::vector<char> seen(n, 0);
    seen[u] = 1;
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      for (NodeId y : adj[x]) {
        if (seen[y]) continue;
        seen[y] = 1;
        rpath[u][y] = checked_add(rpath[u][x], t.delta(x, y).r);
        pred[u][y] = x;
        q.push(y);
      }
    }
  }

  // Subtree intervals for "u in subtree(v)" tests.
  std::vector<int> tin(n), tout(n);
  {
    int clock = 0;
    std::function<void(NodeId)> dfs = [&](NodeId v) {
      tin[v] = clock++;
      for (NodeId c : t.children(v)) dfs(c);
      tout[v] = clock;
    };
    dfs(t.root());
  }
  auto in_subtree = [&](NodeId u, NodeId v) { return tin[v] <= tin[u] && tin[u] < tout[v]; };

  std::vector<NodeId> post;  // post-order over the structural tree
  {
    std::function<void(NodeId)> dfs = [&](NodeId v) {
      for (NodeId c : t.children(v)) dfs(c);
      post.push_back(v);
    };
    dfs(t.root());
  }

  std::vector<std::vector<Cost>> dp(n, std::vector<Cost>(n, kInf));
  std::vector<Cost> opt(n, kInf);
  std::vector<NodeId> opt_arg(n, kSelf);

  for (NodeId v : post) {
    for (NodeId u = 0; u < n; ++u) {
      if (rpath[u][v] > retrieval_budget) continue;
      Cost base = u == v ? t.node_storage(v) : t.delta(pred[u][v], v).s;
      Cost total = base;
      for (NodeId w : t.children(v)) {
        Cost pick;
        if (u != v && in_subtree(u, w))
          pick = dp[w][u];  // w lies on the supply path
        else
          pick = std::min(opt[w], dp[w][u]);
        total = sat_add(total, pick);
        if (total >= kInf) break;
      }
      dp[v][u] = total;
    }
    for (NodeId u = 0; u < n; ++u) {
      if (!in_subtree(u, v)) continue;
      if (dp[v][u] < opt[v]) {
        opt[v] = dp[v][u];
        opt_arg[v] = u;
      }
    }
  }

  if (table_out) {
    table_out->n = n;
    table_out->dp = dp;
    table_out->opt = opt;
  }

  std::vector<NodeId> parent(n, kSelf);
  std::function<void(NodeId, NodeId)> assign = [&](NodeId v, NodeId u) {
    parent[v] = u == v ? kSelf : pred[u][v];
    for (NodeId w : t.children(v)) {
      if (u != v && in_subtree(u, w)) {
        assign(w, u);
      } else if (dp[w][u] < opt[w]) {
        assign(w, u);
      } else {
        assign(w, opt_arg[w]);
      }
    }
  };
  assign(t.root(), opt_arg[t.root()]);
  return make_solution(std::move(parent));
}

std::string dump_bmr_table(const BmrTable& table) {
  std::ostringstream out;
  out << "v,u,dp\n";
  for (int v = 0; v < table.n; ++v)
    for (int u = 0; u < table.n; ++u)
      if (table.dp[v][u] < kInf) out << v << ',' << u << ',' << table.dp[v][u] << '\n';
  return out.str();
}

// --------------------------------------------------------------------------
// Dual binary search and MMR.

Solution dual_binary_search(const std::function<Solution(Cost)>& bounded_solver,
                            const VersionGraph& g, Cost hi_bound, Cost storage_target,
                            int* calls_out) {
  int calls = 0;
  auto storage_of = [&](const Solution& sol) { return evaluate(g, sol).storage_total; };

  Solution best = bounded_solver(hi_bound);
  ++calls;
  if (storage_of(best) > storage_target) {
    if (calls_out) *calls_out = calls;
    throw InfeasibleError("storage target below minimum at the loosest bound");
  }
  Cost lo = 0, hi = hi_bound;
  while (lo < hi) {
    Cost mid = lo + (hi - lo) / 2;
    Solution sol = bounded_solver(mid);
    ++calls;
    if (storage_of(sol) <= storage_target) {
      best = std::move(sol);
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (calls_out) *calls_out = calls;
  return best;
}

Solution mmr_via_bmr(const BidirectionalTree& t, Cost storage_budget, int* calls_out) {
  Cost r_max = 0;
  for (const Edge& e : t.graph().edges()) r_max = std::max(r_max, e.r);
  Cost hi = checked_mul((Cost)t.n(), r_max);
  return dual_binary_search([&](Cost bound) { return dp_bmr_exact(t, bound); }, t.graph(), hi,
                            storage_budget, calls_out);
}

// --------------------------------------------------------------------------
// MSR tree engine: the eight connection cases on a binary tree.

namespace {

enum Role : uint8_t { kNone = 0, kInd, kDep, kSrc };

struct StateKey {
  int k = 0;        // dependents incl. the subtree root; 0 for non-materialized states
  bool mat = false;
  Cost gamma = 0;   // root retrieval in ticks; 0 when materialized

  bool operator<(const StateKey& o) const {
    return std::tie(k, mat, gamma) < std::tie(o.k, o.mat, o.gamma);
  }
};

struct BackPtr {
  Role role[2] = {kNone, kNone};
  int ckey[2] = {-1, -1};    // index into the child's key list
  int centry[2] = {-1, -1};  // index into that key's Pareto vector
};

struct Entry {
  Cost rho;
  Cost sigma;
  BackPtr bp;
};

struct NodeTable {
  std::vector<StateKey> keys;
  std::vector<std::vector<Entry>> entries;  // parallel to keys, Pareto by (rho, sigma)
};

}  // namespace

struct TreeMsrEngine::Impl {
  const BidirectionalTree* tree;
  std::function<Cost(Cost)> collapse;
  Cost sigma_limit;
  std::vector<char> weight;  // 1 if the node's retrieval counts toward rho
  std::vector<NodeTable> tables;

  Cost squash(Cost sigma) const { return collapse ? collapse(sigma) : sigma; }

  void build(NodeId v) {
    for (NodeId c : tree->children(v)) build(c);
    const auto& kids = tree->children(v);
    if (kids.size() > 2) throw Error("MSR engine requires a binary tree");

    std::map<StateKey, std::vector<Entry>> acc;
    auto emit = [&](const StateKey& key, Cost rho, Cost sigma, const BackPtr& bp) {
      sigma = squash(sigma);
      if (sigma_limit >= 0 && sigma > sigma_limit) return;
      acc[key].push_back(Entry{rho, sigma, bp});
    };

    const Cost s_v = tree->node_storage(v);

    if (kids.empty()) {
      emit(StateKey{weight[v], true, 0}, 0, s_v, BackPtr{});
    } else {
      // Role product over the children: the subtree root is either
      // materialized (children independent or dependent) or supplied by one
      // child (the other, if any, independent or dependent).
      const int nc = static_cast<int>(kids.size());
      std::vector<Role> roles(nc);
      auto for_each_combo = [&](auto&& self, int i, auto&& leaf) -> void {
        if (i == nc) {
          leaf();
          return;
        }
        for (Role r : {kInd, kDep, kSrc}) {
          roles[i] = r;
          self(self, i + 1, leaf);
        }
      };
      for_each_combo(for_each_combo, 0, [&] {
        int nsrc = 0;
        for (int i = 0; i < nc; ++i)
          if (roles[i] == kSrc) ++nsrc;
        if (nsrc > 1) return;
        const bool v_mat = nsrc == 0;

        // Iterate the product of child states.
        std::function<void(int, std::vector<std::pair<int, int>>&)> walk =
            [&](int i, std::vector<std::pair<int, int>>& picks) {
              if (i == nc) {
                combine(v, v_mat, roles, picks, emit);
                return;
              }
              const NodeTable& ct = tables[kids[i]];
              for (int ki = 0; ki < static_cast<int>(ct.keys.size()); ++ki) {
                if (roles[i] == kDep && !ct.keys[ki].mat) continue;
                for (int ei = 0; ei < static_cast<int>(ct.entries[ki].size()); ++ei) {
                  picks.emplace_back(ki, ei);
                  walk(i + 1, picks);
                  picks.pop_back();
                }
              }
            };
        std::vector<std::pair<int, int>> picks;
        walk(0, picks);
      });
    }

    // Pareto-prune per key.
    NodeTable& nt = tables[v];
    for (auto& [key, vec] : acc) {
      std::sort(vec.begin(), vec.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.rho, a.sigma) < std::tie(b.rho, b.sigma);
      });
      std::vector<Entry> pareto;
      Cost best_sigma = kInf;
      for (const Entry& e : vec) {
        if (e.sigma < best_sigma) {
          pareto.push_back(e);
          best_sigma = e.sigma;
        }
      }
      nt.keys.push_back(key);
      nt.entries.push_back(std::move(pareto));
    }
  }

  template <typename Emit>
  void combine(NodeId v, bool v_mat, const std::vector<Role>& roles,
               const std::vector<std::pair<int, int>>& picks, Emit&& emit) {
    const auto& kids = tree->children(v);
    const Cost s_v = tree->node_storage(v);

    // Supply first: gamma is needed by dependent-child surcharges.
    Cost gamma = 0;
    Cost rho = 0, sigma = 0;
    BackPtr bp;
    for (int i = 0; i < static_cast<int>(kids.size()); ++i) {
      bp.role[i] = roles[i];
      bp.ckey[i] = picks[i].first;
      bp.centry[i] = picks[i].second;
    }
    if (v_mat) {
      sigma = s_v;
    } else {
      int si = roles[0] == kSrc ? 0 : 1;
      NodeId c = kids[si];
      const StateKey& ck = tables[c].keys[picks[si].first];
      const Entry& ce = tables[c].entries[picks[si].first][picks[si].second];
      gamma = checked_add(ck.gamma, tree->delta(c, v).r);
      sigma = checked_add(ce.sigma, tree->delta(c, v).s);
      // child's subtree plus v's own retrieval (skipped for zero-weight nodes)
      rho = checked_add(ce.rho, weight[v] ? gamma : 0);
    }

    int k = v_mat ? weight[v] : 0;
    for (int i = 0; i < static_cast<int>(kids.size()); ++i) {
      if (roles[i] == kSrc) continue;
      NodeId c = kids[i];
      const StateKey& ck = tables[c].keys[picks[i].first];
      const Entry& ce = tables[c].entries[picks[i].first][picks[i].second];
      if (roles[i] == kInd) {
        rho = checked_add(rho, ce.rho);
        sigma = checked_add(sigma, ce.sigma);
      } else {  // dependent: exchange the child's materialization for the edge
        const Edge& down = tree->delta(v, c);
        sigma = checked_add(sigma, checked_add(ce.sigma, down.s - tree->node_storage(c)));
        Cost shift = checked_add(down.r, gamma);
        rho = checked_add(rho, checked_add(ce.rho, checked_mul((Cost)ck.k, shift)));
        if (v_mat) k += ck.k;
      }
    }
    emit(StateKey{k, v_mat, gamma}, rho, sigma, bp);
  }

  void reconstruct(NodeId v, int key_idx, int entry_idx, NodeId override_parent,
                   std::vector<NodeId>& parent) const {
    const NodeTable& nt = tables[v];
    const StateKey& key = nt.keys[key_idx];
    const Entry& e = nt.entries[key_idx][entry_idx];
    const auto& kids = tree->children(v);

    constexpr NodeId kNoOverride = -2;
    if (override_parent != kNoOverride) {
      parent[v] = override_parent;
    } else if (key.mat) {
      parent[v] = kSelf;
    } else {
      for (int i = 0; i < static_cast<int>(kids.size()); ++i)
        if (e.bp.role[i] == kSrc) parent[v] = kids[i];
    }
    for (int i = 0; i < static_cast<int>(kids.size()); ++i) {
      if (e.bp.role[i] == kNone) continue;
      NodeId next_override = e.bp.role[i] == kDep ? v : kNoOverride;
      reconstruct(kids[i], e.bp.ckey[i], e.bp.centry[i], next_override, parent);
    }
  }
};

TreeMsrEngine::TreeMsrEngine(const BidirectionalTree& binary_tree,
                             std::function<Cost(Cost)> collapse_sigma, Cost sigma_limit,
                             std::vector<char> counts_retrieval) {
  impl_ = std::make_shared<Impl>();
  impl_->tree = &binary_tree;
  impl_->collapse = std::move(collapse_sigma);
  impl_->sigma_limit = sigma_limit;
  impl_->weight = counts_retrieval.empty() ? std::vector<char>(binary_tree.n(), 1)
                                           : std::move(counts_retrieval);
  impl_->tables.resize(binary_tree.n());
  impl_->build(binary_tree.root());

  const NodeTable& rt = impl_->tables[binary_tree.root()];
  for (int ki = 0; ki < static_cast<int>(rt.keys.size()); ++ki)
    for (int ei = 0; ei < static_cast<int>(rt.entries[ki].size()); ++ei)
      roots_.push_back(RootEntry{rt.entries[ki][ei].rho, rt.entries[ki][ei].sigma, ki, ei});
  std::sort(roots_.begin(), roots_.end(), [](const RootEntry& a, const RootEntry& b) {
    return std::tie(a.rho, a.sigma) < std::tie(b.rho, b.sigma);
  });
}

Solution TreeMsrEngine::reconstruct(const RootEntry& e) const {
  std::vector<NodeId> parent(impl_->tree->n(), kSelf);
  impl_->reconstruct(impl_->tree->root(), e.state, e.entry, -2, parent);
  return make_solution(std::move(parent));
}

std::vector<MsrTableRow> TreeMsrEngine::table_rows() const {
  std::vector<MsrTableRow> rows;
  for (NodeId v = 0; v < impl_->tree->n(); ++v) {
    const NodeTable& nt = impl_->tables[v];
    for (int ki = 0; ki < static_cast<int>(nt.keys.size()); ++ki)
      for (const Entry& e : nt.entries[ki])
        rows.push_back(MsrTableRow{v, nt.keys[ki].k, nt.keys[ki].mat, nt.keys[ki].gamma, e.rho,
                                   e.sigma});
  }
  return rows;
}

std::string dump_msr_table(const std::vector<MsrTableRow>& rows) {
  std::ostringstream out;
  out << "v,k,mat,gamma,rho,sigma\n";
  for (const MsrTableRow& r : rows)
    out << r.v << ',' << r.k << ',' << (r.mat ? 1 : 0) << ',' << r.gamma << ',' << r.rho << ','
        << r.sigma << '\n';
  return out.str();
}

// --------------------------------------------------------------------------
// MSR on trees: single pass and full scheme.

Solution dp_msr_tree(const BidirectionalTree& t, Cost storage_budget, const Rational& epsilon,
                     std::vector<MsrTableRow>* table_out) {
  BinarizedTree bin = binarize_tree(t);
  auto [dt, params] = discretize(bin.tree, epsilon);
  (void)params;
  std::vector<char> counts(dt.n());
  for (NodeId v = 0; v < dt.n(); ++v) counts[v] = v < t.n() ? 1 : 0;
  TreeMsrEngine engine(dt, nullptr, -1, std::move(counts));
  if (table_out) *table_out = engine.table_rows();

  const TreeMsrEngine::RootEntry* best = nullptr;
  for (const auto& e : engine.root_entries()) {
    if (e.sigma > storage_budget) continue;
    if (!best || std::tie(e.rho, e.sigma) < std::tie(best->rho, best->sigma)) best = &e;
  }
  if (!best) throw InfeasibleError("storage budget below minimum arborescence weight");
  Solution bin_sol = engine.reconstruct(*best);
  return project_solution(bin, t, bin_sol);
}

Solution dp_msr_tree_fptas(const BidirectionalTree& t, Cost storage_budget,
                           const Rational& epsilon) {
  BidirectionalTree work = t;
  std::vector<char> modified(t.graph().m(), 0);

  bool have_best = false;
  Solution best;
  Cost best_sum = 0;

  // One round per zeroable edge plus the untouched first round; the loop
  // breaks early once no positive-retrieval edge remains.
  const int rounds = t.graph().m() + 1;
  for (int round = 0; round < rounds; ++round) {
    bool round_feasible = true;
    Solution sol;
    try {
      sol = dp_msr_tree(work, storage_budget, epsilon);
    } catch (const InfeasibleError&) {
      // Zeroing an edge re-prices it as a materialization, which can raise the
      // minimum storage above the budget. That is not terminal: a later round
      // may zero the edge the optimum avoids anyway, so skip, don't stop.
      round_feasible = false;
    }
    if (round_feasible) {
      // Map back to the original costs: a stored modified edge is exactly a
      // materialization of its head.
      for (NodeId v = 0; v < t.n(); ++v) {
        if (sol.parent[v] == kSelf) continue;
        int ei = *t.graph().edge_index(sol.parent[v], v);
        if (modified[ei]) sol.parent[v] = kSelf;
      }
      sol = make_solution(std::move(sol.parent));
      CostReport rep = evaluate(t.graph(), sol);
      if (rep.storage_total <= storage_budget &&
          (!have_best || rep.retrieval_sum < best_sum)) {
        have_best = true;
        best = sol;
        best_sum = rep.retrieval_sum;
      }
    }
    // Zero the heaviest remaining retrieval edge.
    int heavy = -1;
    for (int ei = 0; ei < t.graph().m(); ++ei) {
      if (modified[ei]) continue;
      const Edge& e = t.graph().edge(ei);
      if (e.r == 0) continue;
      if (heavy == -1) {
        heavy = ei;
        continue;
      }
      const Edge& h = t.graph().edge(heavy);
      if (std::make_tuple(-e.r, e.src, e.dst) < std::make_tuple(-h.r, h.src, h.dst)) heavy = ei;
    }
    if (heavy == -1) break;
    modified[heavy] = 1;
    const Edge& e = t.graph().edge(heavy);
    work.set_delta(e.src, e.dst, t.node_storage(e.dst), 0);
  }
  if (!have_best) throw InfeasibleError("storage budget below minimum arborescence weight");
  return best;
}

}  // namespace verstore
