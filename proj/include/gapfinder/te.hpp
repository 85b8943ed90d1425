// Traffic engineering: capacitated directed topologies, K-shortest path sets,
// max-flow / demand-pinning / partitioned-solver followers, and the oracle
// simulators used to validate every reported gap.
#pragma once

#include <fstream>
#include <numeric>
#include <queue>

#include "gapfinder/helpers.hpp"
#include "gapfinder/rewrite.hpp"
#include "gapfinder/simplex.hpp"
#include "json.hpp"

namespace gapfinder {

struct Topology {
  struct Edge {
    int src, dst;
    double capacity;
  };
  std::vector<std::string> nodes;
  std::vector<Edge> edges;

  int node_index(const std::string& name) const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown node " + name);
  }

  double average_capacity() const {
    if (edges.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : edges) s += e.capacity;
    return s / static_cast<double>(edges.size());
  }

  double total_capacity() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.capacity;
    return s;
  }
};

inline Topology topology_from_json(const nlohmann::json& j) {
  Topology t;
  for (const auto& n : j.at("nodes")) t.nodes.push_back(n.get<std::string>());
  for (const auto& e : j.at("edges")) {
    double cap = e.at("cap").get<double>();
    if (cap <= 0) throw std::invalid_argument("edge capacity must be positive");
    t.edges.push_back({t.node_index(e.at("src").get<std::string>()),
                       t.node_index(e.at("dst").get<std::string>()), cap});
  }
  return t;
}

inline nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json j;
  j["nodes"] = t.nodes;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : t.edges)
    j["edges"].push_back(
        {{"src", t.nodes[e.src]}, {"dst", t.nodes[e.dst]}, {"cap", e.capacity}});
  return j;
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return topology_from_json(j);
}

using Path = std::vector<int>;  // edge indices, connected src -> dst

namespace te_detail {

inline std::vector<std::string> path_nodes(const Topology& t, const Path& p, int src) {
  std::vector<std::string> seq{t.nodes[src]};
  int cur = src;
  for (int e : p) {
    if (t.edges[e].src != cur) throw std::logic_error("disconnected path");
    cur = t.edges[e].dst;
    seq.push_back(t.nodes[cur]);
  }
  return seq;
}

// (hops, lexicographic node sequence) ordering for deterministic ties.
inline bool path_less(const Topology& t, int src, const Path& a, const Path& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return path_nodes(t, a, src) < path_nodes(t, b, src);
}

// Min-hop path that is lexicographically least in its node sequence, under
// edge/node bans: BFS of hop distances to dst, then a greedy descent choosing
// the smallest-named next node.
inline std::optional<Path> shortest_path(const Topology& t, int src, int dst,
                                         const std::set<int>& banned_edges,
                                         const std::set<int>& banned_nodes) {
  int n = static_cast<int>(t.nodes.size());
  std::vector<std::vector<std::pair<int, int>>> radj(n);  // dst -> (src, edge)
  std::vector<std::vector<std::pair<int, int>>> adj(n);   // src -> (dst, edge)
  for (size_t e = 0; e < t.edges.size(); ++e) {
    if (banned_edges.count(static_cast<int>(e))) continue;
    const auto& ed = t.edges[e];
    if (banned_nodes.count(ed.src) || banned_nodes.count(ed.dst)) continue;
    radj[ed.dst].push_back({ed.src, static_cast<int>(e)});
    adj[ed.src].push_back({ed.dst, static_cast<int>(e)});
  }
  if (banned_nodes.count(src) || banned_nodes.count(dst)) return std::nullopt;
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  dist[dst] = 0;
  q.push(dst);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : radj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  if (dist[src] < 0) return std::nullopt;
  Path p;
  int cur = src;
  while (cur != dst) {
    int best_node = -1, best_edge = -1;
    for (auto [v, e] : adj[cur]) {
      if (dist[v] != dist[cur] - 1) continue;
      if (best_node < 0 || t.nodes[v] < t.nodes[best_node] ||
          (t.nodes[v] == t.nodes[best_node] && e < best_edge)) {
        best_node = v;
        best_edge = e;
      }
    }
    if (best_edge < 0) return std::nullopt;
    p.push_back(best_edge);
    cur = best_node;
  }
  return p;
}

}  // namespace te_detail

// K loopless paths in nondecreasing hop length, ties broken by lexicographic
// node sequence. A disconnected pair yields fewer than K paths.
inline std::vector<Path> yen_k_shortest_paths(const Topology& t, int src, int dst, int K) {
  using namespace te_detail;
  std::vector<Path> found;
  if (src == dst || K <= 0) return found;
  auto first = shortest_path(t, src, dst, {}, {});
  if (!first) return found;
  found.push_back(*first);

  auto cmp = [&](const Path& a, const Path& b) { return path_less(t, src, a, b); };
  std::vector<Path> candidates;

  while (static_cast<int>(found.size()) < K) {
    const Path& prev = found.back();
    std::vector<std::string> prev_nodes = path_nodes(t, prev, src);
    for (size_t i = 0; i < prev.size(); ++i) {
      // spur at the i-th node of the previous path
      Path root(prev.begin(), prev.begin() + i);
      int spur = i == 0 ? src : t.edges[prev[i - 1]].dst;
      std::set<int> banned_edges, banned_nodes;
      for (const Path& p : found) {
        if (p.size() >= i && std::equal(root.begin(), root.end(), p.begin()))
          if (p.size() > i) banned_edges.insert(p[i]);
      }
      int cur = src;
      for (size_t j = 0; j < i; ++j) {
        banned_nodes.insert(cur);  // root nodes except the spur stay off-limits
        cur = t.edges[root[j]].dst;
      }
      auto spur_path = shortest_path(t, spur, dst, banned_edges, banned_nodes);
      if (!spur_path) continue;
      Path cand = root;
      cand.insert(cand.end(), spur_path->begin(), spur_path->end());
      if (std::find(candidates.begin(), candidates.end(), cand) == candidates.end() &&
          std::find(found.begin(), found.end(), cand) == found.end())
        candidates.push_back(cand);
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(), cmp);
    found.push_back(*best);
    candidates.erase(best);
  }
  return found;
}

struct NodePair {
  int src, dst;
};

// A topology plus the per-pair path sets every encoding shares. Pairs with no
// path are excluded.
struct TeInstance {
  Topology topo;
  std::vector<NodePair> pairs;
  std::vector<std::vector<Path>> paths;  // first entry is the shortest path

  static TeInstance build(const Topology& t, int paths_per_pair = 4) {
    TeInstance inst;
    inst.topo = t;
    int n = static_cast<int>(t.nodes.size());
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d) {
        if (s == d) continue;
        auto ps = yen_k_shortest_paths(t, s, d, paths_per_pair);
        if (ps.empty()) continue;
        inst.pairs.push_back({s, d});
        inst.paths.push_back(std::move(ps));
      }
    return inst;
  }

  int pair_index(int src, int dst) const {
    for (size_t k = 0; k < pairs.size(); ++k)
      if (pairs[k].src == src && pairs[k].dst == dst) return static_cast<int>(k);
    return -1;
  }

  int shortest_hops(int k) const { return static_cast<int>(paths[k][0].size()); }

  double default_demand_cap() const { return topo.average_capacity() / 2.0; }
};

struct DemandVars {
  std::vector<VarId> vars;  // leader-owned, one per pair
  double d_max;
};

inline DemandVars make_demand_vars(Model& m, const TeInstance& inst, double d_max = 0.0,
                                   const std::string& stem = "d") {
  DemandVars dv;
  dv.d_max = d_max > 0 ? d_max : inst.default_demand_cap();
  for (size_t k = 0; k < inst.pairs.size(); ++k)
    dv.vars.push_back(m.new_var(VarKind::Continuous, 0, dv.d_max,
                                stem + "_" + inst.topo.nodes[inst.pairs[k].src] + "_" +
                                    inst.topo.nodes[inst.pairs[k].dst]));
  return dv;
}

struct FlowVars {
  std::vector<VarId> total;                  // per pair, -1 when outside the subset
  std::vector<std::vector<VarId>> per_path;  // per pair / per path
  std::vector<int> pair_subset;              // pair indices covered
};

namespace te_detail {

inline Constraint make_row(LinExpr lhs, Sense sense, double rhs, std::string tag) {
  rhs -= lhs.constant;
  lhs.constant = 0.0;
  lhs.normalize();
  return Constraint{std::move(lhs), sense, rhs, std::move(tag)};
}

}  // namespace te_detail

// Flow variables plus feasibility rows (flow aggregation, flow below volume,
// per-edge capacity). Variables land in `m`; rows go to `rows` so callers can
// keep them follower-local. `cap_fraction` scales every capacity.
inline FlowVars add_feasible_flow(Model& m, const TeInstance& inst,
                                  const std::vector<VarId>& demand_vars,
                                  std::vector<Constraint>& rows, const std::string& stem,
                                  const std::vector<int>& pair_subset = {},
                                  double cap_fraction = 1.0) {
  using te_detail::make_row;
  FlowVars fv;
  fv.total.assign(inst.pairs.size(), -1);
  fv.per_path.resize(inst.pairs.size());
  fv.pair_subset = pair_subset;
  if (fv.pair_subset.empty()) {
    fv.pair_subset.resize(inst.pairs.size());
    std::iota(fv.pair_subset.begin(), fv.pair_subset.end(), 0);
  }

  std::vector<LinExpr> edge_load(inst.topo.edges.size());
  for (int k : fv.pair_subset) {
    double cap_on_path = inst.topo.total_capacity();
    VarId fk = m.new_var(VarKind::Continuous, 0, cap_on_path, stem + "_f" + std::to_string(k));
    fv.total[k] = fk;
    LinExpr agg(fk);
    for (size_t p = 0; p < inst.paths[k].size(); ++p) {
      double bottleneck = kInf;
      for (int e : inst.paths[k][p])
        bottleneck = std::min(bottleneck, inst.topo.edges[e].capacity * cap_fraction);
      VarId fp = m.new_var(VarKind::Continuous, 0, bottleneck,
                           stem + "_f" + std::to_string(k) + "_p" + std::to_string(p));
      fv.per_path[k].push_back(fp);
      agg.add(fp, -1.0);
      for (int e : inst.paths[k][p]) edge_load[e].add(fp, 1.0);
    }
    rows.push_back(make_row(agg, Sense::Eq, 0, stem + "_agg"));
    LinExpr below(fk);
    below.add(demand_vars[k], -1.0);
    rows.push_back(make_row(below, Sense::Le, 0, stem + "_below_volume"));
  }
  for (size_t e = 0; e < inst.topo.edges.size(); ++e)
    if (!edge_load[e].terms.empty())
      rows.push_back(make_row(edge_load[e], Sense::Le, inst.topo.edges[e].capacity * cap_fraction,
                              stem + "_cap"));
  return fv;
}

// Maximize total flow over feasible flows.
inline FollowerSpec opt_max_flow_follower(Model& workspace, const TeInstance& inst,
                                          const DemandVars& demands,
                                          const std::string& stem = "opt") {
  FollowerSpec f;
  f.name = stem;
  FlowVars fv = add_feasible_flow(workspace, inst, demands.vars, f.constraints, stem);
  LinExpr total;
  for (int k : fv.pair_subset) {
    total.add(fv.total[k], 1.0);
    f.follower_vars.push_back(fv.total[k]);
    for (VarId fp : fv.per_path[k]) f.follower_vars.push_back(fp);
  }
  f.objective = Objective{ObjSense::Maximize, total};
  return f;
}

enum class DpVariant { BigM, Quantized };

struct DPConfig {
  double threshold = 0.0;  // 0: 5% of average link capacity
  DpVariant variant = DpVariant::Quantized;
  int hop_limit = 0;  // >0: pin only pairs whose shortest path has fewer hops
  double big_m = 1e4;

  double resolved_threshold(const TeInstance& inst) const {
    return threshold > 0 ? threshold : 0.05 * inst.topo.average_capacity();
  }
  bool pin_eligible(const TeInstance& inst, int k) const {
    return hop_limit <= 0 || inst.shortest_hops(k) < hop_limit;
  }
};

// Demand pinning: sub-threshold demands are forced onto their shortest path,
// the rest route optimally. The big-M variant gates the pin with an exact
// max(M(d-T), 0) expression built on the leader side; the quantized variant
// defers to quantization binaries materialized at compose time.
inline FollowerSpec dp_follower(Model& workspace, const TeInstance& inst,
                                const DemandVars& demands, const DPConfig& cfg,
                                const std::string& stem = "dp") {
  using te_detail::make_row;
  FollowerSpec f;
  f.name = stem;
  FlowVars fv = add_feasible_flow(workspace, inst, demands.vars, f.constraints, stem);
  LinExpr total;
  for (int k : fv.pair_subset) {
    total.add(fv.total[k], 1.0);
    f.follower_vars.push_back(fv.total[k]);
    for (VarId fp : fv.per_path[k]) f.follower_vars.push_back(fp);
  }
  f.objective = Objective{ObjSense::Maximize, total};

  double T = cfg.resolved_threshold(inst);
  for (int k : fv.pair_subset) {
    if (!cfg.pin_eligible(inst, k)) continue;
    VarId shortest_flow = fv.per_path[k][0];
    if (cfg.variant == DpVariant::Quantized) {
      f.quantized_pins.push_back({shortest_flow, demands.vars[k], T});
      continue;
    }
    // leader-side m_k = max(M (d_k - T), 0), exact via an indicator
    BigMContext ctx(workspace);
    double slack_need = cfg.big_m * std::max(demands.d_max - T, 1.0);
    VarId mk = workspace.new_var(VarKind::Continuous, 0, slack_need,
                                 stem + "_pinslack" + std::to_string(k));
    VarId bk = is_leq(ctx, LinExpr(demands.vars[k]), LinExpr(T));
    // m_k >= M (d_k - T)
    LinExpr ge(mk);
    ge.add(demands.vars[k], -cfg.big_m);
    workspace.add_constraint(ge, Sense::Ge, -cfg.big_m * T, stem + "_pindef");
    // m_k <= M (d_k - T) + span b_k ; m_k <= span (1 - b_k)
    LinExpr le1(mk);
    le1.add(demands.vars[k], -cfg.big_m);
    double span = slack_need + cfg.big_m * std::max(T, 1.0);
    le1.add(bk, -span);
    workspace.add_constraint(le1, Sense::Le, -cfg.big_m * T, stem + "_pindef");
    LinExpr le2(mk);
    le2.add(bk, slack_need);
    workspace.add_constraint(le2, Sense::Le, slack_need, stem + "_pindef");

    // follower rows: off-path flow and the unpinned remainder both <= m_k
    LinExpr off;
    for (size_t p = 1; p < fv.per_path[k].size(); ++p) off.add(fv.per_path[k][p], 1.0);
    off.add(mk, -1.0);
    f.constraints.push_back(make_row(off, Sense::Le, 0, stem + "_pin_off"));
    LinExpr rem(demands.vars[k]);
    rem.add(shortest_flow, -1.0);
    rem.add(mk, -1.0);
    f.constraints.push_back(make_row(rem, Sense::Le, 0, stem + "_pin_rem"));
  }
  return f;
}

enum class PopMode { Expected, Percentile };

struct POPConfig {
  int partitions = 2;
  int samples = 5;
  PopMode mode = PopMode::Expected;
  double percentile_q = 0.9;  // used in Percentile mode
  // client splitting (optional)
  bool client_split = false;
  double split_threshold = 0.0;
  int max_splits = 2;
};

// Deterministic uniform partition: seeded Fisher-Yates shuffle of the pair
// indices, then round-robin assignment.
inline std::vector<int> pop_partition(size_t num_pairs, int partitions, uint64_t seed) {
  std::vector<int> order(num_pairs);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  for (size_t i = num_pairs; i > 1; --i) {
    size_t j = gen() % i;
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> part(num_pairs, 0);
  for (size_t i = 0; i < num_pairs; ++i) part[order[i]] = static_cast<int>(i) % partitions;
  return part;
}

// One seeded sample of the partitioned max-flow heuristic: disjoint demand
// subsets, each solved against capacities scaled by 1/partitions. A single
// block-diagonal LP captures all partitions; its optimum is the sum of the
// per-partition optima.
inline FollowerSpec pop_follower_sample(Model& workspace, const TeInstance& inst,
                                        const DemandVars& demands, const POPConfig& cfg,
                                        uint64_t seed, const std::string& stem = "pop") {
  FollowerSpec f;
  f.name = stem;
  auto part = pop_partition(inst.pairs.size(), cfg.partitions, seed);
  LinExpr total;
  for (int c = 0; c < cfg.partitions; ++c) {
    std::vector<int> subset;
    for (size_t k = 0; k < inst.pairs.size(); ++k)
      if (part[k] == c) subset.push_back(static_cast<int>(k));
    if (subset.empty()) continue;
    FlowVars fv = add_feasible_flow(workspace, inst, demands.vars, f.constraints,
                                    stem + "_c" + std::to_string(c), subset,
                                    1.0 / cfg.partitions);
    for (int k : subset) {
      total.add(fv.total[k], 1.0);
      f.follower_vars.push_back(fv.total[k]);
      for (VarId fp : fv.per_path[k]) f.follower_vars.push_back(fp);
    }
  }
  f.objective = Objective{ObjSense::Maximize, total};
  return f;
}

// Aggregate n sample placeholders: the empirical mean, or a percentile picked
// out of an odd-even transposition sorting network built from exact
// max-comparators (lo = a + b - hi keeps each comparator linear).
inline LinExpr pop_objective(Model& m, const std::vector<LinExpr>& samples, PopMode mode,
                             double q = 0.9, const std::string& stem = "pop_agg") {
  if (samples.empty()) return LinExpr(0.0);
  if (mode == PopMode::Expected) {
    LinExpr avg;
    for (const auto& s : samples) avg.add(s, 1.0 / static_cast<double>(samples.size()));
    return avg;
  }
  BigMContext ctx(m);
  double floor_const = 0.0;
  std::vector<LinExpr> lane = samples;
  size_t n = lane.size();
  for (size_t round = 0; round < n; ++round) {
    for (size_t i = round % 2; i + 1 < n; i += 2) {
      std::vector<LinExpr> pair{lane[i], lane[i + 1]};
      VarId hi = max_of(ctx, pair, floor_const, stem + "_cmp");
      LinExpr lo = lane[i];
      lo.add(lane[i + 1]);
      lo.add(hi, -1.0);
      lane[i] = lo;            // ascending order: min first
      lane[i + 1] = LinExpr(hi);
    }
  }
  int idx = static_cast<int>(std::ceil(q * static_cast<double>(n)));
  idx = std::min(std::max(idx, 1), static_cast<int>(n));
  return lane[static_cast<size_t>(idx - 1)];
}

// Split-flow gating for client splitting (max_splits = 2): seven flow slots
// per demand whose activity pattern follows the demand against the split
// threshold.
struct ClientSplitVars {
  std::vector<std::array<VarId, 7>> flows;  // [0]: unsplit, [1..2]: halves, [3..6]: quarters
};

inline ClientSplitVars pop_client_split_constraints(Model& m, const TeInstance& inst,
                                                    const DemandVars& demands,
                                                    const POPConfig& cfg,
                                                    const std::string& stem = "split") {
  if (cfg.max_splits != 2)
    throw std::invalid_argument("client splitting is implemented for max_splits = 2");
  double d_th = cfg.split_threshold;
  if (d_th <= 0) throw std::invalid_argument("client splitting needs a positive threshold");
  BigMContext ctx(m);
  ClientSplitVars out;
  for (size_t k = 0; k < inst.pairs.size(); ++k) {
    VarId d = demands.vars[k];
    std::array<VarId, 7> fs;
    for (int i = 0; i < 7; ++i) {
      double cap = i == 0 ? demands.d_max : (i <= 2 ? demands.d_max / 2 : demands.d_max / 4);
      fs[i] = m.new_var(VarKind::Continuous, 0, cap,
                        stem + std::to_string(k) + "_f" + std::to_string(i + 1));
      double frac = i == 0 ? 1.0 : (i <= 2 ? 0.5 : 0.25);
      LinExpr le(fs[i]);
      le.add(d, -frac);
      m.add_constraint(le, Sense::Le, 0, stem + "_capfrac");
    }
    // unsplit active iff d < d_th
    VarId b_lt = is_leq(ctx, LinExpr(d), LinExpr(d_th - ctx.epsilon));
    LinExpr g0(fs[0]);
    g0.add(b_lt, -demands.d_max);
    m.add_constraint(g0, Sense::Le, 0, stem + "_gate1");
    // halves active iff d >= d_th and d/2 < d_th
    VarId b_ge = is_leq(ctx, LinExpr(d_th), LinExpr(d));
    LinExpr half = 0.5 * LinExpr(d);
    VarId b_half = is_leq(ctx, half, LinExpr(d_th - ctx.epsilon));
    VarId gate2 = logic_and(ctx, {b_ge, b_half});
    for (int i = 1; i <= 2; ++i) {
      LinExpr g(fs[i]);
      g.add(gate2, -demands.d_max / 2);
      m.add_constraint(g, Sense::Le, 0, stem + "_gate2");
    }
    // quarters active iff d >= 2 d_th
    VarId b4 = is_leq(ctx, LinExpr(2.0 * d_th), LinExpr(d));
    for (int i = 3; i <= 6; ++i) {
      LinExpr g(fs[i]);
      g.add(b4, -demands.d_max / 4);
      m.add_constraint(g, Sense::Le, 0, stem + "_gate4");
    }
    out.flows.push_back(fs);
  }
  return out;
}

struct RealisticInputSpec {
  int locality_hops = 0;        // >0: far pairs capped at locality_small_bound
  double locality_small_bound = 0.0;
  int sparsity_budget = -1;     // >=0: at most this many active demands
  struct Goalpost {
    int pair;
    double anchor;
    double distance;
  };
  std::vector<Goalpost> goalposts;
};

inline void realistic_input_constraints(Model& m, const TeInstance& inst,
                                        const DemandVars& demands,
                                        const RealisticInputSpec& spec) {
  if (spec.locality_hops > 0) {
    for (size_t k = 0; k < inst.pairs.size(); ++k)
      if (inst.shortest_hops(static_cast<int>(k)) > spec.locality_hops)
        m.add_constraint(LinExpr(demands.vars[k]), Sense::Le, spec.locality_small_bound,
                         "locality");
  }
  if (spec.sparsity_budget >= 0) {
    LinExpr active_sum;
    for (size_t k = 0; k < inst.pairs.size(); ++k) {
      VarId act = m.new_var(VarKind::Binary, 0, 1, "_active" + std::to_string(k));
      LinExpr gate(demands.vars[k]);
      gate.add(act, -demands.d_max);
      m.add_constraint(gate, Sense::Le, 0, "sparsity");
      active_sum.add(act, 1.0);
    }
    m.add_constraint(active_sum, Sense::Le, spec.sparsity_budget, "sparsity");
  }
  for (const auto& g : spec.goalposts) {
    LinExpr hi(demands.vars[g.pair]);
    m.add_constraint(hi, Sense::Le, g.anchor + g.distance, "goalpost");
    LinExpr lo(demands.vars[g.pair]);
    m.add_constraint(lo, Sense::Ge, std::max(0.0, g.anchor - g.distance), "goalpost");
  }
}

// ---------------------------------------------------------------------------
// Oracle simulators: direct implementations of the heuristics (no encodings),
// used to validate every reported gap.

struct SimResult {
  bool feasible = true;
  double objective = 0.0;
  std::vector<double> per_pair_flow;
};

// Optimal multi-commodity max flow with demands fixed to constants.
inline SimResult simulate_opt(const TeInstance& inst, const std::vector<double>& demand_values,
                              const std::vector<int>& pair_subset = {}, double cap_fraction = 1.0,
                              const std::vector<double>* cap_override = nullptr) {
  Model m;
  std::vector<int> subset = pair_subset;
  if (subset.empty()) {
    subset.resize(inst.pairs.size());
    std::iota(subset.begin(), subset.end(), 0);
  }
  std::vector<LinExpr> edge_load(inst.topo.edges.size());
  std::vector<std::vector<VarId>> fp(inst.pairs.size());
  LinExpr total;
  for (int k : subset) {
    for (size_t p = 0; p < inst.paths[k].size(); ++p) {
      VarId v = m.new_var(VarKind::Continuous, 0, kInf,
                          "f" + std::to_string(k) + "_" + std::to_string(p));
      fp[k].push_back(v);
      total.add(v, 1.0);
      for (int e : inst.paths[k][p]) edge_load[e].add(v, 1.0);
    }
    LinExpr below;
    for (VarId v : fp[k]) below.add(v, 1.0);
    m.add_constraint(below, Sense::Le, demand_values[k], "below");
  }
  for (size_t e = 0; e < inst.topo.edges.size(); ++e) {
    double cap = cap_override ? (*cap_override)[e] : inst.topo.edges[e].capacity * cap_fraction;
    if (!edge_load[e].terms.empty()) m.add_constraint(edge_load[e], Sense::Le, cap, "cap");
  }
  m.set_objective(ObjSense::Maximize, total);
  Solution s = solve_lp(m);
  SimResult r;
  if (s.status != SolveStatus::Optimal) {
    r.feasible = false;
    return r;
  }
  r.objective = s.objective;
  r.per_pair_flow.assign(inst.pairs.size(), 0.0);
  for (int k : subset)
    for (VarId v : fp[k]) r.per_pair_flow[k] += s.value(v);
  return r;
}

// Demand pinning: route sub-threshold demands on their shortest paths, then
// optimally route the rest on the residual capacities. Pinned flows exceeding
// a link capacity make the instance infeasible and are reported as such.
inline SimResult simulate_dp(const TeInstance& inst, const std::vector<double>& demand_values,
                             const DPConfig& cfg) {
  double T = cfg.resolved_threshold(inst);
  std::vector<double> residual(inst.topo.edges.size());
  for (size_t e = 0; e < inst.topo.edges.size(); ++e) residual[e] = inst.topo.edges[e].capacity;
  double pinned_total = 0.0;
  std::vector<int> rest;
  std::vector<double> flows(inst.pairs.size(), 0.0);
  for (size_t k = 0; k < inst.pairs.size(); ++k) {
    bool pinned = demand_values[k] <= T && cfg.pin_eligible(inst, static_cast<int>(k));
    if (pinned && demand_values[k] > 0) {
      for (int e : inst.paths[k][0]) residual[e] -= demand_values[k];
      pinned_total += demand_values[k];
      flows[k] = demand_values[k];
    } else if (!pinned) {
      rest.push_back(static_cast<int>(k));
    }
  }
  SimResult r;
  for (double c : residual)
    if (c < -kFeasTol) {
      r.feasible = false;  // pinning oversubscribed a link
      return r;
    }
  SimResult opt = simulate_opt(inst, demand_values, rest, 1.0, &residual);
  if (!opt.feasible) {
    r.feasible = false;
    return r;
  }
  r.objective = pinned_total + opt.objective;
  r.per_pair_flow = flows;
  for (int k : rest) r.per_pair_flow[k] = opt.per_pair_flow[k];
  return r;
}

// One seeded sample of the partitioned heuristic.
inline SimResult simulate_pop(const TeInstance& inst, const std::vector<double>& demand_values,
                              const POPConfig& cfg, uint64_t seed) {
  auto part = pop_partition(inst.pairs.size(), cfg.partitions, seed);
  SimResult r;
  r.objective = 0.0;
  r.per_pair_flow.assign(inst.pairs.size(), 0.0);
  for (int c = 0; c < cfg.partitions; ++c) {
    std::vector<int> subset;
    for (size_t k = 0; k < inst.pairs.size(); ++k)
      if (part[k] == c) subset.push_back(static_cast<int>(k));
    if (subset.empty()) continue;
    SimResult sub = simulate_opt(inst, demand_values, subset, 1.0 / cfg.partitions);
    if (!sub.feasible) {
      r.feasible = false;
      return r;
    }
    r.objective += sub.objective;
    for (int k : subset) r.per_pair_flow[k] = sub.per_pair_flow[k];
  }
  return r;
}

// Mean heuristic value across the configured samples (seeds seed..seed+n-1).
inline double simulate_pop_expected(const TeInstance& inst,
                                    const std::vector<double>& demand_values,
                                    const POPConfig& cfg, uint64_t seed) {
  double sum = 0.0;
  for (int s = 0; s < cfg.samples; ++s)
    sum += simulate_pop(inst, demand_values, cfg, seed + static_cast<uint64_t>(s)).objective;
  return sum / std::max(1, cfg.samples);
}

}  // namespace gapfinder
