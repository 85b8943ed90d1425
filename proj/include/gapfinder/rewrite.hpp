// Turns a leader/followers specification into one single-level MILP.
//
// A follower is classified by alignment against the leader objective:
// feasibility followers and aligned followers are inlined; misaligned LP
// followers are replaced by their optimality certificates, either first-order
// conditions with indicator-linearized complementary slackness, or
// primal+dual+strong-duality where leader-side terms in the duality equation
// are quantized and the remaining binary-times-continuous products are
// linearized.
#pragma once

#include <functional>
#include <map>
#include <set>

#include "gapfinder/helpers.hpp"
#include "gapfinder/milp.hpp"
#include "gapfinder/model.hpp"

namespace gapfinder {

struct FollowerSpec {
  std::string name;
  std::vector<Constraint> constraints;  // over workspace variable ids
  std::optional<Objective> objective;   // linear in the follower's variables
  std::vector<VarId> follower_vars;
  std::optional<LinExpr> output_expr;   // placeholder value for feasibility followers

  // Conditional shortest-path pinning rows materialized only under the
  // quantized rewrite, where the pin threshold selects quantization levels.
  struct QuantizedPin {
    VarId flow_var;    // follower flow on the shortest path
    VarId leader_var;  // pinned leader quantity
    double threshold;
  };
  std::vector<QuantizedPin> quantized_pins;

  // Leader variables that multiply follower variables somewhere upstream.
  // The linear IR cannot express such occurrences, so rewrites reject them.
  std::vector<VarId> coefficient_position_leaders;

  bool is_follower_var(VarId v) const {
    return std::find(follower_vars.begin(), follower_vars.end(), v) != follower_vars.end();
  }
};

struct BilevelSpec {
  Model workspace;  // leader vars + every follower's vars + input constraints
  ObjSense leader_sense = ObjSense::Maximize;
  struct Term {
    int follower;
    double sign;  // +1 or -1
  };
  std::vector<Term> leader_objective;
  std::vector<FollowerSpec> followers;
  std::vector<VarId> leader_vars;
  // When set, all negative-sign followers are combined as max_h(H_h) instead
  // of a plain sum (analyze a combination of heuristics).
  bool combine_negative = false;
};

enum class RewriteKind { Inline, Feasibility, Kkt, Pd, Qpd };
enum class Alignment { Aligned, Misaligned, Feasibility };

struct QuantizationScheme {
  // ascending level sets per leader var; must contain 0
  std::map<VarId, std::vector<double>> levels;
};

struct RewritePlan {
  std::vector<RewriteKind> per_follower;
  QuantizationScheme scheme;
};

struct RewriteOptions {
  double epsilon = 1e-4;
  double dual_bound = 0.0;  // 0: derive from objective coefficients
};

inline const char* to_string(RewriteKind k) {
  switch (k) {
    case RewriteKind::Inline: return "inline";
    case RewriteKind::Feasibility: return "feasibility";
    case RewriteKind::Kkt: return "kkt";
    case RewriteKind::Pd: return "pd";
    case RewriteKind::Qpd: return "qpd";
  }
  return "?";
}

inline Alignment classify_alignment(const BilevelSpec& spec, int follower_idx) {
  const FollowerSpec& f = spec.followers.at(follower_idx);
  if (!f.objective) return Alignment::Feasibility;
  double sign = 0.0;
  for (const auto& t : spec.leader_objective)
    if (t.follower == follower_idx) sign = t.sign;
  if (sign == 0.0) return Alignment::Feasibility;  // unused follower
  if (spec.leader_sense == ObjSense::Minimize) sign = -sign;
  bool fol_max = f.objective->sense == ObjSense::Maximize;
  if ((sign > 0 && fol_max) || (sign < 0 && !fol_max)) return Alignment::Aligned;
  return Alignment::Misaligned;
}

namespace rewrite_detail {

// Follower constraints and finite variable bounds, normalized for duality:
//   inequality rows:  (follower part) <= rhs_const - (leader part)
//   equality rows:    (follower part)  = rhs_const - (leader part)
struct DualizedRows {
  struct Row {
    LinExpr follower_part;  // terms over follower vars
    LinExpr leader_part;    // terms over leader/other vars (moved to the rhs)
    double rhs_const;
    bool equality;
    std::string tag;
  };
  std::vector<Row> rows;
};

inline DualizedRows normalize_rows(const Model& workspace, const FollowerSpec& f) {
  DualizedRows out;
  std::set<VarId> fset(f.follower_vars.begin(), f.follower_vars.end());
  auto split = [&](const Constraint& c, double flip) {
    DualizedRows::Row r;
    r.rhs_const = flip * c.rhs;
    r.equality = c.sense == Sense::Eq;
    r.tag = c.tag;
    for (const auto& t : c.lhs.terms) {
      if (fset.count(t.var)) r.follower_part.add(t.var, flip * t.coeff);
      else r.leader_part.add(t.var, flip * t.coeff);
    }
    return r;
  };
  for (const auto& c : f.constraints) {
    double flip = (c.sense == Sense::Ge) ? -1.0 : 1.0;
    out.rows.push_back(split(c, flip));
  }
  // finite variable bounds as explicit rows so their multipliers exist
  for (VarId v : f.follower_vars) {
    const auto& d = workspace.vars[static_cast<size_t>(v)];
    if (d.lb != -kInf) {
      DualizedRows::Row r;
      r.follower_part.add(v, -1.0);
      r.rhs_const = -d.lb;
      r.equality = false;
      r.tag = "bound_lo";
      out.rows.push_back(std::move(r));
    }
    if (d.ub != kInf) {
      DualizedRows::Row r;
      r.follower_part.add(v, 1.0);
      r.rhs_const = d.ub;
      r.equality = false;
      r.tag = "bound_hi";
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

// Objective in maximization form: (sign_flip * expr) is maximized.
struct MaxForm {
  LinExpr expr;      // maximized expression over follower vars
  double sign_flip;  // +1 if already max, -1 if the follower minimizes
};

inline MaxForm max_form(const FollowerSpec& f) {
  if (!f.objective) throw std::logic_error("follower has no objective");
  MaxForm mf;
  mf.sign_flip = f.objective->sense == ObjSense::Maximize ? 1.0 : -1.0;
  mf.expr = mf.sign_flip * f.objective->expr;
  return mf;
}

inline double derive_dual_bound(const MaxForm& mf, const RewriteOptions& opt) {
  if (opt.dual_bound > 0) return opt.dual_bound;
  double s = 0.0;
  for (const auto& t : mf.expr.terms) s += std::fabs(t.coeff);
  return std::max(16.0, 2.0 * s);
}

struct BilinearTerm {
  VarId leader;
  VarId dual;
  double coeff;
};

// Shared state for strong-duality assembly under quantization.
struct PendingDuality {
  LinExpr linear;  // c'f - (constant rhs terms applied to duals)
  std::vector<BilinearTerm> bilinear;
};

// Emit primal rows, dual variables and stationarity into `out`. Returns the
// dual variable per row plus the normalized rows.
struct DualSystem {
  DualizedRows rows;
  std::vector<VarId> dual_vars;
  double dual_bound;
};

inline DualSystem emit_primal_dual(Model& out, const Model& workspace, const FollowerSpec& f,
                                   const std::vector<DualizedRows::Row>& extra_rows,
                                   const RewriteOptions& opt, const std::string& stem) {
  if (!f.coefficient_position_leaders.empty())
    throw std::invalid_argument("follower '" + f.name +
                                "' has leader variables in coefficient positions");
  for (VarId v : f.follower_vars)
    if (workspace.vars[static_cast<size_t>(v)].kind != VarKind::Continuous)
      throw std::invalid_argument("follower '" + f.name + "' is not an LP");

  DualSystem sys;
  sys.rows = normalize_rows(workspace, f);
  for (const auto& r : extra_rows) sys.rows.rows.push_back(r);
  MaxForm mf = max_form(f);
  sys.dual_bound = derive_dual_bound(mf, opt);

  // primal feasibility (original rows as stated; bound rows are the var bounds)
  for (const auto& c : f.constraints) out.add_constraint(c.lhs, c.sense, c.rhs, stem + "_primal");
  for (const auto& r : extra_rows) {
    LinExpr lhs = r.follower_part;
    lhs.add(r.leader_part);
    out.add_constraint(lhs, r.equality ? Sense::Eq : Sense::Le, r.rhs_const, stem + "_primal");
  }

  // dual vars
  int idx = 0;
  for (const auto& r : sys.rows.rows) {
    VarId d = out.new_var(VarKind::Continuous, r.equality ? -sys.dual_bound : 0.0,
                          sys.dual_bound, stem + "_dual" + std::to_string(idx++));
    sys.dual_vars.push_back(d);
  }

  // stationarity: for each follower var j, sum_i dual_i * a_ij = c_j
  std::map<VarId, LinExpr> stat;
  for (VarId v : f.follower_vars) stat[v] = LinExpr();
  for (size_t i = 0; i < sys.rows.rows.size(); ++i)
    for (const auto& t : sys.rows.rows[i].follower_part.terms)
      stat[t.var].add(sys.dual_vars[i], t.coeff);
  std::map<VarId, double> cost;
  for (const auto& t : mf.expr.terms) cost[t.var] += t.coeff;
  for (auto& [v, expr] : stat)
    out.add_constraint(expr, Sense::Eq, cost.count(v) ? cost[v] : 0.0, stem + "_stationarity");
  return sys;
}

}  // namespace rewrite_detail

// First-order-conditions rewrite of a misaligned LP follower: primal
// feasibility, stationarity, and per-row complementary slackness linearized
// with an indicator binary. Any feasible completion attains the follower
// optimum for the pinned leader values.
inline LinExpr kkt_rewrite(Model& out, const Model& workspace, const FollowerSpec& f,
                           const RewriteOptions& opt = {}, const std::string& stem_in = {}) {
  using namespace rewrite_detail;
  std::string stem = stem_in.empty() ? f.name : stem_in;
  DualSystem sys = emit_primal_dual(out, workspace, f, {}, opt, stem);
  BigMContext ctx(out, opt.epsilon);

  for (size_t i = 0; i < sys.rows.rows.size(); ++i) {
    const auto& r = sys.rows.rows[i];
    if (r.equality) continue;  // equality rows need no slackness condition
    // slack_i = rhs_const - leader_part - follower_part >= 0
    LinExpr slack(r.rhs_const);
    slack.add(r.leader_part, -1.0);
    slack.add(r.follower_part, -1.0);
    auto [slo, shi] = ctx.expr_range(slack);
    VarId z = ctx.fresh_binary(stem + "_cs");
    // dual_i <= bound * z
    LinExpr d1(sys.dual_vars[i]);
    d1.add(z, -sys.dual_bound);
    out.add_constraint(d1, Sense::Le, 0, stem + "_cs");
    // slack_i <= max_slack * (1 - z)
    double span = std::max(shi, 0.0);
    LinExpr d2 = slack;
    d2.add(z, span);
    out.add_constraint(d2, Sense::Le, span, stem + "_cs");
  }
  return f.objective->expr;
}

// Primal + dual constraints plus the strong-duality equation; products of
// leader terms with duals come back unresolved for the quantized pass.
inline rewrite_detail::PendingDuality pd_rewrite(Model& out, const Model& workspace,
                                                 const FollowerSpec& f,
                                                 const std::vector<rewrite_detail::DualizedRows::Row>& extra_rows,
                                                 const RewriteOptions& opt = {},
                                                 const std::string& stem_in = {}) {
  using namespace rewrite_detail;
  std::string stem = stem_in.empty() ? f.name : stem_in;
  DualSystem sys = emit_primal_dual(out, workspace, f, extra_rows, opt, stem);
  MaxForm mf = max_form(f);

  // strong duality: c'f = sum_i b_i(L) * dual_i
  PendingDuality pending;
  pending.linear = mf.expr;  // lhs; rhs terms subtracted below
  for (size_t i = 0; i < sys.rows.rows.size(); ++i) {
    const auto& r = sys.rows.rows[i];
    pending.linear.add(sys.dual_vars[i], -r.rhs_const);
    for (const auto& t : r.leader_part.terms)
      pending.bilinear.push_back({t.var, sys.dual_vars[i], t.coeff});  // -(-t) on the rhs
    if (r.leader_part.constant != 0.0)
      pending.linear.add(sys.dual_vars[i], r.leader_part.constant);
  }
  return pending;
}

// Per-leader-var quantization state created during compose.
struct QuantizationContext {
  struct Entry {
    std::vector<double> levels;   // nonzero levels
    std::vector<VarId> binaries;  // aligned with levels
  };
  std::map<VarId, Entry> vars;

  const Entry& require(VarId v) const {
    auto it = vars.find(v);
    if (it == vars.end())
      throw std::invalid_argument("leader variable " + std::to_string(v) +
                                  " not covered by the quantization scheme");
    return it->second;
  }
};

// Restrict a leader variable to its level set: var = sum L_q x_q, sum x_q <= 1.
inline void apply_quantization(Model& out, QuantizationContext& qctx, VarId v,
                               const std::vector<double>& levels_with_zero) {
  if (qctx.vars.count(v)) return;
  QuantizationContext::Entry e;
  LinExpr assemble(v);
  LinExpr sum;
  int q = 0;
  for (double level : levels_with_zero) {
    if (level == 0.0) continue;  // zero is the all-binaries-off choice
    VarId x = out.new_var(VarKind::Binary, 0, 1,
                          "_q" + std::to_string(v) + "_" + std::to_string(q++));
    e.levels.push_back(level);
    e.binaries.push_back(x);
    assemble.add(x, -level);
    sum.add(x, 1.0);
  }
  out.add_constraint(assemble, Sense::Eq, 0, "quantize");
  if (!e.binaries.empty()) out.add_constraint(sum, Sense::Le, 1, "quantize");
  qctx.vars.emplace(v, std::move(e));
}

// Resolve a pending strong-duality equation by substituting quantized leader
// variables and linearizing each binary-dual product.
inline void qpd_finalize(Model& out, const QuantizationContext& qctx,
                         rewrite_detail::PendingDuality pending, const RewriteOptions& opt,
                         const std::string& stem) {
  BigMContext ctx(out, opt.epsilon);
  LinExpr equation = pending.linear;
  for (const auto& bt : pending.bilinear) {
    // A binary leader term (e.g., a quantization selector reused in a pinning
    // row) multiplies the dual directly; anything else goes through its level
    // set.
    if (out.vars[static_cast<size_t>(bt.leader)].kind == VarKind::Binary) {
      VarId prod = multiply(ctx, bt.leader, LinExpr(bt.dual), stem + "_qp");
      equation.add(prod, bt.coeff);
      continue;
    }
    const auto& entry = qctx.require(bt.leader);
    for (size_t q = 0; q < entry.levels.size(); ++q) {
      VarId prod = multiply(ctx, entry.binaries[q], LinExpr(bt.dual), stem + "_qp");
      // b_i = const - leader_part, so the leader portion enters with +coeff
      equation.add(prod, bt.coeff * entry.levels[q]);
    }
  }
  out.add_constraint(equation, Sense::Eq, 0, stem + "_strong_duality");
}

struct ComposeResult {
  Model model;
  std::vector<LinExpr> placeholders;  // follower objective value expressions
  QuantizationContext qctx;
};

// Assemble the single-level model per plan. The leader objective becomes the
// model objective with follower placeholders substituted.
inline ComposeResult compose(const BilevelSpec& spec, const RewritePlan& plan,
                             const RewriteOptions& opt = {}) {
  if (plan.per_follower.size() != spec.followers.size())
    throw std::invalid_argument("plan size does not match follower count");

  ComposeResult res;
  res.model = spec.workspace;  // leader vars, follower vars, input constraints
  Model& out = res.model;

  // Quantize every scheme-covered leader var up front so multiple followers
  // share the binaries.
  for (const auto& [v, levels] : plan.scheme.levels) apply_quantization(out, res.qctx, v, levels);

  for (size_t i = 0; i < spec.followers.size(); ++i) {
    const FollowerSpec& f = spec.followers[i];
    RewriteKind kind = plan.per_follower[i];
    Alignment a = classify_alignment(spec, static_cast<int>(i));
    std::string stem = f.name.empty() ? "f" + std::to_string(i) : f.name;

    switch (kind) {
      case RewriteKind::Inline: {
        if (a != Alignment::Aligned)
          throw std::invalid_argument("inline requires an aligned follower: " + f.name);
        for (const auto& c : f.constraints) out.add_constraint(c.lhs, c.sense, c.rhs, c.tag);
        res.placeholders.push_back(f.objective ? f.objective->expr : LinExpr(0.0));
        break;
      }
      case RewriteKind::Feasibility: {
        if (f.objective)
          throw std::invalid_argument("feasibility plan for follower with an objective: " + f.name);
        for (const auto& c : f.constraints) out.add_constraint(c.lhs, c.sense, c.rhs, c.tag);
        res.placeholders.push_back(f.output_expr ? *f.output_expr : LinExpr(0.0));
        break;
      }
      case RewriteKind::Kkt: {
        if (a != Alignment::Misaligned)
          throw std::invalid_argument("kkt rewrite is for misaligned followers: " + f.name);
        res.placeholders.push_back(kkt_rewrite(out, spec.workspace, f, opt, stem));
        break;
      }
      case RewriteKind::Pd:
      case RewriteKind::Qpd: {
        if (a != Alignment::Misaligned)
          throw std::invalid_argument("pd/qpd rewrite is for misaligned followers: " + f.name);
        // materialize quantized pinning rows as part of the dualized system
        std::vector<rewrite_detail::DualizedRows::Row> extra;
        for (const auto& pin : f.quantized_pins) {
          const auto& entry = res.qctx.require(pin.leader_var);
          rewrite_detail::DualizedRows::Row r;
          r.follower_part.add(pin.flow_var, -1.0);  // -flow <= -sum(levels<=T) L x
          for (size_t q = 0; q < entry.levels.size(); ++q)
            if (entry.levels[q] <= pin.threshold + 1e-12)
              r.leader_part.add(entry.binaries[q], entry.levels[q]);
          r.rhs_const = 0.0;
          r.equality = false;
          r.tag = stem + "_pin";
          extra.push_back(std::move(r));
        }
        auto pending = pd_rewrite(out, spec.workspace, f, extra, opt, stem);
        if (kind == RewriteKind::Qpd) {
          qpd_finalize(out, res.qctx, std::move(pending), opt, stem);
        } else {
          if (!pending.bilinear.empty())
            throw std::invalid_argument(
                "pd rewrite left unresolved leader-dual products; use qpd: " + f.name);
          out.add_constraint(pending.linear, Sense::Eq, 0, stem + "_strong_duality");
        }
        res.placeholders.push_back(f.objective->expr);
        break;
      }
    }
  }

  // Leader objective over placeholders; optionally combine the negative side
  // as max_h(H_h).
  LinExpr leader_obj;
  if (spec.combine_negative) {
    std::vector<LinExpr> combined;
    for (const auto& t : spec.leader_objective) {
      if (t.sign < 0) combined.push_back(res.placeholders[t.follower]);
      else leader_obj.add(res.placeholders[t.follower], t.sign);
    }
    if (!combined.empty()) {
      BigMContext ctx(out, opt.epsilon);
      double floor_const = -ctx.expr_abs_bound(combined.front());
      for (const auto& c : combined) floor_const = std::min(floor_const, -ctx.expr_abs_bound(c));
      std::vector<LinExpr> exprs = combined;
      VarId y = max_of(ctx, exprs, floor_const, "best_heuristic");
      leader_obj.add(y, -1.0);
    }
  } else {
    for (const auto& t : spec.leader_objective) leader_obj.add(res.placeholders[t.follower], t.sign);
  }
  out.set_objective(spec.leader_sense, leader_obj);
  return res;
}

// Convenience wrapper matching the combination-of-heuristics extension.
inline ComposeResult compose_combination(BilevelSpec spec, const RewritePlan& plan,
                                         const RewriteOptions& opt = {}) {
  spec.combine_negative = true;
  return compose(spec, plan, opt);
}

// Frequent leader values across reference solutions: the k most frequent
// distinct values, always including 0 and the upper bound.
inline std::vector<double> suggest_quantiles(const std::vector<std::vector<double>>& leader_values,
                                             int k, double upper_bound) {
  std::map<double, int> freq;
  for (const auto& sol : leader_values)
    for (double v : sol) freq[std::round(v * 1e9) / 1e9] += 1;
  freq.erase(0.0);
  std::vector<std::pair<double, int>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<double> levels{0.0, upper_bound};
  int taken = 0;
  for (const auto& [v, n] : items) {
    if (taken >= k) break;
    if (v > 0 && v <= upper_bound) levels.insert(v);
    ++taken;
  }
  return std::vector<double>(levels.begin(), levels.end());
}

// Build a probe model for fidelity checks: pin the leader assignment, apply
// the given rewrite for one follower, return the model plus the follower value
// expression. Solving it as a feasibility problem must reproduce the
// follower's true optimum.
inline std::pair<Model, LinExpr> build_follower_probe(
    const BilevelSpec& spec, int follower_idx, RewriteKind kind, const RewritePlan& plan,
    const std::vector<std::pair<VarId, double>>& leader_pins, const RewriteOptions& opt = {}) {
  BilevelSpec probe_spec = spec;
  for (const auto& [v, val] : leader_pins) probe_spec.workspace.pin(v, val);
  RewritePlan probe_plan = plan;
  probe_plan.per_follower.assign(spec.followers.size(), RewriteKind::Feasibility);
  // keep only the follower under test: others become empty feasibility shells
  for (size_t i = 0; i < probe_spec.followers.size(); ++i) {
    if (static_cast<int>(i) == follower_idx) continue;
    probe_spec.followers[i].constraints.clear();
    probe_spec.followers[i].objective.reset();
    probe_spec.followers[i].output_expr = LinExpr(0.0);
    probe_spec.followers[i].quantized_pins.clear();
  }
  probe_plan.per_follower[follower_idx] = kind;
  if (kind == RewriteKind::Inline) {
    // alignment for a lone follower: force a consistent sign
    probe_spec.leader_objective = {{follower_idx, 1.0}};
    probe_spec.leader_sense = probe_spec.followers[follower_idx].objective &&
                                      probe_spec.followers[follower_idx].objective->sense ==
                                          ObjSense::Minimize
                                  ? ObjSense::Minimize
                                  : ObjSense::Maximize;
  }
  ComposeResult res = compose(probe_spec, probe_plan, opt);
  LinExpr placeholder = res.placeholders[follower_idx];
  if (kind != RewriteKind::Inline) {
    // feasibility probe: neutral objective, any completion certifies the value
    res.model.objective.reset();
    res.model.set_objective(ObjSense::Maximize, LinExpr(0.0));
  }
  return {std::move(res.model), std::move(placeholder)};
}

}  // namespace gapfinder
