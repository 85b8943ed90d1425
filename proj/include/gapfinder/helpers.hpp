// Encoding helpers: each emits big-M MILP constraints whose feasible
// completions realize the advertised semantics (indicator comparisons,
// boolean combinators, conditional pins, products, group max/min, rank).
//
// Strict inequalities are realized as "<= -epsilon". Big-M values are derived
// per expression from variable bounds, never one global constant.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gapfinder/model.hpp"

namespace gapfinder {

// Carries per-variable magnitude overrides and the strict-inequality slack.
// Magnitudes default to the declared bounds; variables with unbounded ranges
// must be given one explicitly.
struct BigMContext {
  Model* model = nullptr;
  double epsilon = 1e-4;
  std::unordered_map<VarId, double> magnitude;  // |var| <= this, when set
  int fresh_counter = 0;

  explicit BigMContext(Model& m, double eps = 1e-4) : model(&m), epsilon(eps) {}

  std::string fresh(const std::string& stem) {
    for (;;) {
      std::string name = "_" + stem + std::to_string(fresh_counter++);
      if (!model->find_var(name)) return name;
    }
  }

  double var_abs_bound(VarId v) const {
    auto it = magnitude.find(v);
    if (it != magnitude.end()) return it->second;
    const auto& d = model->vars[static_cast<size_t>(v)];
    if (d.lb == -kInf || d.ub == kInf)
      throw std::invalid_argument("missing magnitude bound for variable " + d.name);
    return std::max(std::fabs(d.lb), std::fabs(d.ub));
  }

  // Upper bound on |expr| over the variable box.
  double expr_abs_bound(const LinExpr& e) const {
    double m = std::fabs(e.constant);
    for (const auto& t : e.terms) m += std::fabs(t.coeff) * var_abs_bound(t.var);
    return m;
  }

  // Interval of expr over the variable box.
  std::pair<double, double> expr_range(const LinExpr& e) const {
    double lo = e.constant, hi = e.constant;
    for (const auto& t : e.terms) {
      const auto& d = model->vars[static_cast<size_t>(t.var)];
      double vl = d.lb, vh = d.ub;
      auto it = magnitude.find(t.var);
      if (it != magnitude.end()) {
        vl = std::max(vl, -it->second);
        vh = std::min(vh, it->second);
      }
      if (vl == -kInf || vh == kInf)
        throw std::invalid_argument("missing magnitude bound for variable " +
                                    d.name);
      double a = t.coeff * vl, b = t.coeff * vh;
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    return {lo, hi};
  }

  VarId fresh_binary(const std::string& stem) {
    return model->new_var(VarKind::Binary, 0, 1, fresh(stem));
  }
};

// b = 1 iff x <= y. On the strict side the encoding needs x >= y + epsilon,
// so inputs that land inside (y, y + epsilon) are infeasible by construction;
// callers keep epsilon below the input quantum.
inline VarId is_leq(BigMContext& ctx, const LinExpr& x, const LinExpr& y) {
  Model& m = *ctx.model;
  VarId b = ctx.fresh_binary("leq");
  LinExpr diff = x;
  diff.add(y, -1.0);  // x - y
  auto [lo, hi] = ctx.expr_range(diff);
  // b=1 -> x - y <= 0
  LinExpr c1 = diff;
  c1.add(b, std::max(hi, 0.0));
  m.add_constraint(c1, Sense::Le, std::max(hi, 0.0), "is_leq");
  // b=0 -> y - x <= -eps
  LinExpr c2 = -1.0 * diff;
  c2.add(b, -(std::max(-lo, 0.0) + ctx.epsilon));
  m.add_constraint(c2, Sense::Le, -ctx.epsilon, "is_leq");
  return b;
}

// b = AND(us): empty list gives b fixed to 1.
inline VarId logic_and(BigMContext& ctx, const std::vector<VarId>& us) {
  Model& m = *ctx.model;
  VarId b = ctx.fresh_binary("and");
  if (us.empty()) {
    m.add_constraint(LinExpr(b), Sense::Eq, 1, "and");
    return b;
  }
  LinExpr sum;
  for (VarId u : us) {
    LinExpr le(b);
    le.add(u, -1.0);
    m.add_constraint(le, Sense::Le, 0, "and");  // b <= u_i
    sum.add(u, 1.0);
  }
  sum.add(b, -1.0);
  m.add_constraint(sum, Sense::Le, static_cast<double>(us.size()) - 1.0, "and");
  return b;
}

// b = OR(us): empty list gives b fixed to 0.
inline VarId logic_or(BigMContext& ctx, const std::vector<VarId>& us) {
  Model& m = *ctx.model;
  VarId b = ctx.fresh_binary("or");
  if (us.empty()) {
    m.add_constraint(LinExpr(b), Sense::Eq, 0, "or");
    return b;
  }
  LinExpr sum;
  for (VarId u : us) {
    LinExpr ge(b);
    ge.add(u, -1.0);
    m.add_constraint(ge, Sense::Ge, 0, "or");  // b >= u_i
    sum.add(u, 1.0);
  }
  sum.add(b, -1.0);
  m.add_constraint(sum, Sense::Ge, 0, "or");  // b <= sum u_i
  return b;
}

inline VarId all_leq(BigMContext& ctx, const std::vector<LinExpr>& xs, double bound) {
  std::vector<VarId> bs;
  bs.reserve(xs.size());
  for (const auto& x : xs) bs.push_back(is_leq(ctx, x, LinExpr(bound)));
  return logic_and(ctx, bs);
}

inline VarId all_eq(BigMContext& ctx, const std::vector<LinExpr>& xs, double bound) {
  std::vector<VarId> bs;
  bs.reserve(xs.size() * 2);
  for (const auto& x : xs) {
    bs.push_back(is_leq(ctx, x, LinExpr(bound)));
    bs.push_back(is_leq(ctx, LinExpr(bound), x));
  }
  return logic_and(ctx, bs);
}

// b=1 forces x = F for every (x, F) pair; b=0 leaves them unconstrained.
inline void if_then(BigMContext& ctx, VarId b,
                    const std::vector<std::pair<LinExpr, LinExpr>>& pairs) {
  Model& m = *ctx.model;
  for (const auto& [x, f] : pairs) {
    LinExpr diff = x;
    diff.add(f, -1.0);
    auto [lo, hi] = ctx.expr_range(diff);
    LinExpr up = diff;
    up.add(b, std::max(hi, 0.0));
    m.add_constraint(up, Sense::Le, std::max(hi, 0.0), "if_then");
    LinExpr dn = -1.0 * diff;
    dn.add(b, std::max(-lo, 0.0));
    m.add_constraint(dn, Sense::Le, std::max(-lo, 0.0), "if_then");
  }
}

inline void if_then_else(BigMContext& ctx, VarId b,
                         const std::vector<std::pair<LinExpr, LinExpr>>& then_pairs,
                         const std::vector<std::pair<LinExpr, LinExpr>>& else_pairs) {
  Model& m = *ctx.model;
  if_then(ctx, b, then_pairs);
  for (const auto& [y, g] : else_pairs) {
    LinExpr diff = y;
    diff.add(g, -1.0);
    auto [lo, hi] = ctx.expr_range(diff);
    LinExpr up = diff;
    up.add(b, -std::max(hi, 0.0));
    m.add_constraint(up, Sense::Le, 0, "if_else");
    LinExpr dn = -1.0 * diff;
    dn.add(b, -std::max(-lo, 0.0));
    m.add_constraint(dn, Sense::Le, 0, "if_else");
  }
}

// y = b * x for binary b. Two big-M rows when x is nonnegative, four
// otherwise.
inline VarId multiply(BigMContext& ctx, VarId b, const LinExpr& x,
                      const std::string& name_stem = "mul") {
  Model& m = *ctx.model;
  auto [lo, hi] = ctx.expr_range(x);
  VarId y = m.new_var(VarKind::Continuous, std::min(lo, 0.0), std::max(hi, 0.0),
                      ctx.fresh(name_stem));
  if (lo >= 0.0) {
    // y <= x; y <= hi*b; y >= x - hi*(1-b); y >= 0 (bound)
    LinExpr c1(y);
    c1.add(x, -1.0);
    m.add_constraint(c1, Sense::Le, 0, "multiply");
    LinExpr c2(y);
    c2.add(b, -hi);
    m.add_constraint(c2, Sense::Le, 0, "multiply");
    LinExpr c3(y);
    c3.add(x, -1.0);
    c3.add(b, -hi);
    m.add_constraint(c3, Sense::Ge, -hi, "multiply");
  } else {
    // four-row general form: b=1 pins y to x, b=0 pins y to 0
    LinExpr c1(y);
    c1.add(b, -hi);
    m.add_constraint(c1, Sense::Le, 0, "multiply");  // y <= hi b
    LinExpr c2(y);
    c2.add(b, -lo);
    m.add_constraint(c2, Sense::Ge, 0, "multiply");  // y >= lo b
    LinExpr up(y);
    up.add(x, -1.0);
    up.add(b, -lo);
    m.add_constraint(up, Sense::Le, -lo, "multiply");  // y - x <= -lo (1-b)
    LinExpr dn(y);
    dn.add(x, -1.0);
    dn.add(b, -hi);
    m.add_constraint(dn, Sense::Ge, -hi, "multiply");  // y - x >= -hi (1-b)
  }
  return y;
}

// y = max(xs..., floor_const), with selector binaries marking an attainer.
inline VarId max_of(BigMContext& ctx, const std::vector<LinExpr>& xs, double floor_const,
                    const std::string& name_stem = "max") {
  Model& m = *ctx.model;
  double lo = floor_const, hi = floor_const;
  for (const auto& x : xs) {
    auto [l, h] = ctx.expr_range(x);
    lo = std::max(lo, l);  // max is at least each term's low... careful below
    hi = std::max(hi, h);
  }
  // lower bound of the max is at least floor_const and at least min over each
  // term's own lower bound; floor_const alone is always safe.
  lo = floor_const;
  VarId y = m.new_var(VarKind::Continuous, lo, hi, ctx.fresh(name_stem));
  std::vector<VarId> sel;
  LinExpr sum;
  for (const auto& x : xs) {
    LinExpr ge(y);
    ge.add(x, -1.0);
    m.add_constraint(ge, Sense::Ge, 0, "max_of");  // y >= x_i
    VarId s = ctx.fresh_binary("maxsel");
    sel.push_back(s);
    sum.add(s, 1.0);
    // y <= x_i + M(1-s)
    auto [xl, xh] = ctx.expr_range(x);
    double span = hi - xl;
    LinExpr le(y);
    le.add(x, -1.0);
    le.add(s, span);
    m.add_constraint(le, Sense::Le, span, "max_of");
  }
  m.add_constraint(LinExpr(y), Sense::Ge, floor_const, "max_of");
  VarId s0 = ctx.fresh_binary("maxsel");
  sum.add(s0, 1.0);
  double span0 = hi - floor_const;
  LinExpr le0(y);
  le0.add(s0, span0);
  m.add_constraint(le0, Sense::Le, floor_const + span0, "max_of");
  m.add_constraint(sum, Sense::Eq, 1, "max_of");
  return y;
}

inline VarId min_of(BigMContext& ctx, const std::vector<LinExpr>& xs, double ceil_const,
                    const std::string& name_stem = "min") {
  std::vector<LinExpr> negs;
  negs.reserve(xs.size());
  for (const auto& x : xs) negs.push_back(-1.0 * x);
  BigMContext& c = ctx;
  VarId neg_y = max_of(c, negs, -ceil_const, name_stem + "_neg");
  Model& m = *ctx.model;
  auto [lo, hi] = std::pair<double, double>{-m.vars[neg_y].ub, -m.vars[neg_y].lb};
  VarId y = m.new_var(VarKind::Continuous, lo, hi, ctx.fresh(name_stem));
  LinExpr eq(y);
  eq.add(neg_y, 1.0);
  m.add_constraint(eq, Sense::Eq, 0, "min_of");
  return y;
}

// bs[i] = 1 only for active items (us[i] = 1) attaining the group maximum;
// at least one bs[i] = 1 whenever any us[i] = 1.
inline std::vector<VarId> find_largest_value(BigMContext& ctx, const std::vector<LinExpr>& xs,
                                             const std::vector<VarId>& us) {
  Model& m = *ctx.model;
  size_t n = xs.size();
  std::vector<VarId> bs;
  bs.reserve(n);
  for (size_t i = 0; i < n; ++i) bs.push_back(ctx.fresh_binary("largest"));
  LinExpr bsum;
  for (size_t i = 0; i < n; ++i) {
    LinExpr dom(bs[i]);
    dom.add(us[i], -1.0);
    m.add_constraint(dom, Sense::Le, 0, "find_largest");  // b_i <= u_i
    bsum.add(bs[i], 1.0);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      // b_i=1 and u_j=1 -> x_i >= x_j
      LinExpr diff = xs[j];
      diff.add(xs[i], -1.0);  // x_j - x_i <= M(1-b_i) + M(1-u_j)
      auto [lo, hi] = ctx.expr_range(diff);
      double span = std::max(hi, 0.0);
      LinExpr row = diff;
      row.add(bs[i], span);
      row.add(us[j], span);
      m.add_constraint(row, Sense::Le, 2 * span, "find_largest");
    }
  }
  // sum b_i >= u_j for every j: some attainer is flagged when anything is active
  for (size_t j = 0; j < n; ++j) {
    LinExpr row = bsum;
    row.add(us[j], -1.0);
    m.add_constraint(row, Sense::Ge, 0, "find_largest");
  }
  return bs;
}

inline std::vector<VarId> find_smallest_value(BigMContext& ctx, const std::vector<LinExpr>& xs,
                                              const std::vector<VarId>& us) {
  std::vector<LinExpr> negs;
  negs.reserve(xs.size());
  for (const auto& x : xs) negs.push_back(-1.0 * x);
  return find_largest_value(ctx, negs, us);
}

// r = |{ i : x_i <= y }| (weak inequality, quantile convention).
inline VarId rank_of(BigMContext& ctx, const LinExpr& y, const std::vector<LinExpr>& xs) {
  Model& m = *ctx.model;
  VarId r = m.new_var(VarKind::Integer, 0, static_cast<double>(xs.size()), ctx.fresh("rank"));
  LinExpr sum;
  for (const auto& x : xs) sum.add(is_leq(ctx, x, y), 1.0);
  sum.add(r, -1.0);
  m.add_constraint(sum, Sense::Eq, 0, "rank");
  return r;
}

// x <= y forces v = 0; otherwise v keeps its declared range. The binary is
// shared with is_leq; when v itself is binary a single row suffices.
inline VarId force_to_zero_if_leq(BigMContext& ctx, const LinExpr& v, const LinExpr& x,
                                  const LinExpr& y) {
  Model& m = *ctx.model;
  VarId b = is_leq(ctx, x, y);
  if (v.terms.size() == 1 && v.constant == 0.0 && v.terms[0].coeff == 1.0 &&
      m.vars[static_cast<size_t>(v.terms[0].var)].kind == VarKind::Binary) {
    LinExpr row(v.terms[0].var);
    row.add(b, 1.0);
    m.add_constraint(row, Sense::Le, 1, "force_zero");  // v <= 1 - b
    return b;
  }
  auto [lo, hi] = ctx.expr_range(v);
  LinExpr up = v;
  up.add(b, std::max(hi, 0.0));
  m.add_constraint(up, Sense::Le, std::max(hi, 0.0), "force_zero");
  LinExpr dn = -1.0 * v;
  dn.add(b, std::max(-lo, 0.0));
  m.add_constraint(dn, Sense::Le, std::max(-lo, 0.0), "force_zero");
  return b;
}

}  // namespace gapfinder
