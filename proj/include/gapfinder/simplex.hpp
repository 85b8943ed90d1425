// Bounded-variable primal simplex with a dense tableau.
//
// Two phases: phase 1 drives artificial variables to zero, phase 2 optimizes
// the real objective. Dantzig pricing with a Bland's-rule fallback once the
// iteration count suggests cycling. Deterministic: ties break on the lowest
// variable index.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gapfinder/model.hpp"

namespace gapfinder {

struct LpResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x;   // structural variable values
  double objective = 0.0;  // in the model's original sense
  int iterations = 0;
};

namespace simplex_detail {

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPrimalTol = 1e-8;

enum class VarState : uint8_t { Basic, AtLower, AtUpper, FreeZero };

class Tableau {
 public:
  // Rows: a'x + slack = rhs. Column layout: [structural | slack | artificial].
  int m = 0;                    // rows
  int n_struct = 0;             // structural vars
  int n_total = 0;              // columns
  std::vector<std::vector<double>> tab;  // m x n_total, current B^-1 A
  std::vector<double> beta;     // basic variable values per row
  std::vector<int> basis;       // column basic in each row
  std::vector<VarState> state;  // per column
  std::vector<double> lo, up;   // per-column bounds
  std::vector<double> cost;     // phase-2 costs (minimization)
  std::vector<double> dual;     // reduced costs (row 0), maintained incrementally
  std::vector<double> xval;     // current value of each nonbasic column
  int iterations = 0;

  double col_value(int j) const {
    switch (state[j]) {
      case VarState::AtLower: return lo[j];
      case VarState::AtUpper: return up[j];
      case VarState::FreeZero: return 0.0;
      case VarState::Basic:
        for (int i = 0; i < m; ++i)
          if (basis[i] == j) return beta[i];
        return 0.0;
    }
    return 0.0;
  }

  void recompute_duals(const std::vector<double>& c) {
    // d_j = c_j - c_B' (B^-1 A_j); with the dense tableau this is a direct sum.
    dual.assign(n_total, 0.0);
    std::vector<double> cb(m);
    for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
    for (int j = 0; j < n_total; ++j) {
      double d = c[j];
      for (int i = 0; i < m; ++i) {
        double a = tab[i][j];
        if (a != 0.0) d -= cb[i] * a;
      }
      dual[j] = d;
    }
    for (int i = 0; i < m; ++i) dual[basis[i]] = 0.0;
  }

  void pivot(int row, int col) {
    std::vector<double>& pr = tab[row];
    double piv = pr[col];
    double inv = 1.0 / piv;
    for (int j = 0; j < n_total; ++j) pr[j] *= inv;
    pr[col] = 1.0;  // clean up round-off on the pivot column
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = tab[i][col];
      if (f == 0.0) continue;
      std::vector<double>& ri = tab[i];
      for (int j = 0; j < n_total; ++j) ri[j] -= f * pr[j];
      ri[col] = 0.0;
    }
    double fd = dual[col];
    if (fd != 0.0) {
      for (int j = 0; j < n_total; ++j) dual[j] -= fd * pr[j];
      dual[col] = 0.0;
    }
  }
};

// One priced-out simplex phase over the given costs. Returns:
//   0 optimal, 1 unbounded.
inline int run_phase(Tableau& t, const std::vector<double>& costs, int max_iters,
                     double* objective_out) {
  t.recompute_duals(costs);
  int stall = 0;
  bool bland = false;
  int since_refresh = 0;

  for (;;) {
    if (t.iterations >= max_iters) break;

    // Entering variable. Dantzig: most attractive reduced cost; Bland: lowest
    // index once we appear to be cycling.
    int enter = -1;
    double best = kDualTol;
    int dir = 0;
    for (int j = 0; j < t.n_total; ++j) {
      if (t.state[j] == VarState::Basic) continue;
      if (t.up[j] - t.lo[j] < kPivotTol &&
          (t.state[j] == VarState::AtLower || t.state[j] == VarState::AtUpper))
        continue;  // fixed column, cannot move
      double d = t.dual[j];
      int cand_dir = 0;
      if (t.state[j] == VarState::AtLower || t.state[j] == VarState::FreeZero) {
        if (d < -kDualTol) cand_dir = +1;
        if (t.state[j] == VarState::FreeZero && d > kDualTol) cand_dir = -1;
      } else if (t.state[j] == VarState::AtUpper) {
        if (d > kDualTol) cand_dir = -1;
      }
      if (cand_dir == 0) continue;
      if (bland) { enter = j; dir = cand_dir; break; }
      if (std::fabs(d) > best) { best = std::fabs(d); enter = j; dir = cand_dir; }
    }
    if (enter < 0) {
      if (objective_out) {
        double obj = 0.0;
        for (int j = 0; j < t.n_total; ++j)
          if (t.state[j] != VarState::Basic) obj += costs[j] * (t.state[j] == VarState::AtUpper ? t.up[j] : (t.state[j] == VarState::AtLower ? t.lo[j] : 0.0));
        for (int i = 0; i < t.m; ++i) obj += costs[t.basis[i]] * t.beta[i];
        *objective_out = obj;
      }
      return 0;
    }

    // Ratio test. The entering column moves by step >= 0 in direction dir;
    // basic variable i changes by -step * dir * tab[i][enter].
    double enter_range = t.up[enter] - t.lo[enter];  // may be inf
    double step = enter_range;
    int leave_row = -1;
    int leave_to_upper = 0;
    for (int i = 0; i < t.m; ++i) {
      double g = dir * t.tab[i][enter];
      if (std::fabs(g) < kPivotTol) continue;
      int b = t.basis[i];
      double ratio;
      int to_upper;
      if (g > 0.0) {  // basic value decreases toward its lower bound
        if (t.lo[b] == -kInf) continue;
        ratio = (t.beta[i] - t.lo[b]) / g;
        to_upper = 0;
      } else {        // basic value increases toward its upper bound
        if (t.up[b] == kInf) continue;
        ratio = (t.beta[i] - t.up[b]) / g;
        to_upper = 1;
      }
      if (ratio < -kPrimalTol) ratio = 0.0;  // tolerate slight infeasibility
      if (ratio < step - kPivotTol ||
          (leave_row >= 0 && ratio < step + kPivotTol && t.basis[i] < t.basis[leave_row])) {
        step = ratio;
        leave_row = i;
        leave_to_upper = to_upper;
      }
    }

    if (step == kInf || (leave_row < 0 && enter_range == kInf)) return 1;  // unbounded ray

    ++t.iterations;
    ++since_refresh;
    if (step < kPivotTol) {
      if (++stall > 50) bland = true;  // anti-cycling
    } else {
      stall = 0;
      bland = false;
    }

    if (leave_row < 0) {
      // Bound flip: entering travels its full range, basis unchanged.
      for (int i = 0; i < t.m; ++i) {
        double g = dir * t.tab[i][enter];
        if (g != 0.0) t.beta[i] -= step * g;
      }
      t.state[enter] = (dir > 0) ? VarState::AtUpper : VarState::AtLower;
      continue;
    }

    // Regular pivot: entering becomes basic at its new value.
    double enter_start =
        (t.state[enter] == VarState::AtUpper) ? t.up[enter]
        : (t.state[enter] == VarState::AtLower) ? t.lo[enter] : 0.0;
    double enter_val = enter_start + dir * step;
    for (int i = 0; i < t.m; ++i) {
      double g = dir * t.tab[i][enter];
      if (g != 0.0) t.beta[i] -= step * g;
    }
    int leave_col = t.basis[leave_row];
    t.state[leave_col] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
    t.basis[leave_row] = enter;
    t.state[enter] = VarState::Basic;
    t.pivot(leave_row, enter);
    t.beta[leave_row] = enter_val;

    if (since_refresh >= 200) {
      // periodic refresh of reduced costs to shed accumulated round-off
      t.recompute_duals(costs);
      since_refresh = 0;
    }
  }
  return 0;  // iteration cap; caller treats current point as good enough
}

}  // namespace simplex_detail

// Solve min/max c'x subject to the model's linear constraints and bounds.
// `lb_override`/`ub_override`, when nonempty, replace the declared bounds
// (used by branch & bound). Integrality is ignored here.
inline LpResult solve_lp_relaxation(const Model& model,
                                    const std::vector<double>& lb_override = {},
                                    const std::vector<double>& ub_override = {}) {
  using namespace simplex_detail;
  const int n = static_cast<int>(model.num_vars());
  const int m = static_cast<int>(model.constraints.size());

  auto lb_of = [&](int j) { return lb_override.empty() ? model.vars[j].lb : lb_override[j]; };
  auto ub_of = [&](int j) { return ub_override.empty() ? model.vars[j].ub : ub_override[j]; };

  LpResult res;
  for (int j = 0; j < n; ++j)
    if (lb_of(j) > ub_of(j) + kPrimalTol) {  // empty box
      res.status = SolveStatus::Infeasible;
      return res;
    }

  Tableau t;
  t.m = m;
  t.n_struct = n;
  t.n_total = n + m;  // artificials appended below as needed
  t.tab.assign(m, std::vector<double>(n + m, 0.0));
  t.lo.resize(n + m);
  t.up.resize(n + m);
  t.state.resize(n + m);
  t.basis.resize(m);
  t.beta.assign(m, 0.0);

  for (int j = 0; j < n; ++j) {
    t.lo[j] = lb_of(j);
    t.up[j] = ub_of(j);
    if (t.lo[j] == -kInf && t.up[j] == kInf) t.state[j] = VarState::FreeZero;
    else if (t.lo[j] != -kInf &&
             (t.up[j] == kInf || std::fabs(t.lo[j]) <= std::fabs(t.up[j])))
      t.state[j] = VarState::AtLower;
    else
      t.state[j] = VarState::AtUpper;
  }
  for (int i = 0; i < m; ++i) {
    const Constraint& c = model.constraints[i];
    for (const auto& term : c.lhs.terms) t.tab[i][term.var] += term.coeff;
    int s = n + i;
    t.tab[i][s] = 1.0;
    switch (c.sense) {
      case Sense::Le: t.lo[s] = 0.0; t.up[s] = kInf; break;
      case Sense::Ge: t.lo[s] = -kInf; t.up[s] = 0.0; break;
      case Sense::Eq: t.lo[s] = 0.0; t.up[s] = 0.0; break;
    }
    t.basis[i] = s;
    t.state[s] = VarState::Basic;
  }

  // Initial basic (slack) values from the nonbasic point.
  std::vector<double> nb_val(n, 0.0);
  for (int j = 0; j < n; ++j) {
    nb_val[j] = (t.state[j] == VarState::AtLower) ? t.lo[j]
                : (t.state[j] == VarState::AtUpper) ? t.up[j] : 0.0;
  }
  for (int i = 0; i < m; ++i) {
    double dot = 0.0;
    const Constraint& c = model.constraints[i];
    for (const auto& term : c.lhs.terms) dot += term.coeff * nb_val[term.var];
    t.beta[i] = model.constraints[i].rhs - dot;
  }

  // Slack out of range -> clamp it nonbasic at the nearest bound and cover the
  // residual with an artificial variable.
  std::vector<int> artificial_rows;
  for (int i = 0; i < m; ++i) {
    int s = n + i;
    double v = t.beta[i];
    if (v >= t.lo[s] - kPrimalTol && v <= t.up[s] + kPrimalTol) continue;
    double clamp = (v < t.lo[s]) ? t.lo[s] : t.up[s];
    double resid = v - clamp;  // what the artificial must absorb
    t.state[s] = (clamp == t.lo[s] && t.lo[s] != -kInf) ? VarState::AtLower : VarState::AtUpper;
    if (t.lo[s] == -kInf) t.state[s] = VarState::AtUpper;
    artificial_rows.push_back(i);
    // Artificial column must be +1 so the row stays canonical for its basis;
    // negate the row when the residual is negative.
    if (resid < 0.0) {
      for (double& a : t.tab[i]) a = -a;
    }
    for (auto& row : t.tab) row.push_back(0.0);
    int a = t.n_total++;
    t.tab[i][a] = 1.0;
    t.lo.push_back(0.0);
    t.up.push_back(kInf);
    t.state.push_back(VarState::Basic);
    t.basis[i] = a;
    t.beta[i] = std::fabs(resid);
  }

  const int max_iters = 20000 + 200 * (m + n);

  if (!artificial_rows.empty()) {
    std::vector<double> phase1_cost(t.n_total, 0.0);
    for (int j = n + m; j < t.n_total; ++j) phase1_cost[j] = 1.0;
    double p1_obj = 0.0;
    run_phase(t, phase1_cost, max_iters, &p1_obj);
    if (p1_obj > 1e-6) {
      res.status = SolveStatus::Infeasible;
      res.iterations = t.iterations;
      return res;
    }
    // Lock artificials at zero for phase 2.
    for (int j = n + m; j < t.n_total; ++j) { t.lo[j] = 0.0; t.up[j] = 0.0; }
  }

  std::vector<double> cost(t.n_total, 0.0);
  double sign = 1.0;
  if (model.objective) {
    sign = (model.objective->sense == ObjSense::Maximize) ? -1.0 : 1.0;
    for (const auto& term : model.objective->expr.terms) cost[term.var] += sign * term.coeff;
  }
  double obj = 0.0;
  int rc = run_phase(t, cost, max_iters, &obj);
  res.iterations = t.iterations;
  if (rc == 1) {
    res.status = SolveStatus::Unbounded;
    return res;
  }

  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.x[j] = t.col_value(j);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) res.x[t.basis[i]] = t.beta[i];
  double base = model.objective ? model.objective->expr.constant : 0.0;
  res.objective = base + (model.objective ? obj / sign : 0.0);
  res.status = SolveStatus::Optimal;
  return res;
}

// Public LP entry point per the solver contract: continuous models only.
inline Solution solve_lp(const Model& model) {
  for (const auto& v : model.vars)
    if (v.kind != VarKind::Continuous)
      throw std::invalid_argument("solve_lp: integer variable '" + v.name + "' present");
  LpResult r = solve_lp_relaxation(model);
  Solution s;
  s.status = r.status;
  if (r.status == SolveStatus::Optimal) {
    s.assignment = std::move(r.x);
    s.objective = r.objective;
    s.bound = r.objective;
    s.mip_gap = 0.0;
  }
  return s;
}

}  // namespace gapfinder
