// Branch & bound over the bounded-variable simplex.
//
// Best-bound node selection, branching on the most fractional integer
// variable (ties to the lowest id). An incremental-progress rule can stop
// the search early and keep the incumbent: if the incumbent improves by
// less than `early_stop_progress` of its magnitude over a window of
// `early_stop_window` seconds, the solver reports BudgetExhausted.
#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "gapfinder/simplex.hpp"

namespace gapfinder {

struct SolveParams {
  double time_limit = 3600.0;          // seconds
  double target_mip_gap = 1e-4;        // relative; proof gap, not solution quality
  double early_stop_window = 0.0;      // seconds; 0 disables the progress rule
  double early_stop_progress = 0.005;  // fraction of |incumbent|
  uint64_t seed = 0;
  int64_t node_limit = -1;             // < 0 means unlimited
  // Optional warm start: values for a subset of variables (typically the
  // leader's). The solver completes it into a full incumbent if it can.
  std::vector<std::pair<VarId, double>> warm_start;
};

struct SolverReport {
  int64_t nodes_explored = 0;
  int64_t lp_iterations = 0;
  double wall_time = 0.0;
  std::vector<std::pair<double, double>> incumbent_history;  // (seconds, objective)
};

namespace milp_detail {

struct Node {
  double lp_bound;  // objective bound in minimization space
  int64_t id;
  std::vector<double> lb, ub;
};

struct NodeOrder {
  bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
    if (a->lp_bound != b->lp_bound) return a->lp_bound > b->lp_bound;  // smaller bound first
    return a->id > b->id;
  }
};

inline bool is_int_var(const VarDecl& v) { return v.kind != VarKind::Continuous; }

// Round integer variables of a candidate point and re-solve the LP with them
// fixed; returns true (and the cleaned point) if that completion is feasible.
inline bool polish_integral(const Model& model, const std::vector<double>& lb,
                            const std::vector<double>& ub, const std::vector<double>& x,
                            std::vector<double>& out, double& obj, int64_t& lp_iters) {
  std::vector<double> flb = lb, fub = ub;
  for (size_t j = 0; j < model.num_vars(); ++j) {
    if (!is_int_var(model.vars[j])) continue;
    double r = std::round(x[j]);
    if (r < lb[j] - kIntTol || r > ub[j] + kIntTol) return false;
    r = std::min(std::max(r, lb[j]), ub[j]);
    flb[j] = fub[j] = r;
  }
  LpResult lr = solve_lp_relaxation(model, flb, fub);
  lp_iters += lr.iterations;
  if (lr.status != SolveStatus::Optimal) return false;
  out = std::move(lr.x);
  obj = lr.objective;
  return true;
}

inline Solution branch_and_bound(const Model& model, const std::vector<double>& root_lb,
                                 const std::vector<double>& root_ub, const SolveParams& params,
                                 SolverReport& report,
                                 const std::vector<double>* seed_x = nullptr,
                                 double seed_obj = 0.0) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  const size_t n = model.num_vars();
  const bool maximize = model.objective && model.objective->sense == ObjSense::Maximize;
  auto to_internal = [&](double v) { return maximize ? -v : v; };
  auto to_external = [&](double v) { return maximize ? -v : v; };

  bool have_incumbent = false;
  double inc_obj = kInf;  // minimization space
  std::vector<double> inc_x;
  if (seed_x) {
    have_incumbent = true;
    inc_x = *seed_x;
    inc_obj = to_internal(seed_obj);
    report.incumbent_history.emplace_back(0.0, seed_obj);
  }

  auto record_incumbent = [&](const std::vector<double>& x, double internal_obj) {
    if (!have_incumbent || internal_obj < inc_obj - 1e-12) {
      inc_obj = internal_obj;
      inc_x = x;
      have_incumbent = true;
      report.incumbent_history.emplace_back(elapsed(), to_external(internal_obj));
    }
  };

  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder> open;
  int64_t next_id = 0;
  {
    auto root = std::make_shared<Node>();
    root->lp_bound = -kInf;
    root->id = next_id++;
    root->lb = root_lb;
    root->ub = root_ub;
    open.push(root);
  }

  double window_start_time = 0.0;
  double window_start_obj = kInf;
  bool budget_hit = false;
  bool root_unbounded = false;

  while (!open.empty()) {
    if (elapsed() > params.time_limit) { budget_hit = true; break; }
    if (params.node_limit >= 0 && report.nodes_explored >= params.node_limit) {
      budget_hit = true;
      break;
    }
    if (params.early_stop_window > 0.0 && have_incumbent) {
      double now = elapsed();
      if (window_start_obj == kInf) {
        window_start_obj = inc_obj;
        window_start_time = now;
      } else if (now - window_start_time >= params.early_stop_window) {
        double improve = window_start_obj - inc_obj;
        if (improve < params.early_stop_progress * std::max(1.0, std::fabs(inc_obj))) {
          budget_hit = true;
          break;
        }
        window_start_obj = inc_obj;
        window_start_time = now;
      }
    }

    auto node = open.top();
    open.pop();
    if (have_incumbent && node->lp_bound >= inc_obj - 1e-9) {
      open.push(node);  // everything left is dominated; keep for the bound report
      break;
    }

    ++report.nodes_explored;
    LpResult lp = solve_lp_relaxation(model, node->lb, node->ub);
    report.lp_iterations += lp.iterations;
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      if (node->id == 0) { root_unbounded = true; break; }
      continue;
    }
    double node_obj = to_internal(lp.objective);
    if (have_incumbent && node_obj >= inc_obj - 1e-9) continue;

    // Most fractional integer variable; ties to the lowest id.
    int branch_var = -1;
    double branch_score = kIntTol;
    for (size_t j = 0; j < n; ++j) {
      if (!is_int_var(model.vars[j])) continue;
      double f = lp.x[j] - std::floor(lp.x[j]);
      double frac = std::min(f, 1.0 - f);
      if (frac > branch_score + 1e-12) {
        branch_score = frac;
        branch_var = static_cast<int>(j);
      }
    }

    if (branch_var < 0) {
      // Integral point: clean it by re-solving with the integers fixed.
      std::vector<double> cleaned;
      double cobj;
      if (polish_integral(model, node->lb, node->ub, lp.x, cleaned, cobj, report.lp_iterations))
        record_incumbent(cleaned, to_internal(cobj));
      continue;
    }

    // Cheap incumbent hunt while we have none: round-and-fix from this LP.
    if (!have_incumbent && report.nodes_explored % 8 == 1) {
      std::vector<double> cleaned;
      double cobj;
      if (polish_integral(model, node->lb, node->ub, lp.x, cleaned, cobj, report.lp_iterations))
        record_incumbent(cleaned, to_internal(cobj));
    }

    double floor_val = std::floor(lp.x[branch_var]);
    auto down = std::make_shared<Node>();
    down->lp_bound = node_obj;
    down->id = next_id++;
    down->lb = node->lb;
    down->ub = node->ub;
    down->ub[branch_var] = floor_val;
    auto up = std::make_shared<Node>();
    up->lp_bound = node_obj;
    up->id = next_id++;
    up->lb = node->lb;
    up->ub = node->ub;
    up->lb[branch_var] = floor_val + 1.0;
    if (down->lb[branch_var] <= down->ub[branch_var]) open.push(down);
    if (up->lb[branch_var] <= up->ub[branch_var]) open.push(up);

    if (have_incumbent && !open.empty()) {
      double gap = inc_obj - open.top()->lp_bound;
      if (gap <= params.target_mip_gap * std::max(1.0, std::fabs(inc_obj)) + 1e-9) break;
    }
  }

  report.wall_time = elapsed();

  Solution sol;
  if (root_unbounded && !have_incumbent) {
    sol.status = SolveStatus::Unbounded;
    return sol;
  }
  if (!have_incumbent) {
    sol.status = budget_hit ? SolveStatus::BudgetExhausted : SolveStatus::Infeasible;
    return sol;
  }
  // Global dual bound: the least open-node bound, capped by the incumbent.
  double internal_bound = open.empty() ? inc_obj : std::min(open.top()->lp_bound, inc_obj);
  sol.assignment = std::move(inc_x);
  sol.objective = to_external(inc_obj);
  sol.bound = to_external(internal_bound);
  sol.mip_gap = std::fabs(inc_obj - internal_bound) / std::max(1.0, std::fabs(inc_obj));
  sol.status = budget_hit ? SolveStatus::BudgetExhausted
                          : (sol.mip_gap <= params.target_mip_gap + 1e-12 ? SolveStatus::Optimal
                                                                          : SolveStatus::Feasible);
  return sol;
}

}  // namespace milp_detail

inline std::pair<Solution, SolverReport> solve_milp(const Model& model,
                                                    const SolveParams& params = {}) {
  using namespace milp_detail;
  const size_t n = model.num_vars();

  std::vector<double> root_lb(n), root_ub(n);
  for (size_t j = 0; j < n; ++j) {
    root_lb[j] = model.vars[j].lb;
    root_ub[j] = model.vars[j].ub;
    if (is_int_var(model.vars[j])) {  // tighten to the integer hull box
      if (root_lb[j] != -kInf) root_lb[j] = std::ceil(root_lb[j] - kIntTol);
      if (root_ub[j] != kInf) root_ub[j] = std::floor(root_ub[j] + kIntTol);
    }
  }

  SolverReport report;
  SolveParams main_params = params;
  main_params.warm_start.clear();

  // Complete a warm start (if any) into a full incumbent first: pin the given
  // values and solve the small remaining problem.
  Solution seeded;
  bool have_seed = false;
  if (!params.warm_start.empty()) {
    std::vector<double> wlb = root_lb, wub = root_ub;
    bool ok = true;
    for (const auto& [v, val] : params.warm_start) {
      size_t j = static_cast<size_t>(v);
      if (val < root_lb[j] - kFeasTol || val > root_ub[j] + kFeasTol) { ok = false; break; }
      wlb[j] = std::max(root_lb[j], val);
      wub[j] = std::min(root_ub[j], val);
    }
    if (ok) {
      SolveParams sub;
      sub.time_limit = std::min(params.time_limit * 0.25, 120.0);
      sub.target_mip_gap = params.target_mip_gap;
      seeded = branch_and_bound(model, wlb, wub, sub, report);
      have_seed = seeded.status == SolveStatus::Optimal || seeded.status == SolveStatus::Feasible ||
                  (seeded.status == SolveStatus::BudgetExhausted && !seeded.assignment.empty());
    }
  }

  Solution sol = have_seed
                     ? branch_and_bound(model, root_lb, root_ub, main_params, report,
                                        &seeded.assignment, seeded.objective)
                     : branch_and_bound(model, root_lb, root_ub, main_params, report);
  return {sol, report};
}

// Degenerate-MILP convenience used in a few oracles: solve and return
// objective or throw when no finite optimum exists.
inline double solve_objective(const Model& model, const SolveParams& params = {}) {
  auto [sol, rep] = solve_milp(model, params);
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Feasible &&
      sol.status != SolveStatus::BudgetExhausted)
    throw std::runtime_error(std::string("solve failed: ") + to_string(sol.status));
  if (sol.assignment.empty()) throw std::runtime_error("solver returned no incumbent");
  return sol.objective;
}

}  // namespace gapfinder
