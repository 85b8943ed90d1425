// Shared oracles for the test suites. Everything here is deliberately
// independent of the implementation paths it checks: plain enumeration and
// brute force only.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "gapfinder/milp.hpp"
#include "gapfinder/model.hpp"
#include "gapfinder/simplex.hpp"

namespace gftest {

using namespace gapfinder;

// Exhaustive MILP oracle: enumerate every 0/1 combination of the binary
// variables (and every integer value of bounded general integers), solve the
// continuous rest as an LP, keep the best. Usable up to ~12 binaries.
struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

inline BruteForceResult brute_force_milp(const Model& model) {
  std::vector<size_t> int_vars;
  for (size_t j = 0; j < model.num_vars(); ++j)
    if (model.vars[j].kind != VarKind::Continuous) int_vars.push_back(j);

  std::vector<std::vector<double>> choices(int_vars.size());
  for (size_t k = 0; k < int_vars.size(); ++k) {
    const auto& v = model.vars[int_vars[k]];
    double lo = std::ceil(v.lb - 1e-9), hi = std::floor(v.ub + 1e-9);
    for (double val = lo; val <= hi + 1e-9; val += 1.0) choices[k].push_back(val);
  }

  BruteForceResult best;
  bool maximize = model.objective && model.objective->sense == ObjSense::Maximize;
  std::vector<double> lb(model.num_vars()), ub(model.num_vars());
  for (size_t j = 0; j < model.num_vars(); ++j) {
    lb[j] = model.vars[j].lb;
    ub[j] = model.vars[j].ub;
  }

  std::vector<size_t> idx(int_vars.size(), 0);
  for (;;) {
    for (size_t k = 0; k < int_vars.size(); ++k) {
      double val = choices[k].empty() ? 0.0 : choices[k][idx[k]];
      lb[int_vars[k]] = val;
      ub[int_vars[k]] = val;
    }
    bool skip = false;
    for (size_t k = 0; k < int_vars.size(); ++k)
      if (choices[k].empty()) skip = true;  // empty integer domain: infeasible combo
    if (!skip) {
      LpResult r = solve_lp_relaxation(model, lb, ub);
      if (r.status == SolveStatus::Optimal) {
        if (!best.feasible || (maximize ? r.objective > best.objective + 1e-12
                                        : r.objective < best.objective - 1e-12)) {
          best.feasible = true;
          best.objective = r.objective;
          best.x = r.x;
        }
      }
    }
    // advance the odometer
    size_t k = 0;
    while (k < int_vars.size()) {
      if (++idx[k] < choices[k].size()) break;
      idx[k] = 0;
      ++k;
    }
    if (k == int_vars.size()) break;
  }
  return best;
}

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace gftest
