// Linear optimization IR: variables, expressions, constraints, objectives,
// assignments. Shared by the solver, the rewrite engine and the domain packs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gapfinder {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-6;   // constraint feasibility tolerance
constexpr double kIntTol = 1e-6;    // integrality tolerance

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { Le, Eq, Ge };
enum class ObjSense { Minimize, Maximize };

using VarId = int32_t;

struct VarDecl {
  VarId id = -1;
  VarKind kind = VarKind::Continuous;
  double lb = -kInf;
  double ub = kInf;
  std::string name;
};

struct LinTerm {
  VarId var;
  double coeff;
};

// constant + sum of coeff * var. Kept normalized lazily: call normalize()
// to merge duplicate variables and drop zero coefficients.
struct LinExpr {
  double constant = 0.0;
  std::vector<LinTerm> terms;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}
  LinExpr(VarId v) { terms.push_back({v, 1.0}); }

  LinExpr& add(VarId v, double coeff) {
    if (coeff != 0.0) terms.push_back({v, coeff});
    return *this;
  }
  LinExpr& add(const LinExpr& other, double scale = 1.0) {
    constant += scale * other.constant;
    for (const auto& t : other.terms) terms.push_back({t.var, scale * t.coeff});
    return *this;
  }

  void normalize() {
    if (terms.empty()) return;
    std::unordered_map<VarId, double> acc;
    acc.reserve(terms.size());
    for (const auto& t : terms) acc[t.var] += t.coeff;
    std::vector<LinTerm> merged;
    merged.reserve(acc.size());
    // deterministic order
    std::vector<VarId> ids;
    ids.reserve(acc.size());
    for (const auto& [v, c] : acc) ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    for (VarId v : ids) {
      double c = acc[v];
      if (c != 0.0) merged.push_back({v, c});
    }
    terms = std::move(merged);
  }

  bool has_var(VarId v) const {
    for (const auto& t : terms)
      if (t.var == v && t.coeff != 0.0) return true;
    return false;
  }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a.add(b); }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a.add(b, -1.0); }
  friend LinExpr operator*(double s, LinExpr e) {
    e.constant *= s;
    for (auto& t : e.terms) t.coeff *= s;
    return e;
  }
};

struct Constraint {
  LinExpr lhs;       // variable terms only; constant folded into rhs on insert
  Sense sense = Sense::Le;
  double rhs = 0.0;
  std::string tag;   // provenance label
};

struct Objective {
  ObjSense sense = ObjSense::Maximize;
  LinExpr expr;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, BudgetExhausted };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

struct Solution {
  std::vector<double> assignment;  // indexed by VarId
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  double bound = 0.0;     // best dual bound
  double mip_gap = 0.0;

  double value(VarId v) const { return assignment.at(static_cast<size_t>(v)); }
};

class Model {
 public:
  std::vector<VarDecl> vars;
  std::vector<Constraint> constraints;
  std::optional<Objective> objective;

  VarId new_var(VarKind kind, double lb, double ub, const std::string& name) {
    if (frozen_) throw std::logic_error("model is frozen");
    if (!(lb <= ub)) throw std::invalid_argument("inverted bounds for '" + name + "'");
    if (name_index_.count(name)) throw std::invalid_argument("duplicate variable name '" + name + "'");
    if (kind == VarKind::Binary && (lb < 0.0 || ub > 1.0))
      throw std::invalid_argument("binary variable '" + name + "' must have bounds within [0,1]");
    VarId id = static_cast<VarId>(vars.size());
    vars.push_back({id, kind, lb, ub, name});
    name_index_.emplace(name, id);
    return id;
  }

  // Normalizes at insertion: constant moves into rhs, duplicate terms merge.
  void add_constraint(LinExpr lhs, Sense sense, double rhs, std::string tag = {}) {
    if (frozen_) throw std::logic_error("model is frozen");
    rhs -= lhs.constant;
    lhs.constant = 0.0;
    lhs.normalize();
    constraints.push_back({std::move(lhs), sense, rhs, std::move(tag)});
  }

  void set_objective(ObjSense sense, LinExpr expr) {
    if (frozen_) throw std::logic_error("model is frozen");
    expr.normalize();
    objective = Objective{sense, std::move(expr)};
  }

  // After freeze the model is immutable and safe to share across solver sessions.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::optional<VarId> find_var(const std::string& name) const {
    auto it = name_index_.find(name);
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
  }

  size_t num_vars() const { return vars.size(); }

  // Pin a variable to a fixed value (used to replay a leader assignment).
  void pin(VarId v, double value) {
    if (frozen_) throw std::logic_error("model is frozen");
    vars.at(static_cast<size_t>(v)).lb = value;
    vars.at(static_cast<size_t>(v)).ub = value;
  }

 private:
  bool frozen_ = false;
  std::unordered_map<std::string, VarId> name_index_;
};

inline double eval_expr(const LinExpr& e, const std::vector<double>& assignment) {
  double v = e.constant;
  for (const auto& t : e.terms) {
    size_t i = static_cast<size_t>(t.var);
    if (i >= assignment.size()) throw std::out_of_range("unassigned variable in expression");
    v += t.coeff * assignment[i];
  }
  return v;
}

inline bool satisfies(const Constraint& c, const std::vector<double>& assignment,
                      double tol = kFeasTol) {
  double lhs = eval_expr(c.lhs, assignment);
  switch (c.sense) {
    case Sense::Le: return lhs <= c.rhs + tol;
    case Sense::Ge: return lhs >= c.rhs - tol;
    case Sense::Eq: return std::fabs(lhs - c.rhs) <= tol;
  }
  return false;
}

// Diagnostics, not failures: one entry per violated invariant.
inline std::vector<std::string> validate(const Model& m) {
  std::vector<std::string> out;
  auto check_expr = [&](const LinExpr& e, const std::string& where) {
    if (std::isnan(e.constant) || std::isinf(e.constant))
      out.push_back(where + ": non-finite constant");
    for (const auto& t : e.terms) {
      if (t.var < 0 || static_cast<size_t>(t.var) >= m.vars.size())
        out.push_back(where + ": undeclared variable id " + std::to_string(t.var));
      if (std::isnan(t.coeff) || std::isinf(t.coeff))
        out.push_back(where + ": non-finite coefficient");
    }
  };
  for (const auto& v : m.vars) {
    if (!(v.lb <= v.ub))
      out.push_back("var " + v.name + ": inverted bounds");
    if (v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0))
      out.push_back("var " + v.name + ": binary bounds outside [0,1]");
  }
  for (size_t i = 0; i < m.constraints.size(); ++i) {
    const auto& c = m.constraints[i];
    std::string where = "constraint " + std::to_string(i) +
                        (c.tag.empty() ? "" : " [" + c.tag + "]");
    check_expr(c.lhs, where);
    if (std::isnan(c.rhs) || std::isinf(c.rhs)) out.push_back(where + ": non-finite rhs");
  }
  if (m.objective) check_expr(m.objective->expr, "objective");
  return out;
}

}  // namespace gapfinder
