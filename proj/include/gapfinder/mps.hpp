// Fixed-format MPS export, solution-file import and a subprocess bridge to
// external MILP solvers.
//
// Column/row names are generated (V<id> / R<idx> / OBJ) so any solver's
// solution file maps back onto the model unambiguously. Solution files are
// plain "name value" lines; '#' starts a comment.
#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gapfinder/milp.hpp"
#include "gapfinder/model.hpp"

namespace gapfinder {

namespace mps_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string field(const std::string& s, size_t width) {
  std::string out = s;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

}  // namespace mps_detail

inline void export_mps(const Model& model, const std::string& path) {
  using mps_detail::field;
  using mps_detail::num;
  if (!model.frozen()) throw std::logic_error("export_mps: model must be frozen");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);

  bool maximize = model.objective && model.objective->sense == ObjSense::Maximize;
  // MPS has no objective-sense record in the classic fixed format; emit the
  // conventional OBJSENSE section, which modern readers accept.
  out << "NAME          GAPFINDER\n";
  out << "OBJSENSE\n    " << (maximize ? "MAX" : "MIN") << "\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  for (size_t i = 0; i < model.constraints.size(); ++i) {
    char s = model.constraints[i].sense == Sense::Le   ? 'L'
             : model.constraints[i].sense == Sense::Ge ? 'G'
                                                       : 'E';
    out << " " << s << "  R" << i << "\n";
  }

  // column-major entries
  std::vector<std::vector<std::pair<std::string, double>>> col_entries(model.num_vars());
  if (model.objective)
    for (const auto& t : model.objective->expr.terms)
      col_entries[t.var].push_back({"OBJ", t.coeff});
  for (size_t i = 0; i < model.constraints.size(); ++i)
    for (const auto& t : model.constraints[i].lhs.terms)
      col_entries[t.var].push_back({"R" + std::to_string(i), t.coeff});

  out << "COLUMNS\n";
  bool in_int = false;
  for (size_t j = 0; j < model.num_vars(); ++j) {
    bool is_int = model.vars[j].kind != VarKind::Continuous;
    if (is_int && !in_int) {
      out << "    MARKER                 'MARKER'                 'INTORG'\n";
      in_int = true;
    } else if (!is_int && in_int) {
      out << "    MARKER                 'MARKER'                 'INTEND'\n";
      in_int = false;
    }
    std::string cname = "V" + std::to_string(j);
    if (col_entries[j].empty()) {
      // keep the column present so bounds below are legal
      out << "    " << field(cname, 10) << field("OBJ", 10) << num(0.0) << "\n";
      continue;
    }
    for (const auto& [row, coeff] : col_entries[j])
      out << "    " << field(cname, 10) << field(row, 10) << num(coeff) << "\n";
  }
  if (in_int) out << "    MARKER                 'MARKER'                 'INTEND'\n";

  out << "RHS\n";
  for (size_t i = 0; i < model.constraints.size(); ++i)
    if (model.constraints[i].rhs != 0.0)
      out << "    " << field("RHS", 10) << field("R" + std::to_string(i), 10)
          << num(model.constraints[i].rhs) << "\n";
  if (model.objective && model.objective->expr.constant != 0.0)
    out << "    " << field("RHS", 10) << field("OBJ", 10)
        << num(-model.objective->expr.constant) << "\n";

  out << "BOUNDS\n";
  for (size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    std::string cname = "V" + std::to_string(j);
    if (v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0) {
      out << " BV " << field("BND", 9) << field(cname, 10) << "\n";
      continue;
    }
    if (v.lb == -kInf && v.ub == kInf) {
      out << " FR " << field("BND", 9) << field(cname, 10) << "\n";
      continue;
    }
    if (v.lb == -kInf) out << " MI " << field("BND", 9) << field(cname, 10) << "\n";
    else if (v.lb != 0.0)
      out << " LO " << field("BND", 9) << field(cname, 10) << num(v.lb) << "\n";
    if (v.ub != kInf)
      out << " UP " << field("BND", 9) << field(cname, 10) << num(v.ub) << "\n";
  }
  out << "ENDATA\n";
}

// Parse an MPS file written by export_mps (also tolerates free-format
// spacing). Used by the `solve-mps` CLI utility so the bridge can be driven
// by this tool itself.
inline Model import_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Model m;
  enum Section { None, Rows, Columns, Rhs, Bounds, ObjSenseSec } sec = None;
  struct RowInfo { Sense sense; std::vector<LinTerm> terms; double rhs = 0.0; };
  std::vector<std::string> row_order;
  std::unordered_map<std::string, RowInfo> rows;
  std::vector<std::pair<std::string, double>> obj_terms;
  double obj_const = 0.0;
  bool maximize = false;
  bool in_int = false;
  std::unordered_map<std::string, VarId> cols;
  struct BoundPatch { double lb, ub; bool lb_set = false, ub_set = false; bool binary = false; };
  std::unordered_map<std::string, BoundPatch> patches;

  auto get_col = [&](const std::string& name, bool integer) {
    auto it = cols.find(name);
    if (it != cols.end()) return it->second;
    VarId v = m.new_var(integer ? VarKind::Integer : VarKind::Continuous, 0.0, kInf, name);
    cols.emplace(name, v);
    return v;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    if (!isspace(static_cast<unsigned char>(line[0]))) {
      std::string head;
      ss >> head;
      if (head == "NAME") sec = None;
      else if (head == "OBJSENSE") sec = ObjSenseSec;
      else if (head == "ROWS") sec = Rows;
      else if (head == "COLUMNS") sec = Columns;
      else if (head == "RHS") sec = Rhs;
      else if (head == "RANGES") throw std::runtime_error("RANGES section unsupported");
      else if (head == "BOUNDS") sec = Bounds;
      else if (head == "ENDATA") break;
      continue;
    }
    switch (sec) {
      case ObjSenseSec: {
        std::string v;
        ss >> v;
        maximize = (v == "MAX" || v == "MAXIMIZE");
        break;
      }
      case Rows: {
        std::string type, name;
        ss >> type >> name;
        if (type == "N") { /* objective row */ }
        else {
          Sense s = type == "L" ? Sense::Le : type == "G" ? Sense::Ge : Sense::Eq;
          rows.emplace(name, RowInfo{s, {}, 0.0});
          row_order.push_back(name);
        }
        break;
      }
      case Columns: {
        std::string col, f1;
        ss >> col >> f1;
        if (f1 == "'MARKER'") {
          std::string f2;
          ss >> f2;
          in_int = (f2 == "'INTORG'");
          break;
        }
        VarId v = get_col(col, in_int);
        // entries come in (row, value) pairs, up to two per line
        std::string row = f1;
        double val;
        for (;;) {
          if (!(ss >> val)) break;
          if (row == "OBJ") obj_terms.push_back({col, val});
          else {
            auto it = rows.find(row);
            if (it == rows.end()) throw std::runtime_error("unknown row " + row);
            it->second.terms.push_back({v, val});
          }
          if (!(ss >> row)) break;
        }
        break;
      }
      case Rhs: {
        std::string setname, row;
        double val;
        ss >> setname >> row;
        while (ss >> val) {
          if (row == "OBJ") obj_const = -val;
          else {
            auto it = rows.find(row);
            if (it == rows.end()) throw std::runtime_error("unknown rhs row " + row);
            it->second.rhs = val;
          }
          if (!(ss >> row)) break;
        }
        break;
      }
      case Bounds: {
        std::string type, setname, col;
        ss >> type >> setname >> col;
        auto& p = patches[col];
        double val = 0.0;
        if (type == "UP" || type == "LO" || type == "FX") ss >> val;
        if (type == "UP") { p.ub = val; p.ub_set = true; }
        else if (type == "LO") { p.lb = val; p.lb_set = true; }
        else if (type == "FX") { p.lb = p.ub = val; p.lb_set = p.ub_set = true; }
        else if (type == "FR") { p.lb = -kInf; p.ub = kInf; p.lb_set = p.ub_set = true; }
        else if (type == "MI") { p.lb = -kInf; p.lb_set = true; }
        else if (type == "PL") { p.ub = kInf; p.ub_set = true; }
        else if (type == "BV") p.binary = true;
        break;
      }
      case None: break;
    }
  }

  for (auto& [name, patch] : patches) {
    auto it = cols.find(name);
    if (it == cols.end()) continue;
    auto& v = m.vars[static_cast<size_t>(it->second)];
    if (patch.binary) {
      v.kind = VarKind::Binary;
      v.lb = 0.0;
      v.ub = 1.0;
      continue;
    }
    if (patch.lb_set) v.lb = patch.lb;
    if (patch.ub_set) v.ub = patch.ub;
    // MPS convention: an UP bound with a negative value on a default-lb column
    // implies the lower bound drops to -inf; our exporter never relies on it.
  }

  for (const auto& name : row_order) {
    auto& r = rows.at(name);
    LinExpr lhs;
    lhs.terms = std::move(r.terms);
    m.add_constraint(std::move(lhs), r.sense, r.rhs, name);
  }
  LinExpr obj(obj_const);
  for (const auto& [col, val] : obj_terms) {
    auto it = cols.find(col);
    if (it == cols.end()) throw std::runtime_error("objective names unknown column " + col);
    obj.add(it->second, val);
  }
  m.set_objective(maximize ? ObjSense::Maximize : ObjSense::Minimize, obj);
  return m;
}

// Read "name value" lines and check the assignment against the model.
// Missing variables default to 0 when 0 is within bounds, otherwise error.
inline Solution import_solution(const std::string& path, const Model& model) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unordered_map<std::string, double> given;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    double val;
    if (!(ss >> name >> val)) throw std::runtime_error("malformed solution line: " + line);
    given[name] = val;
  }

  Solution s;
  s.assignment.assign(model.num_vars(), 0.0);
  for (size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    std::string key = "V" + std::to_string(j);
    auto it = given.find(key);
    if (it == given.end()) it = given.find(v.name);  // accept model names too
    if (it != given.end()) {
      s.assignment[j] = it->second;
    } else if (v.lb > 0.0 + kFeasTol || v.ub < 0.0 - kFeasTol) {
      throw std::runtime_error("solution file missing variable " + v.name +
                               " whose bounds exclude 0");
    }
    if (s.assignment[j] < v.lb - kFeasTol || s.assignment[j] > v.ub + kFeasTol)
      throw std::runtime_error("solution value out of bounds for " + v.name);
    if (v.kind != VarKind::Continuous &&
        std::fabs(s.assignment[j] - std::round(s.assignment[j])) > kIntTol)
      throw std::runtime_error("fractional value for integer variable " + v.name);
  }
  for (size_t i = 0; i < model.constraints.size(); ++i)
    if (!satisfies(model.constraints[i], s.assignment))
      throw std::runtime_error("imported solution violates constraint " + std::to_string(i) +
                               (model.constraints[i].tag.empty() ? "" : " [" + model.constraints[i].tag + "]"));
  s.objective = model.objective ? eval_expr(model.objective->expr, s.assignment) : 0.0;
  s.bound = s.objective;
  s.status = SolveStatus::Feasible;
  return s;
}

inline void write_solution(const Solution& sol, const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# objective " << mps_detail::num(sol.objective) << "\n";
  for (size_t j = 0; j < model.num_vars(); ++j)
    out << "V" << j << " " << mps_detail::num(sol.assignment[j]) << "\n";
}

// Run `solver_command <mps> <sol>` and import the result. The command is a
// shell line; it must write the solution file on success.
inline Solution bridge_solve(const Model& model, const std::string& solver_command,
                             const SolveParams& params = {}) {
  (void)params;
  static std::atomic<uint64_t> counter{0};
  std::string base = "/tmp/gapfinder_bridge_" + std::to_string(::getpid()) + "_" +
                     std::to_string(counter.fetch_add(1));
  std::string mps_path = base + ".mps";
  std::string sol_path = base + ".sol";
  export_mps(model, mps_path);
  std::string cmd = solver_command + " " + mps_path + " " + sol_path;
  int rc = std::system(cmd.c_str());
  if (rc != 0) {
    std::remove(mps_path.c_str());
    throw std::runtime_error("bridge solver failed with exit code " + std::to_string(rc));
  }
  Solution s = import_solution(sol_path, model);
  std::remove(mps_path.c_str());
  std::remove(sol_path.c_str());
  return s;
}

}  // namespace gapfinder
