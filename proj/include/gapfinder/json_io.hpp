// JSON serialization for the model IR.
//
// Schema: {vars:[{name,kind,lb,ub}],
//          constraints:[{terms:[[name,coeff]],const,sense,rhs,tag}],
//          objective:{sense,terms,const}}
// Values carry full double precision (17 significant digits survive the trip).
#pragma once

#include <fstream>
#include <sstream>

#include "gapfinder/model.hpp"
#include "json.hpp"

namespace gapfinder {

namespace detail {

inline std::string kind_name(VarKind k) {
  switch (k) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Binary: return "binary";
    case VarKind::Integer: return "integer";
  }
  return "?";
}

inline VarKind kind_from(const std::string& s) {
  if (s == "continuous") return VarKind::Continuous;
  if (s == "binary") return VarKind::Binary;
  if (s == "integer") return VarKind::Integer;
  throw std::invalid_argument("unknown variable kind: " + s);
}

inline std::string sense_name(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Eq: return "=";
    case Sense::Ge: return ">=";
  }
  return "?";
}

inline Sense sense_from(const std::string& s) {
  if (s == "<=") return Sense::Le;
  if (s == "=") return Sense::Eq;
  if (s == ">=") return Sense::Ge;
  throw std::invalid_argument("unknown constraint sense: " + s);
}

// Bounds may be infinite; JSON numbers cannot be, so encode as strings.
inline nlohmann::json bound_to_json(double b) {
  if (b == kInf) return "+inf";
  if (b == -kInf) return "-inf";
  return b;
}

inline double bound_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad bound: " + s);
  }
  return j.get<double>();
}

inline nlohmann::json terms_to_json(const Model& m, const LinExpr& e) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : e.terms)
    arr.push_back({m.vars[static_cast<size_t>(t.var)].name, t.coeff});
  return arr;
}

inline LinExpr terms_from_json(const Model& m, const nlohmann::json& arr, double constant) {
  LinExpr e(constant);
  for (const auto& t : arr) {
    auto id = m.find_var(t.at(0).get<std::string>());
    if (!id) throw std::invalid_argument("unknown variable in terms: " + t.at(0).dump());
    e.add(*id, t.at(1).get<double>());
  }
  return e;
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j;
  j["vars"] = nlohmann::json::array();
  for (const auto& v : m.vars)
    j["vars"].push_back({{"name", v.name},
                         {"kind", detail::kind_name(v.kind)},
                         {"lb", detail::bound_to_json(v.lb)},
                         {"ub", detail::bound_to_json(v.ub)}});
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : m.constraints)
    j["constraints"].push_back({{"terms", detail::terms_to_json(m, c.lhs)},
                                {"const", c.lhs.constant},
                                {"sense", detail::sense_name(c.sense)},
                                {"rhs", c.rhs},
                                {"tag", c.tag}});
  if (m.objective)
    j["objective"] = {{"sense", m.objective->sense == ObjSense::Maximize ? "max" : "min"},
                      {"terms", detail::terms_to_json(m, m.objective->expr)},
                      {"const", m.objective->expr.constant}};
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  Model m;
  for (const auto& v : j.at("vars"))
    m.new_var(detail::kind_from(v.at("kind").get<std::string>()),
              detail::bound_from_json(v.at("lb")), detail::bound_from_json(v.at("ub")),
              v.at("name").get<std::string>());
  for (const auto& c : j.at("constraints")) {
    LinExpr lhs = detail::terms_from_json(m, c.at("terms"), c.value("const", 0.0));
    m.add_constraint(std::move(lhs), detail::sense_from(c.at("sense").get<std::string>()),
                     c.at("rhs").get<double>(), c.value("tag", std::string{}));
  }
  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    m.set_objective(o.at("sense") == "max" ? ObjSense::Maximize : ObjSense::Minimize,
                    detail::terms_from_json(m, o.at("terms"), o.value("const", 0.0)));
  }
  return m;
}

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << model_to_json(m).dump(2) << "\n";
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace gapfinder
