#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "gapfinder/json_io.hpp"
#include "gapfinder/model.hpp"

using namespace gapfinder;

TEST_CASE("variable registration keeps bounds and kinds") {
  Model m;
  VarId f1 = m.new_var(VarKind::Continuous, 0, 100, "f_1");
  CHECK(m.vars[f1].lb == 0.0);
  CHECK(m.vars[f1].ub == 100.0);
  VarId xq = m.new_var(VarKind::Binary, 0, 1, "x_q1");
  CHECK(m.vars[xq].kind == VarKind::Binary);
  CHECK(f1 != xq);
}

TEST_CASE("variable preconditions") {
  Model m;
  CHECK_THROWS_AS(m.new_var(VarKind::Continuous, 5, 3, "bad"), std::invalid_argument);
  m.new_var(VarKind::Continuous, 0, 1, "dup");
  CHECK_THROWS_AS(m.new_var(VarKind::Continuous, 0, 1, "dup"), std::invalid_argument);
  CHECK_THROWS_AS(m.new_var(VarKind::Binary, 0, 2, "b"), std::invalid_argument);
}

TEST_CASE("eval_expr") {
  Model m;
  VarId x = m.new_var(VarKind::Continuous, -kInf, kInf, "x");
  LinExpr e(2.0);
  e.add(x, 3.0);
  std::vector<double> a{4.0};
  CHECK(eval_expr(e, a) == 14.0);

  LinExpr empty(7.5);
  CHECK(eval_expr(empty, {}) == 7.5);

  VarId b = m.new_var(VarKind::Continuous, -kInf, kInf, "b");
  LinExpr sym;
  sym.add(x, 0.5).add(b, -0.5);
  std::vector<double> both{7.0, 7.0};
  CHECK(eval_expr(sym, both) == 0.0);

  LinExpr oob;
  oob.add(static_cast<VarId>(9), 1.0);
  CHECK_THROWS_AS(eval_expr(oob, both), std::out_of_range);
}

TEST_CASE("normalization preserves evaluation") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coeff(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    LinExpr e(coeff(gen));
    for (int t = 0; t < 12; ++t) e.add(static_cast<VarId>(gen() % 4), coeff(gen));
    std::vector<double> a(4);
    for (auto& v : a) v = coeff(gen);
    double before = eval_expr(e, a);
    LinExpr n = e;
    n.normalize();
    CHECK_THAT(eval_expr(n, a), Catch::Matchers::WithinAbs(before, 1e-9));
    for (size_t i = 1; i < n.terms.size(); ++i) CHECK(n.terms[i - 1].var < n.terms[i].var);
  }
}

TEST_CASE("validate flags broken models") {
  Model good;
  VarId x = good.new_var(VarKind::Continuous, 0, 10, "x");
  good.add_constraint(LinExpr(x), Sense::Le, 5, "cap");
  good.set_objective(ObjSense::Maximize, LinExpr(x));
  CHECK(validate(good).empty());

  Model bad = good;
  LinExpr stray;
  stray.terms.push_back({static_cast<VarId>(42), 1.0});
  bad.constraints.push_back({stray, Sense::Le, 1.0, "stray"});
  CHECK(validate(bad).size() == 1);

  Model nan_model = good;
  nan_model.constraints[0].lhs.terms[0].coeff = std::nan("");
  CHECK(validate(nan_model).size() == 1);
}

TEST_CASE("constraint normalization at insertion") {
  Model m;
  VarId x = m.new_var(VarKind::Continuous, 0, 10, "x");
  LinExpr lhs(3.0);  // constant folds into rhs
  lhs.add(x, 1.0).add(x, 1.0);
  m.add_constraint(lhs, Sense::Le, 10, "t");
  const Constraint& c = m.constraints[0];
  CHECK(c.lhs.constant == 0.0);
  CHECK(c.rhs == 7.0);
  REQUIRE(c.lhs.terms.size() == 1);
  CHECK(c.lhs.terms[0].coeff == 2.0);
}

TEST_CASE("json round trip preserves constraint evaluation") {
  Model m;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> coeff(-3, 3);
  for (int j = 0; j < 6; ++j)
    m.new_var(j % 2 ? VarKind::Binary : VarKind::Continuous, j % 2 ? 0 : -7.25,
              j % 2 ? 1 : 13.5, "v" + std::to_string(j));
  for (int i = 0; i < 8; ++i) {
    LinExpr e;
    for (int j = 0; j < 6; ++j) e.add(static_cast<VarId>(j), coeff(gen) * 1.0e-1 + coeff(gen));
    m.add_constraint(e, i % 3 == 0 ? Sense::Le : (i % 3 == 1 ? Sense::Ge : Sense::Eq),
                     coeff(gen), "c" + std::to_string(i));
  }
  LinExpr obj;
  obj.add(static_cast<VarId>(0), 1.23);
  m.set_objective(ObjSense::Maximize, obj);

  Model back = model_from_json(model_to_json(m));
  REQUIRE(back.num_vars() == m.num_vars());
  REQUIRE(back.constraints.size() == m.constraints.size());
  std::uniform_real_distribution<double> point(-10, 10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(m.num_vars());
    for (auto& v : a) v = point(gen);
    for (size_t i = 0; i < m.constraints.size(); ++i) {
      double lhs0 = eval_expr(m.constraints[i].lhs, a);
      double lhs1 = eval_expr(back.constraints[i].lhs, a);
      CHECK_THAT(lhs1, Catch::Matchers::WithinAbs(lhs0, 1e-12));
      CHECK(back.constraints[i].rhs == m.constraints[i].rhs);
    }
  }
}
