#include <catch2/catch_amalgamated.hpp>

#include "gapfinder/helpers.hpp"
#include "gapfinder/milp.hpp"
#include "test_support.hpp"

using namespace gapfinder;

namespace {

// Solve for the extreme values a single variable can take; when both extremes
// agree the encoding forces that value.
std::optional<double> forced_value(Model m, VarId v) {
  m.set_objective(ObjSense::Maximize, LinExpr(v));
  auto [hi, r1] = solve_milp(m);
  if (hi.status != SolveStatus::Optimal) return std::nullopt;
  m.set_objective(ObjSense::Minimize, LinExpr(v));
  auto [lo, r2] = solve_milp(m);
  if (lo.status != SolveStatus::Optimal) return std::nullopt;
  if (std::fabs(hi.objective - lo.objective) > 1e-6) return std::nullopt;
  return hi.objective;
}

bool feasible(Model m) {
  m.set_objective(ObjSense::Maximize, LinExpr(0.0));
  auto [s, r] = solve_milp(m);
  return s.status == SolveStatus::Optimal;
}

}  // namespace

TEST_CASE("is_leq forced by fixed inputs") {
  {
    Model m;
    VarId x = m.new_var(VarKind::Continuous, 3, 3, "x");
    VarId y = m.new_var(VarKind::Continuous, 5, 5, "y");
    BigMContext ctx(m);
    VarId b = is_leq(ctx, LinExpr(x), LinExpr(y));
    auto v = forced_value(m, b);
    REQUIRE(v.has_value());
    CHECK(*v == 1.0);
  }
  {
    Model m;
    VarId x = m.new_var(VarKind::Continuous, 5, 5, "x");
    VarId y = m.new_var(VarKind::Continuous, 3, 3, "y");
    BigMContext ctx(m);
    VarId b = is_leq(ctx, LinExpr(x), LinExpr(y));
    auto v = forced_value(m, b);
    REQUIRE(v.has_value());
    CHECK(*v == 0.0);
  }
}

TEST_CASE("is_leq exhaustive integer grid") {
  for (int xv = -4; xv <= 4; ++xv)
    for (int yv = -4; yv <= 4; ++yv) {
      Model m;
      VarId x = m.new_var(VarKind::Continuous, xv, xv, "x");
      VarId y = m.new_var(VarKind::Continuous, yv, yv, "y");
      BigMContext ctx(m);
      VarId b = is_leq(ctx, LinExpr(x), LinExpr(y));
      auto v = forced_value(m, b);
      REQUIRE(v.has_value());
      CHECK(*v == (xv <= yv ? 1.0 : 0.0));
    }
}

TEST_CASE("and / or truth tables") {
  for (int n = 0; n <= 3; ++n) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      Model m;
      std::vector<VarId> us;
      for (int i = 0; i < n; ++i) {
        double bit = (mask >> i) & 1;
        us.push_back(m.new_var(VarKind::Binary, bit, bit, "u" + std::to_string(i)));
      }
      BigMContext ctx(m);
      VarId a = logic_and(ctx, us);
      VarId o = logic_or(ctx, us);
      bool expect_and = mask == (1 << n) - 1;  // vacuous truth for n=0
      bool expect_or = mask != 0;
      auto va = forced_value(m, a);
      auto vo = forced_value(m, o);
      REQUIRE(va.has_value());
      REQUIRE(vo.has_value());
      CHECK(*va == (expect_and ? 1.0 : 0.0));
      CHECK(*vo == (expect_or ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("all_leq and all_eq") {
  {
    Model m;
    VarId a = m.new_var(VarKind::Continuous, 1, 1, "a");
    VarId b = m.new_var(VarKind::Continuous, 2, 2, "b");
    BigMContext ctx(m);
    VarId r = all_leq(ctx, {LinExpr(a), LinExpr(b)}, 2.0);
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == 1.0);
  }
  {
    Model m;
    std::vector<LinExpr> xs;
    for (int i = 0; i < 3; ++i)
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, 0, 0, "x" + std::to_string(i))));
    BigMContext ctx(m);
    VarId r = all_eq(ctx, xs, 0.0);
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == 1.0);
  }
  {
    Model m;
    VarId a = m.new_var(VarKind::Continuous, 0, 0, "a");
    VarId b = m.new_var(VarKind::Continuous, 1, 1, "b");
    BigMContext ctx(m);
    VarId r = all_eq(ctx, {LinExpr(a), LinExpr(b)}, 0.0);
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == 0.0);
  }
}

TEST_CASE("if_then pins pairs when the guard is up") {
  Model m;
  VarId b = m.new_var(VarKind::Binary, 1, 1, "b");
  VarId x = m.new_var(VarKind::Continuous, -10, 10, "x");
  BigMContext ctx(m);
  if_then(ctx, b, {{LinExpr(x), LinExpr(7.0)}});
  auto v = forced_value(m, x);
  REQUIRE(v.has_value());
  CHECK_THAT(*v, Catch::Matchers::WithinAbs(7.0, 1e-9));
}

TEST_CASE("if_then_else takes the else branch") {
  Model m;
  VarId b = m.new_var(VarKind::Binary, 0, 0, "b");
  VarId x = m.new_var(VarKind::Continuous, -10, 10, "x");
  VarId y = m.new_var(VarKind::Continuous, -10, 10, "y");
  BigMContext ctx(m);
  if_then_else(ctx, b, {{LinExpr(x), LinExpr(7.0)}}, {{LinExpr(y), LinExpr(0.0)}});
  auto vy = forced_value(m, y);
  REQUIRE(vy.has_value());
  CHECK_THAT(*vy, Catch::Matchers::WithinAbs(0.0, 1e-9));
  // x is free under b=0
  auto vx = forced_value(m, x);
  CHECK(!vx.has_value());
}

TEST_CASE("multiply on spot values and a half-step grid") {
  {
    Model m;
    VarId b = m.new_var(VarKind::Binary, 1, 1, "b");
    VarId x = m.new_var(VarKind::Continuous, 3.5, 3.5, "x");
    BigMContext ctx(m);
    VarId y = multiply(ctx, b, LinExpr(x));
    auto v = forced_value(m, y);
    REQUIRE(v.has_value());
    CHECK_THAT(*v, Catch::Matchers::WithinAbs(3.5, 1e-9));
  }
  {
    Model m;
    VarId b = m.new_var(VarKind::Binary, 0, 0, "b");
    VarId x = m.new_var(VarKind::Continuous, -2, -2, "x");
    BigMContext ctx(m);
    VarId y = multiply(ctx, b, LinExpr(x));
    auto v = forced_value(m, y);
    REQUIRE(v.has_value());
    CHECK_THAT(*v, Catch::Matchers::WithinAbs(0.0, 1e-9));
  }
  for (int bb = 0; bb <= 1; ++bb)
    for (double xv = -3.0; xv <= 3.0 + 1e-9; xv += 0.5) {
      Model m;
      VarId b = m.new_var(VarKind::Binary, bb, bb, "b");
      VarId x = m.new_var(VarKind::Continuous, xv, xv, "x");
      BigMContext ctx(m);
      VarId y = multiply(ctx, b, LinExpr(x));
      auto v = forced_value(m, y);
      REQUIRE(v.has_value());
      CHECK_THAT(*v, Catch::Matchers::WithinAbs(bb * xv, 1e-7));
    }
}

TEST_CASE("max_of and min_of") {
  {
    Model m;
    std::vector<LinExpr> xs;
    for (double val : {1.0, 4.0, 2.0})
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, val, val, "x" + std::to_string(int(val)))));
    BigMContext ctx(m);
    VarId y = max_of(ctx, xs, 0.0);
    auto v = forced_value(m, y);
    REQUIRE(v.has_value());
    CHECK_THAT(*v, Catch::Matchers::WithinAbs(4.0, 1e-9));
  }
  {
    Model m;
    BigMContext ctx(m);
    VarId y = max_of(ctx, {}, 3.0);
    auto v = forced_value(m, y);
    REQUIRE(v.has_value());
    CHECK_THAT(*v, Catch::Matchers::WithinAbs(3.0, 1e-9));
  }
  // random triples against direct computation
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 25; ++trial) {
    double a = u(gen), b = u(gen), c = u(gen), k = u(gen);
    Model m;
    std::vector<LinExpr> xs;
    xs.push_back(LinExpr(m.new_var(VarKind::Continuous, a, a, "a")));
    xs.push_back(LinExpr(m.new_var(VarKind::Continuous, b, b, "b")));
    xs.push_back(LinExpr(m.new_var(VarKind::Continuous, c, c, "c")));
    BigMContext ctx(m);
    VarId ymax = max_of(ctx, xs, k);
    VarId ymin = min_of(ctx, xs, k);
    auto vmax = forced_value(m, ymax);
    auto vmin = forced_value(m, ymin);
    REQUIRE(vmax.has_value());
    REQUIRE(vmin.has_value());
    CHECK_THAT(*vmax, Catch::Matchers::WithinAbs(std::max({a, b, c, k}), 1e-7));
    CHECK_THAT(*vmin, Catch::Matchers::WithinAbs(std::min({a, b, c, k}), 1e-7));
  }
}

TEST_CASE("find_largest_value selects active attainers") {
  {
    Model m;
    std::vector<LinExpr> xs;
    std::vector<VarId> us;
    std::vector<double> vals{2, 9, 9};
    std::vector<double> act{1, 1, 0};
    for (int i = 0; i < 3; ++i) {
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, vals[i], vals[i], "x" + std::to_string(i))));
      us.push_back(m.new_var(VarKind::Binary, act[i], act[i], "u" + std::to_string(i)));
    }
    BigMContext ctx(m);
    auto bs = find_largest_value(ctx, xs, us);
    // index 1 is the only active attainer of the max
    auto v0 = forced_value(m, bs[0]);
    auto v1 = forced_value(m, bs[1]);
    auto v2 = forced_value(m, bs[2]);
    REQUIRE((v0 && v1 && v2));
    CHECK(*v0 == 0.0);
    CHECK(*v1 == 1.0);
    CHECK(*v2 == 0.0);
  }
  {
    // all inactive: bs forced to zero by domination, model stays feasible
    Model m;
    std::vector<LinExpr> xs;
    std::vector<VarId> us;
    for (int i = 0; i < 2; ++i) {
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, i, i, "x" + std::to_string(i))));
      us.push_back(m.new_var(VarKind::Binary, 0, 0, "u" + std::to_string(i)));
    }
    BigMContext ctx(m);
    find_largest_value(ctx, xs, us);
    CHECK(feasible(m));
  }
  // grid check over small configurations
  for (int mask = 1; mask < 8; ++mask) {
    std::vector<double> vals{3, 1, 3};
    Model m;
    std::vector<LinExpr> xs;
    std::vector<VarId> us;
    for (int i = 0; i < 3; ++i) {
      double a = (mask >> i) & 1;
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, vals[i], vals[i], "x" + std::to_string(i))));
      us.push_back(m.new_var(VarKind::Binary, a, a, "u" + std::to_string(i)));
    }
    BigMContext ctx(m);
    auto bs = find_largest_value(ctx, xs, us);
    double best = -kInf;
    for (int i = 0; i < 3; ++i)
      if ((mask >> i) & 1) best = std::max(best, vals[i]);
    for (int i = 0; i < 3; ++i) {
      bool active = (mask >> i) & 1;
      bool attains = active && vals[i] == best;
      if (!attains) {
        auto v = forced_value(m, bs[i]);
        REQUIRE(v.has_value());
        CHECK(*v == 0.0);  // only attainers may be flagged
      }
    }
    // at least one attainer flagged
    Model sum_model = m;
    LinExpr bsum;
    for (auto b : bs) bsum.add(b, 1.0);
    sum_model.set_objective(ObjSense::Minimize, bsum);
    auto [s, r] = solve_milp(sum_model);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective >= 1.0);
  }
}

TEST_CASE("rank uses weak inequality") {
  {
    Model m;
    VarId y = m.new_var(VarKind::Continuous, 5, 5, "y");
    std::vector<LinExpr> xs;
    int i = 0;
    for (double val : {1.0, 5.0, 9.0})
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, val, val, "x" + std::to_string(i++))));
    BigMContext ctx(m);
    VarId r = rank_of(ctx, LinExpr(y), xs);
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == 2.0);
  }
  {
    Model m;
    VarId y = m.new_var(VarKind::Continuous, 0, 0, "y");
    std::vector<LinExpr> xs;
    for (int i = 0; i < 3; ++i)
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, i + 1, i + 1, "x" + std::to_string(i))));
    BigMContext ctx(m);
    VarId r = rank_of(ctx, LinExpr(y), xs);
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == 0.0);
  }
  for (int yv = 0; yv <= 3; ++yv) {
    Model m;
    VarId y = m.new_var(VarKind::Continuous, yv, yv, "y");
    std::vector<int> vals{0, 1, 2, 2};
    std::vector<LinExpr> xs;
    for (size_t i = 0; i < vals.size(); ++i)
      xs.push_back(LinExpr(m.new_var(VarKind::Continuous, vals[i], vals[i], "x" + std::to_string(i))));
    BigMContext ctx(m);
    VarId r = rank_of(ctx, LinExpr(y), xs);
    int expect = 0;
    for (int xv : vals)
      if (xv <= yv) ++expect;
    auto v = forced_value(m, r);
    REQUIRE(v.has_value());
    CHECK(*v == expect);
  }
}

TEST_CASE("force_to_zero_if_leq") {
  {
    Model m;
    VarId v = m.new_var(VarKind::Continuous, -5, 5, "v");
    VarId x = m.new_var(VarKind::Continuous, 1, 1, "x");
    VarId y = m.new_var(VarKind::Continuous, 2, 2, "y");
    BigMContext ctx(m);
    force_to_zero_if_leq(ctx, LinExpr(v), LinExpr(x), LinExpr(y));
    auto fv = forced_value(m, v);
    REQUIRE(fv.has_value());
    CHECK_THAT(*fv, Catch::Matchers::WithinAbs(0.0, 1e-9));
  }
  {
    Model m;
    VarId v = m.new_var(VarKind::Continuous, -5, 5, "v");
    VarId x = m.new_var(VarKind::Continuous, 3, 3, "x");
    VarId y = m.new_var(VarKind::Continuous, 2, 2, "y");
    BigMContext ctx(m);
    force_to_zero_if_leq(ctx, LinExpr(v), LinExpr(x), LinExpr(y));
    auto fv = forced_value(m, v);
    CHECK(!fv.has_value());  // free within declared bounds
  }
}

TEST_CASE("helpers never modify previously added constraints") {
  Model m;
  VarId x = m.new_var(VarKind::Continuous, 0, 4, "x");
  m.add_constraint(LinExpr(x), Sense::Le, 3, "pre");
  size_t before = m.constraints.size();
  BigMContext ctx(m);
  is_leq(ctx, LinExpr(x), LinExpr(2.0));
  REQUIRE(m.constraints.size() > before);
  CHECK(m.constraints[0].tag == "pre");
  CHECK(m.constraints[0].rhs == 3.0);
  for (size_t i = before; i < m.constraints.size(); ++i)
    CHECK(m.constraints[i].tag == "is_leq");
}
