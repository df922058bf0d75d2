// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fdiab/gp_solver.hpp"
#include "oracles.hpp"

using namespace fdiab::gp;

TEST(Solver, MaximiseUnderUpperBound) {
  GPProblem p;
  const VarId x = p.add_variable("x");
  p.maximize(Monomial::variable(x));
  p.add_leq(Monomial::variable(x), "cap");
  const auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(s.value(x), 1.0, 1e-5);
  EXPECT_NEAR(s.objective_value, 1.0, 1e-5);
}

TEST(Solver, SymmetricMinimum) {
  GPProblem p;
  const VarId x = p.add_variable("x");
  const VarId y = p.add_variable("y");
  p.minimize(Posynomial(Monomial::variable(x)) + Monomial::variable(y));
  p.add_leq(Monomial(1.0, {{x, -1.0}, {y, -1.0}}), "area");
  const auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  EXPECT_NEAR(s.objective_value, 2.0, 1e-5);
  EXPECT_NEAR(s.value(x), 1.0, 1e-3);
  EXPECT_NEAR(s.value(y), 1.0, 1e-3);
  EXPECT_LE(s.duality_gap, 1e-6);
}

TEST(Solver, MonomialEquality) {
  GPProblem p;
  const VarId x = p.add_variable("x", 0.01, 100.0);
  const VarId y = p.add_variable("y", 0.01, 100.0);
  p.minimize(Posynomial(Monomial::variable(x)) + Monomial(2.0, {{y, 1.0}}));
  p.add_eq(Monomial(0.25, {{x, 1.0}, {y, 1.0}}), "xy=4");
  const auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  // x = 2y, xy = 4 gives x = 2 sqrt 2, objective 4 sqrt 2.
  EXPECT_NEAR(s.objective_value, 4.0 * std::sqrt(2.0), 1e-5);
  EXPECT_NEAR(s.value(x) * s.value(y), 4.0, 1e-6);
}

TEST(Solver, RandomProblemsAgainstGridSearch) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = fdiab::oracle::random_gp(rng, 3, 5);
    const auto s = solve(p);
    ASSERT_EQ(s.status, SolveStatus::optimal) << trial;
    const double grid = fdiab::oracle::grid_search(p);
    // The grid point is feasible, so the optimum can only be lower.
    EXPECT_LE(s.objective_value, grid * (1.0 + 1e-6)) << trial;
    EXPECT_GE(s.objective_value, grid * (1.0 - 5e-3)) << trial;
    EXPECT_LE(max_violation(p, s.values).first, 1e-6);
  }
}

TEST(Solver, DetectsInfeasibility) {
  GPProblem p;
  const VarId x = p.add_variable("x");
  p.maximize(Monomial::variable(x));
  p.add_leq(Monomial::variable(x), "x<=1");
  p.add_leq(Monomial(2.0, {{x, -1.0}}), "x>=2");
  const auto s = solve(p);
  EXPECT_EQ(s.status, SolveStatus::infeasible);
  EXPECT_FALSE(s.violated.empty());
  EXPECT_GT(s.max_violation, 0.1);
}

TEST(Solver, ContradictoryEqualities) {
  GPProblem p;
  const VarId x = p.add_variable("x");
  p.minimize(Monomial::variable(x));
  p.add_eq(Monomial::variable(x), "x=1");
  p.add_eq(Monomial(0.5, {{x, 1.0}}), "x=2");
  EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
}

TEST(Solver, UnboundedRaises) {
  GPProblem p;
  const VarId x = p.add_variable("x");
  p.maximize(Monomial::variable(x));
  p.add_leq(Monomial(1.0, {{x, -1.0}}), "x>=1");
  EXPECT_THROW(solve(p), NumericRangeError);
}

TEST(Solver, ConvexPathMatchesGpPath) {
  std::mt19937_64 rng(4);
  const auto p = fdiab::oracle::random_gp(rng, 3, 4);
  const auto g = solve(p);
  const auto c = solve_convex(log_transform(p));
  ASSERT_EQ(c.status, SolveStatus::optimal);
  for (int v = 0; v < 3; ++v) EXPECT_NEAR(std::log(g.value(v)), c.y(v), 1e-12);
  EXPECT_NEAR(std::exp(c.objective), g.objective_value, 1e-9 * g.objective_value);
}

TEST(Solver, DumpedProblemSolvesIdentically) {
  std::mt19937_64 rng(6);
  const auto p = fdiab::oracle::random_gp(rng, 4, 6);
  const auto a = solve(p);
  const auto b = solve(parse_problem(dump_problem(p)));
  ASSERT_EQ(a.status, b.status);
  EXPECT_EQ(a.values, b.values);
}

TEST(Solver, SmallProblemsAreFast) {
  std::mt19937_64 rng(8);
  const auto p = fdiab::oracle::random_gp(rng, 4, 6);
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = solve(p);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(s.status, SolveStatus::optimal);
  EXPECT_LT(secs, 1.0);
}

TEST(Solver, StatusNames) {
  EXPECT_EQ(to_string(SolveStatus::optimal), "optimal");
  EXPECT_EQ(to_string(SolveStatus::infeasible), "infeasible");
  EXPECT_EQ(to_string(SolveStatus::max_iter), "max_iter");
}

TEST(MaxViolation, IndependentOfSolver) {
  GPProblem p;
  const VarId x = p.add_variable("x", 0.5, 2.0);
  p.minimize(Monomial::variable(x));
  p.add_leq(Monomial(0.25, {{x, 1.0}}), "quarter");
  auto [v, label] = max_violation(p, std::vector<double>{8.0});
  EXPECT_DOUBLE_EQ(v, 3.0);
  EXPECT_EQ(label, "x upper bound");
  std::tie(v, label) = max_violation(p, std::vector<double>{1.0});
  EXPECT_LT(v, 0.0);
}
