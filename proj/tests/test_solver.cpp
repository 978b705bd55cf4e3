#include <doctest.h>

#include <algorithm>
#include <random>

#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/solver.hpp"
#include "test_support.hpp"

using namespace cpdgrid;
using namespace cpdgrid::testing;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v(i++) = value;
  return v;
}

const ConductanceMatrix& case_g() {
  static const auto g = build_conductance_matrix(case_study(0, 0, 0));
  return g;
}

}  // namespace

TEST_CASE("passivity precheck") {
  CHECK(feasibility_precheck(vec({-3000, 6600, -3000})) == Feasibility::Feasible);
  CHECK(feasibility_precheck(vec({-100, -50, -25})) == Feasibility::InfeasibleNegativeLosses);
  CHECK(feasibility_precheck(vec({1, -1})) == Feasibility::Feasible);

  const auto r = solve_operating_point(case_g(), vec({-100, -50, -25}));
  CHECK(r.status == SolveStatus::InfeasibleNegativeLosses);
  CHECK(r.points.empty());
  CHECK(r.starts.empty());
}

TEST_CASE("case study with the generator at node 3 reproduces the reference voltages") {
  const auto r = solve_operating_point(case_g(), vec({-3000, -3000, 6600}));
  REQUIRE(r.status == SolveStatus::Converged);
  REQUIRE(r.points.size() == 1);
  const auto& pt = r.points[0];
  CHECK(pt.v(0) == doctest::Approx(201.4).epsilon(0.1 / 201.4));
  CHECK(pt.v(1) == doctest::Approx(205.2).epsilon(0.1 / 205.2));
  CHECK(pt.v(2) == doctest::Approx(223.6).epsilon(0.1 / 223.6));
  CHECK(pt.v0 == doctest::Approx(210.1).epsilon(0.1 / 210.1));
  CHECK(pt.residual_norm <= r.tol_watts);
}

TEST_CASE("case study as stated: generator at node 2") {
  const auto r = solve_operating_point(case_g(), vec({-3000, 6600, -3000}));
  REQUIRE(r.status == SolveStatus::Converged);
  REQUIRE(r.points.size() == 1);
  const auto& v = r.points[0].v;
  CHECK(v(0) == doctest::Approx(173.205).epsilon(1e-5));
  CHECK(v(1) == doctest::Approx(190.526).epsilon(1e-5));
  CHECK(v(2) == doctest::Approx(v(0)).epsilon(1e-12));
  // Oracle: the residual itself, evaluated independently.
  const Vector gv = case_g().values() * v;
  CHECK((v.cwiseProduct(gv) - vec({-3000, 6600, -3000})).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("two-port Newton solution agrees with the closed form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> g_dist(0.2, 5.0), p_dist(-10.0, 10.0);
  int checked = 0;
  while (checked < 40) {
    const double g = g_dist(rng), p1 = p_dist(rng), p2 = p_dist(rng);
    const auto closed = two_port_solve(g, p1, p2);
    if (closed.status != TwoPortStatus::HighVoltageSolution) continue;
    const auto r = solve_operating_point(build_conductance_matrix(two_port(g, p1, p2)),
                                         vec({p1, p2}));
    REQUIRE(r.status == SolveStatus::Converged);
    CHECK(rel_diff(r.points.front().v, closed.point.v) < 1e-8);
    ++checked;
  }
}

TEST_CASE("two-port closed-form examples") {
  const auto r = two_port_solve(1.0, 1.0, -0.8);
  REQUIRE(r.status == TwoPortStatus::HighVoltageSolution);
  CHECK(r.p_par == doctest::Approx(0.2));
  CHECK(r.perp_l1 == doctest::Approx(1.8));
  CHECK(r.point.v0 == doctest::Approx(2.01246).epsilon(1e-5));
  CHECK(r.point.v(0) > r.point.v(1));
  const Vector res = residual_full(build_conductance_matrix(two_port(1, 1, -0.8)),
                                   vec({1, -0.8}), r.point.v);
  CHECK(res.lpNorm<Eigen::Infinity>() < 1e-12);

  const auto neg = two_port_solve(1.0, -1.0, -1.0 + 1e-3);
  CHECK(neg.status == TwoPortStatus::NoHighVoltageSolution);
  CHECK_FALSE(neg.violated.empty());
  CHECK(two_port_solve(1.0, 1.0, 0.5).status == TwoPortStatus::NoHighVoltageSolution);
  CHECK(two_port_solve(1.0, 5.0, -1.0).status == TwoPortStatus::HighVoltageSolution);

  CHECK_THROWS_AS(two_port_solve(0.0, 1.0, -0.8), Error);
  try {
    (void)two_port_solve(1.0, 5.0, 5.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EqualPowers);
  }
}

TEST_CASE("zero injections give the uniform family") {
  const auto r = solve_operating_point(case_g(), Vector::Zero(3));
  CHECK(r.status == SolveStatus::DegenerateUniformFamily);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].v == Vector::Ones(3));
}

TEST_CASE("newton step behavior") {
  const Vector p = vec({-3000, 6600, -3000});
  const auto solved = solve_operating_point(case_g(), p).points.at(0).v;

  SUBCASE("a solution is a fixed point") {
    const auto step = newton_step(case_g(), p, solved);
    CHECK(step.residual_before < 1e-6);
    CHECK((step.v_next - solved).norm() < 1e-8);
  }
  SUBCASE("quadratic convergence near a solution") {
    Vector v = solved + vec({2.0, -1.0, 1.5});
    std::vector<double> residuals;
    for (int k = 0; k < 5; ++k) {
      const auto step = newton_step(case_g(), p, v);
      CHECK(step.alpha == 1.0);
      residuals.push_back(step.residual_before);
      v = step.v_next;
    }
    // Once in the asymptotic regime the residual is squared per step.
    CHECK(residuals[3] < 1e-3 * residuals[2]);
    CHECK(residuals[3] < 1e-3 * residuals[2] * residuals[2]);
    CHECK(residuals[4] < std::max(1e-9, 1e2 * residuals[3] * residuals[3]));
  }
  SUBCASE("the Jacobian vanishes at V = 0") {
    try {
      (void)newton_step(case_g(), p, Vector::Zero(3));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::JacobianSingular);
    }
  }
}

TEST_CASE("solutions are sorted, deduplicated and have positive mean") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 6;
    const auto g = build_conductance_matrix(random_network(rng, n));
    Vector p = random_vector(rng, n, -10, 10);
    p.array() += (0.05 * p.norm() - p.sum()) / n;
    const auto r = solve_operating_point(g, p);
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      const auto& pt = r.points[k];
      CHECK(pt.v0 > 0);
      CHECK(pt.residual_norm <= r.tol_watts);
      CHECK(std::abs(pt.x.sum()) < 1e-9);
      if (k > 0) {
        CHECK(r.points[k - 1].v0 >= pt.v0);
        CHECK(rel_diff(r.points[k - 1].v, pt.v) > 1e-6);
      }
    }
  }
}

TEST_CASE("permutation symmetry") {
  const Network net({"1", "2", "3"}, {{"1", "2", 1.0}, {"2", "3", 1.0}, {"1", "3", 0.5}}, {});
  const Network permuted({"3", "1", "2"}, {{"1", "2", 1.0}, {"2", "3", 1.0}, {"1", "3", 0.5}}, {});
  const auto a = solve_operating_point(build_conductance_matrix(net), vec({-3000, 6600, -3000}));
  const auto b =
      solve_operating_point(build_conductance_matrix(permuted), vec({-3000, -3000, 6600}));
  REQUIRE(a.points.size() == b.points.size());
  CHECK(a.points[0].v(0) == doctest::Approx(b.points[0].v(1)).epsilon(1e-10));
  CHECK(a.points[0].v(1) == doctest::Approx(b.points[0].v(2)).epsilon(1e-10));
  CHECK(a.points[0].v(2) == doctest::Approx(b.points[0].v(0)).epsilon(1e-10));
}

TEST_CASE("conductance scaling maps V to V / sqrt(c)") {
  const Vector p = vec({-3000, -3000, 6600});
  const auto a = solve_operating_point(case_g(), p);
  const auto b = solve_operating_point(case_g().scaled(4.0), p);
  REQUIRE(a.points.size() == 1);
  REQUIRE(b.points.size() == 1);
  CHECK(rel_diff(b.points[0].v, a.points[0].v / 2.0) < 1e-8);
}

TEST_CASE("multi-start determinism across thread counts") {
  std::mt19937_64 rng(99);
  const auto g = build_conductance_matrix(random_network(rng, 6));
  Vector p = random_vector(rng, 6, -5, 5);
  p.array() += (0.02 * p.norm() - p.sum()) / 6;
  SolverOptions one;
  one.seed = 5;
  SolverOptions many = one;
  many.threads = 4;
  const auto a = solve_operating_point(g, p, one);
  const auto b = solve_operating_point(g, p, many);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].v == b.points[k].v);

  const auto starts = starting_points(g, p, one);
  CHECK(starts.size() == static_cast<std::size_t>(one.n_starts));
  CHECK(starts == starting_points(g, p, one));
}

TEST_CASE("invalid options are rejected") {
  SolverOptions bad;
  bad.n_starts = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.max_iter = -1;
  CHECK_THROWS_AS(solve_operating_point(case_g(), vec({1, -0.5, 0}), bad), Error);
}

TEST_CASE("default tolerance") {
  CHECK(default_tolerance(vec({0.1, -0.2})) == doctest::Approx(1e-9));
  CHECK(default_tolerance(vec({-3000, 6600, -3000})) == doctest::Approx(6.6e-6));
}

TEST_CASE("equal two-port powers") {
  const auto loads = two_port_solve(1.0, -1.0, -1.0);
  CHECK(loads.status == TwoPortStatus::NoHighVoltageSolution);
  CHECK(loads.violated == "p_par / ||P_perp||_1 <= 0");
  CHECK(two_port_solve(1.0, 0.0, 0.0).status == TwoPortStatus::NoHighVoltageSolution);
  CHECK_THROWS_AS(two_port_solve(1.0, 2.0, 2.0), Error);
}
