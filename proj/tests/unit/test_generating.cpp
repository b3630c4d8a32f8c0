#include <array>
#include <cmath>

#include "doctest.h"

#include "conecover/generating.hpp"
#include "conecover/generators.hpp"
#include "test_helpers.hpp"

using namespace conecover;
using cctest::entropy_example;
using cctest::recurrent_example;
namespace oracle = cctest::oracle;

namespace {

// Independent oracle for the entropy example: Newton's method in long double
// on the explicit 3-equation system, nothing shared with solve_F.
std::array<long double, 3> newton_entropy_F() {
  const long double pb[3] = {1.0L / 3.0L, 0.5L, 0.25L};
  std::array<long double, 3> F{0.5L, 0.5L, 0.5L};
  for (int it = 0; it < 200; ++it) {
    // residuals
    const long double r0 = pb[0] + (F[1] + F[2]) / 3.0L * F[0] - F[0];
    const long double r1 = pb[1] + 0.5L * F[0] * F[1] - F[1];
    const long double r2 = pb[2] + 0.75L * F[1] * F[2] - F[2];
    // Jacobian of the residual map
    long double J[3][3] = {
        {(F[1] + F[2]) / 3.0L - 1.0L, F[0] / 3.0L, F[0] / 3.0L},
        {0.5L * F[1], 0.5L * F[0] - 1.0L, 0.0L},
        {0.0L, 0.75L * F[2], 0.75L * F[1] - 1.0L}};
    long double b[3] = {-r0, -r1, -r2};
    // tiny Gaussian elimination
    for (int c = 0; c < 3; ++c) {
      int p = c;
      for (int r = c + 1; r < 3; ++r)
        if (std::fabs((double)J[r][c]) > std::fabs((double)J[p][c])) p = r;
      for (int k = 0; k < 3; ++k) std::swap(J[p][k], J[c][k]);
      std::swap(b[p], b[c]);
      for (int r = c + 1; r < 3; ++r) {
        const long double f = J[r][c] / J[c][c];
        for (int k = c; k < 3; ++k) J[r][k] -= f * J[c][k];
        b[r] -= f * b[c];
      }
    }
    long double dx[3];
    for (int r = 2; r >= 0; --r) {
      long double s = b[r];
      for (int k = r + 1; k < 3; ++k) s -= J[r][k] * dx[k];
      dx[r] = s / J[r][r];
    }
    for (int k = 0; k < 3; ++k) F[static_cast<std::size_t>(k)] += dx[k];
  }
  return F;
}

}  // namespace

TEST_CASE("solve_F reproduces the frozen entropy-example solution") {
  auto g = entropy_example();
  FirstPassageSystem sys = whole_graph_system(*g);
  FSolve f = solve_F(sys, 1e-15, 500000);
  REQUIRE(f.converged);
  CHECK(f.residual < 1e-12);
  CHECK(f.F[0] == doctest::Approx(oracle::F0).epsilon(1e-12));
  CHECK(f.F[1] == doctest::Approx(oracle::F1).epsilon(1e-12));
  CHECK(f.F[2] == doctest::Approx(oracle::F2).epsilon(1e-12));

  const auto newton = newton_entropy_F();
  CHECK(f.F[0] == doctest::Approx(static_cast<double>(newton[0])).epsilon(1e-13));
  CHECK(f.F[1] == doctest::Approx(static_cast<double>(newton[1])).epsilon(1e-13));
  CHECK(f.F[2] == doctest::Approx(static_cast<double>(newton[2])).epsilon(1e-13));

  CHECK(return_probability(sys, f.F) == doctest::Approx(oracle::U_root).epsilon(1e-12));
  CHECK(classify_analytic(sys, f) == AnalyticClass::transient);
}

TEST_CASE("homogeneous tree closed forms for F") {
  for (double beta : {0.1, 0.25, 0.4}) {
    auto g = make_homogeneous_tree(2, beta);
    FSolve f = solve_F(whole_graph_system(*g), 1e-15, 500000);
    REQUIRE(f.converged);
    CHECK(f.F[0] == doctest::Approx(beta / (1.0 - beta)).epsilon(1e-12));
  }
  // beta >= 1/2: the minimal solution is the all-ones fixed point
  auto half = make_homogeneous_tree(2, 0.5);
  FirstPassageSystem sys = whole_graph_system(*half);
  FSolve f = solve_F(sys, 1e-13, 4000000);
  CHECK(f.F[0] > 1.0 - 1e-5);
  CHECK(classify_analytic(sys, f) == AnalyticClass::recurrent_or_critical);

  auto rec = make_homogeneous_tree(2, 0.6);
  FSolve fr = solve_F(whole_graph_system(*rec), 1e-15, 500000);
  REQUIRE(fr.converged);
  CHECK(fr.F[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all p(-i) = 1/2 gives F = 1 on any finite base") {
  std::vector<FiniteGraph::Row> rows(2);
  rows[0] = {"a", 0.5, {{1, 0.3}, {0, 0.2}}};
  rows[1] = {"b", 0.5, {{0, 0.5}}};
  FiniteGraph g(std::move(rows), 0, 1e-6, "test:critical");
  FSolve f = solve_F(whole_graph_system(g), 1e-12, 8000000);
  CHECK(f.F[0] > 1.0 - 1e-4);
  CHECK(f.F[1] > 1.0 - 1e-4);
}

TEST_CASE("F iterates increase monotonically to the minimal solution") {
  auto g = entropy_example();
  FirstPassageSystem sys = whole_graph_system(*g);
  std::vector<double> prev(3, -1.0);
  for (std::int64_t iters : {1, 2, 4, 8, 16, 32, 64}) {
    FSolve f = solve_F(sys, 0.0, iters);  // run exactly `iters` sweeps
    for (int i = 0; i < 3; ++i) {
      CHECK(f.F[static_cast<std::size_t>(i)] >= prev[static_cast<std::size_t>(i)] - 1e-15);
      CHECK(f.F[static_cast<std::size_t>(i)] <= 1.0);
      prev[static_cast<std::size_t>(i)] = f.F[static_cast<std::size_t>(i)];
    }
  }
  CHECK(prev[0] <= oracle::F0 + 1e-12);
  CHECK(prev[1] <= oracle::F1 + 1e-12);
  CHECK(prev[2] <= oracle::F2 + 1e-12);
}

TEST_CASE("solve_Fprime closed form and frozen values") {
  auto g = make_homogeneous_tree(2, 0.25);
  FirstPassageSystem sys = whole_graph_system(*g);
  FSolve f = solve_F(sys, 1e-15, 500000);
  FprimeResult fp = solve_Fprime(sys, f.F);
  REQUIRE(fp.finite);
  CHECK(fp.Fp[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-11));  // beta/((1-beta)(1-2beta))
  CHECK(fp.Fp[0] / f.F[0] == doctest::Approx(2.0).epsilon(1e-11));

  auto e = entropy_example();
  FirstPassageSystem esys = whole_graph_system(*e);
  FSolve ef = solve_F(esys, 1e-15, 500000);
  FprimeResult efp = solve_Fprime(esys, ef.F);
  REQUIRE(efp.finite);
  CHECK(efp.Fp[0] == doctest::Approx(oracle::Fp0).epsilon(1e-10));
  CHECK(efp.Fp[1] == doctest::Approx(oracle::Fp1).epsilon(1e-10));
  CHECK(efp.Fp[2] == doctest::Approx(oracle::Fp2).epsilon(1e-10));
}

TEST_CASE("divergent derivative systems are flagged, not solved") {
  // artificial F far above the minimal solution makes (I - B) lose
  // positivity: the solver must flag the Lambda = infinity regime
  FirstPassageSystem sys;
  sys.vids = {0};
  sys.labels = {"x"};
  sys.p_back = {0.01};
  sys.fwd = {{{0, 0.99}}};
  sys.boundary_p = {{}};
  FprimeResult fp = solve_Fprime(sys, {0.999});
  CHECK_FALSE(fp.finite);
}

TEST_CASE("exit chain of the homogeneous tree and the entropy example") {
  auto g = make_homogeneous_tree(2, 0.25);
  FirstPassageSystem sys = whole_graph_system(*g);
  FSolve f = solve_F(sys, 1e-15, 500000);
  ExitChain chain = build_exit_chain(sys, f.F);
  CHECK(chain.Gbar[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(chain.Q[0][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chain.Q[0][1] == doctest::Approx(0.5).epsilon(1e-12));

  auto e = entropy_example();
  FirstPassageSystem esys = whole_graph_system(*e);
  FSolve ef = solve_F(esys, 1e-15, 500000);
  ExitChain echain = build_exit_chain(esys, ef.F);
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0;
    for (double v : echain.Q[i]) row += v;
    CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
    // F(-i) = Gbar_i(1) p(-i)
    CHECK(ef.F[i] == doctest::Approx(echain.Gbar[i] * esys.p_back[i]).epsilon(1e-10));
  }
  CHECK(echain.Q[0][1] == doctest::Approx(oracle::q01).epsilon(1e-11));
  CHECK(echain.Q[0][2] == doctest::Approx(oracle::q02).epsilon(1e-11));
  CHECK(echain.Q[1][0] == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(echain.Q[2][1] == doctest::Approx(1.0).epsilon(1e-11));

  // recurrent types are rejected
  auto rec = make_homogeneous_tree(2, 0.6);
  FirstPassageSystem rsys = whole_graph_system(*rec);
  FSolve rf = solve_F(rsys, 1e-15, 500000);
  CHECK_THROWS_AS(build_exit_chain(rsys, rf.F), RecurrentType);
}

TEST_CASE("stationary distributions") {
  CHECK(stationary({{1.0}}, {"only"})[0] == doctest::Approx(1.0));

  // doubly stochastic: uniform
  std::vector<std::vector<double>> ds{{0.2, 0.5, 0.3}, {0.5, 0.3, 0.2}, {0.3, 0.2, 0.5}};
  std::vector<double> nu = stationary(ds, {"a", "b", "c"});
  for (double v : nu) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // reducible chains are rejected with the unreachable part listed
  std::vector<std::vector<double>> red{{1.0, 0.0}, {0.5, 0.5}};
  try {
    stationary(red, {"a", "b"});
    FAIL("expected Reducible");
  } catch (const Reducible& e) {
    REQUIRE(e.component.size() == 1);
    CHECK(e.component[0] == "b");
  }
}

TEST_CASE("analyze bundles the entropy example to the frozen oracle") {
  auto g = entropy_example();
  AnalyzeOptions opt;
  opt.tol = 1e-15;
  opt.max_iter = 500000;
  opt.weights.push_back(unit_weight());
  GfSolution sol = analyze(*g, opt);
  CHECK(sol.verdict == AnalyticClass::transient);
  REQUIRE(sol.lambda_finite);
  CHECK(sol.nu[0] == doctest::Approx(oracle::nu0).epsilon(1e-11));
  CHECK(sol.nu[2] == doctest::Approx(oracle::nu2).epsilon(1e-11));
  CHECK(sol.Lambda == doctest::Approx(oracle::Lambda).epsilon(1e-11));
  CHECK(sol.ell0 == doctest::Approx(oracle::ell0).epsilon(1e-11));
  CHECK(sol.hq == doctest::Approx(oracle::hQ).epsilon(1e-11));
  CHECK(sol.h == doctest::Approx(oracle::h).epsilon(1e-11));
  CHECK(std::fabs(sol.h - oracle::paper_h) < 1e-4);
  CHECK(sol.dim_lower == sol.dim_point);
  CHECK(sol.dim_point == doctest::Approx(sol.h / sol.ell0).epsilon(1e-12));
  CHECK(sol.dim_upper == doctest::Approx(-std::log(0.25) / sol.ell0).epsilon(1e-12));
  CHECK(sol.dim_lower <= sol.dim_upper);
  CHECK(sol.eps0 == doctest::Approx(0.25));
  // w == 1 collapses to the natural distance rate
  REQUIRE(sol.ell_w.size() == 1);
  CHECK(sol.ell_w[0].value == doctest::Approx(sol.ell0).epsilon(1e-12));
  // stationary cross-checks
  CHECK(sol.stationary_residual < 1e-12);
}

TEST_CASE("analyze: homogeneous tree closed forms") {
  for (double beta : {0.1, 0.25, 0.4}) {
    auto g = make_homogeneous_tree(2, beta);
    AnalyzeOptions opt;
    opt.tol = 1e-15;
    opt.max_iter = 1000000;
    GfSolution sol = analyze(*g, opt);
    REQUIRE(sol.verdict == AnalyticClass::transient);
    CHECK(sol.Lambda == doctest::Approx(1.0 / (1.0 - 2.0 * beta)).epsilon(1e-9));
    CHECK(sol.ell0 == doctest::Approx(1.0 - 2.0 * beta).epsilon(1e-9));
    CHECK(sol.h == doctest::Approx((1.0 - 2.0 * beta) * std::log(2.0)).epsilon(1e-9));
    CHECK(sol.dim_point == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("weight scaling is exactly linear") {
  auto g = entropy_example();
  AnalyzeOptions opt;
  opt.weights.push_back(unit_weight());
  WeightFunction w3{"w3", 3.0, [](const BaseGraph&, Vid, Vid) { return 3.0; }};
  opt.weights.push_back(w3);
  GfSolution sol = analyze(*g, opt);
  CHECK(sol.ell_w[1].value == doctest::Approx(3.0 * sol.ell_w[0].value).epsilon(1e-14));
}

TEST_CASE("recurrent graphs report no rate of escape") {
  auto rec = recurrent_example();
  GfSolution sol = analyze(*rec, AnalyzeOptions{});
  CHECK(sol.verdict == AnalyticClass::recurrent_or_critical);
  CHECK(sol.ell0 == 0.0);
  CHECK(sol.spectral_attachment == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("analyze requires a radius on infinite graphs") {
  auto g = make_halfline_critical();
  CHECK_THROWS_AS(analyze(*g, AnalyzeOptions{}), TruncationRequired);
}

TEST_CASE("halfline truncation brackets stay open at criticality") {
  auto g = make_halfline_critical();
  AnalyzeOptions opt;
  opt.structural_check = true;
  GfBracket bracket = analyze_truncated(*g, 200, opt);
  CHECK_FALSE(bracket.agree);
  CHECK(bracket.positive_recurrence_unverified);
  // frozen truncation values (radius 200), from the independent 30-digit run
  CHECK(bracket.lower.F[0] == doctest::Approx(0.433428879605).epsilon(1e-6));
  CHECK(bracket.upper.F[0] == doctest::Approx(0.883475827896).epsilon(1e-6));
  CHECK(bracket.max_gap > 0.1);
  // equal-depth vertices of the halfline have different p(-i)
  REQUIRE(bracket.structural_check_passed.has_value());
  CHECK_FALSE(*bracket.structural_check_passed);

  // a homogeneous environment passes the structural check
  auto line = make_rwdcre(1, {0.6}, {1.0}, {0.3}, {1.0});
  GfBracket hb = analyze_truncated(*line, 24, opt);
  REQUIRE(hb.structural_check_passed.has_value());
  CHECK(*hb.structural_check_passed);
}

TEST_CASE("exit-chain model exposes analytic q to the estimators") {
  auto g = entropy_example();
  GfSolution sol = analyze(*g, AnalyzeOptions{});
  ExitChainModel model = make_exit_chain_model(*g, sol);
  const Vid i0 = *g->resolve("i0"), i1 = *g->resolve("i1"), i2 = *g->resolve("i2");
  CHECK(model.q(i0, i1) == doctest::Approx(oracle::q01).epsilon(1e-9));
  CHECK(model.q(i0, i2) == doctest::Approx(oracle::q02).epsilon(1e-9));
  CHECK(model.q(i1, i0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(analytic_loop_probability(sol, *g) == doctest::Approx(oracle::F0).epsilon(1e-9));
}
