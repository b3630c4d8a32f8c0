#include <cmath>

#include "doctest.h"

#include "conecover/generating.hpp"
#include "conecover/generators.hpp"
#include "conecover/walk.hpp"
#include "test_helpers.hpp"

using namespace conecover;
using cctest::entropy_example;
using cctest::recurrent_example;

TEST_CASE("single-step law from the root") {
  auto g = entropy_example();
  // one step: loop w.p. 1/3, child i1 w.p. 1/3, child i2 w.p. 1/3
  const int runs = 40000;
  int loops = 0, to_i1 = 0, to_i2 = 0;
  for (int r = 0; r < runs; ++r) {
    SimulateOptions opt;
    opt.n_steps = 1;
    opt.seed = 5;
    opt.stream = static_cast<std::uint64_t>(r);
    opt.record_windows = false;
    WalkRun run = simulate(*g, opt);
    REQUIRE(run.final_height <= 1);
    REQUIRE(run.final_height >= 0);
    CHECK(run.visited_loop == (run.final_height == 0));
    if (run.final_height == 0) {
      ++loops;
    } else if (g->label(run.final_label) == "i1") {
      ++to_i1;
    } else {
      ++to_i2;
    }
  }
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / runs);
  CHECK(std::fabs(loops / double(runs) - 1.0 / 3.0) < 3.0 * sigma);
  CHECK(std::fabs(to_i1 / double(runs) - 1.0 / 3.0) < 3.0 * sigma);
  CHECK(std::fabs(to_i2 / double(runs) - 1.0 / 3.0) < 3.0 * sigma);
}

TEST_CASE("biased-walk drift on the homogeneous tree") {
  auto g = make_homogeneous_tree(2, 0.25);
  SimulateOptions opt;
  opt.n_steps = 1000000;
  opt.seed = 11;
  opt.record_windows = false;
  WalkRun run = simulate(*g, opt);
  // drift 1 - 2 beta = 0.5
  CHECK(std::fabs(run.final_height / 1e6 - 0.5) < 0.02);
  CHECK(run.max_height >= run.final_height);
}

TEST_CASE("height increments are in {-1,0,+1} with 0 only at the root") {
  auto g = entropy_example();
  SimulateOptions opt;
  opt.n_steps = 20000;
  opt.seed = 3;
  opt.record_trajectory = true;
  WalkRun run = simulate(*g, opt);
  std::int64_t prev = 0;
  for (const TrajectoryStep& s : run.trajectory) {
    const std::int64_t d = s.height - prev;
    CHECK(d >= -1);
    CHECK(d <= 1);
    if (d == 0) {
      CHECK(s.height == 0);
      CHECK(s.loop);
    } else {
      CHECK_FALSE(s.loop);
    }
    prev = s.height;
  }
}

TEST_CASE("runs are bitwise deterministic in (seed, stream)") {
  auto g = entropy_example();
  SimulateOptions opt;
  opt.n_steps = 50000;
  opt.seed = 77;
  opt.weights.push_back(unit_weight());
  WalkRun a = simulate(*g, opt);
  WalkRun b = simulate(*g, opt);
  CHECK(a.final_height == b.final_height);
  CHECK(a.returns_to_root == b.returns_to_root);
  CHECK(a.loop_traversals == b.loop_traversals);
  CHECK(a.l_final[0] == b.l_final[0]);
  CHECK(a.l_final[0] == static_cast<double>(a.final_height));  // w == 1
  auto ea = extract_exits(a, MarginPolicy{});
  auto eb = extract_exits(b, MarginPolicy{});
  REQUIRE(ea.size() == eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].e_k == eb[i].e_k);
    CHECK(ea[i].label == eb[i].label);
  }
  opt.seed = 78;
  WalkRun c = simulate(*g, opt);
  CHECK(a.final_height != c.final_height);  // different seed, different path
}

TEST_CASE("hand-checked exit records") {
  // heights 0,1,2,3,...: windows open at t = k, never close
  WalkRun monotone;
  monotone.n_steps = 1000;
  monotone.windows.resize(1000);
  for (std::int64_t k = 1; k <= 1000; ++k)
    monotone.windows[static_cast<std::size_t>(k - 1)].push_back(LevelWindow{k, 1000, 0});
  auto recs = extract_exits(monotone, MarginPolicy{});
  REQUIRE_FALSE(recs.empty());
  for (const auto& r : recs) CHECK(r.e_k == r.k);
  // emitted exactly while k + margin(k) <= horizon
  const MarginPolicy m{};
  for (std::int64_t k = 1; k <= 1000; ++k) {
    const bool expect = 1000 - k >= m.steps(k);
    const bool have = static_cast<std::size_t>(k) <= recs.size();
    CHECK(expect == have);
  }

  // heights 0,1,0,1,2,3,...: e_1 = 3 because the first level-1 window closes
  WalkRun dip;
  dip.n_steps = 1000;
  dip.windows.resize(997);
  dip.windows[0].push_back(LevelWindow{1, 2, 0});
  dip.windows[0].push_back(LevelWindow{3, 1000, 0});
  for (std::int64_t k = 2; k <= 997; ++k)
    dip.windows[static_cast<std::size_t>(k - 1)].push_back(LevelWindow{k + 2, 1000, 0});
  auto recs2 = extract_exits(dip, MarginPolicy{});
  REQUIRE(recs2.size() >= 2);
  CHECK(recs2[0].k == 1);
  CHECK(recs2[0].e_k == 3);
  CHECK(recs2[1].e_k == 4);
}

TEST_CASE("exit records are prefix-stable under horizon extension") {
  auto g = entropy_example();
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SimulateOptions a;
    a.n_steps = 2000;
    a.seed = seed;
    SimulateOptions b = a;
    b.n_steps = 10000;
    auto ra = extract_exits(simulate(*g, a), MarginPolicy{});
    auto rb = extract_exits(simulate(*g, b), MarginPolicy{});
    REQUIRE(ra.size() <= rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].e_k == rb[i].e_k);
      CHECK(ra[i].k == rb[i].k);
      CHECK(ra[i].label == rb[i].label);
    }
  }
}

TEST_CASE("mean exit-time increment approaches Lambda on the homogeneous tree") {
  auto g = make_homogeneous_tree(2, 0.25);
  SimulateOptions opt;
  opt.n_steps = 1000000;
  opt.seed = 21;
  WalkRun run = simulate(*g, opt);
  auto recs = extract_exits(run, MarginPolicy{});
  REQUIRE(recs.size() > 1000);
  double mean = 0;
  for (const auto& r : recs) mean += static_cast<double>(r.e_k) / static_cast<double>(r.k);
  mean /= static_cast<double>(recs.size());
  CHECK(std::fabs(mean - 2.0) < 0.1);  // Lambda = 1/(1-2 beta) = 2, within 5%
}

TEST_CASE("empirical recurrence evidence separates the regimes") {
  auto rec = recurrent_example();
  RecurrenceEvidence r1 = empirical_recurrence(*rec, 2000, 400, 9);
  RecurrenceEvidence r2 = empirical_recurrence(*rec, 20000, 400, 9);
  CHECK(r1.escape_quarter_fraction == 0.0);
  CHECK(r2.returns_mean > 5.0 * r1.returns_mean);  // returns grow with horizon
  CHECK(r1.q_walk_hat > 0.999);                    // recurrent: loop visited a.s.
  CHECK(r1.no_return_fraction < 0.01);

  // critical p(-i) = 1/2: null recurrent, escape decays, returns grow
  auto crit = make_homogeneous_tree(2, 0.5);
  RecurrenceEvidence c1 = empirical_recurrence(*crit, 2000, 400, 9);
  RecurrenceEvidence c2 = empirical_recurrence(*crit, 32000, 400, 9);
  CHECK(c2.returns_mean > 2.0 * c1.returns_mean);
  CHECK(c2.escape_quarter_fraction < 0.02);
  CHECK(c2.no_return_fraction < c1.no_return_fraction + 0.02);

  // critical halfline: transient, so never returning has positive probability
  auto half = make_halfline_critical();
  RecurrenceEvidence h = empirical_recurrence(*half, 20000, 400, 9);
  CHECK(h.no_return_fraction > 0.2);
  CHECK(h.q_walk_hat < 0.8);
}

TEST_CASE("entropy/speed estimator on the homogeneous tree") {
  auto g = make_homogeneous_tree(2, 0.25);
  GfSolution sol = analyze(*g, AnalyzeOptions{});
  EntropySpeedOptions opt;
  opt.runs = 2000;
  opt.horizon = 5000;
  opt.seed = 13;
  opt.weights.push_back(unit_weight());
  opt.model = make_exit_chain_model(*g, sol);
  EntropySpeedEstimate est = empirical_entropy_speed(*g, opt);
  CHECK(est.escape_fraction > 0.99);
  CHECK(std::fabs(est.ell0_hat - 0.5) <= 3.0 * est.ell0_se + 1e-3);
  CHECK(std::fabs(est.h_hat - 0.5 * std::log(2.0)) <= 3.0 * est.h_se + 1e-3);
  CHECK(std::fabs(est.lambda_hat - 2.0) <= 3.0 * est.lambda_se + 1e-2);
  CHECK(est.ellw_hat[0] == est.ell0_hat);  // unit weight is the height
  CHECK(est.q_source == "analytic");

  // plug-in fallback stays close to the analytic-q estimate
  opt.model.reset();
  EntropySpeedEstimate plug = empirical_entropy_speed(*g, opt);
  CHECK(plug.q_source == "plugin");
  CHECK(std::fabs(plug.h_hat - est.h_hat) < 0.01);
}

TEST_CASE("the transience guard rejects recurrent walks") {
  auto rec = recurrent_example();
  EntropySpeedOptions opt;
  opt.runs = 50;
  opt.horizon = 2000;
  opt.seed = 4;
  CHECK_THROWS_AS(empirical_entropy_speed(*rec, opt), NotTransientEnough);
}

TEST_CASE("two-sided line: two speed clusters") {
  auto g = make_two_sided_line(0.7, 0.8, 0.1, 0.2);
  int n_pos = 0, n_neg = 0;
  double mean_pos = 0, mean_neg = 0;
  for (int r = 0; r < 24; ++r) {
    SimulateOptions opt;
    opt.n_steps = 100000;
    opt.seed = 31;
    opt.stream = static_cast<std::uint64_t>(r);
    opt.record_windows = false;
    WalkRun run = simulate(*g, opt);
    const double speed = run.final_height / 1e5;
    if (run.final_label > 0) {
      ++n_pos;
      mean_pos += speed;
    } else {
      ++n_neg;
      mean_neg += speed;
    }
  }
  REQUIRE(n_pos > 0);
  REQUIRE(n_neg > 0);
  CHECK(std::fabs(mean_pos / n_pos - 0.8) < 0.05);
  CHECK(std::fabs(mean_neg / n_neg - 0.6) < 0.05);
}
