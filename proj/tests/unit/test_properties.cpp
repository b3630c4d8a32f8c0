#include <cstdlib>
#include <numeric>

#include "doctest.h"

#include "conecover/generating.hpp"
#include "conecover/generators.hpp"
#include "conecover/report.hpp"
#include "conecover/rng.hpp"
#include "conecover/spectral.hpp"
#include "conecover/walk.hpp"
#include "test_helpers.hpp"

using namespace conecover;

namespace {

// Random strongly connected spec on <= 6 vertices: a directed ring plus
// random chords, random backward probabilities.
std::unique_ptr<FiniteGraph> random_spec(CounterRng& rng) {
  const int n = 2 + static_cast<int>(rng.next_u64() % 5);
  std::vector<FiniteGraph::Row> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)].name = "n" + std::to_string(i);
    const double pb = 0.15 + 0.7 * rng.next_u01();
    rows[static_cast<std::size_t>(i)].p_back = pb;
    std::vector<Vid> targets{(i + 1) % n};
    for (int extra = 0; extra < 2; ++extra) {
      const Vid t = static_cast<Vid>(rng.next_u64() % n);
      bool dup = false;
      for (Vid u : targets) dup = dup || u == t;
      if (!dup) targets.push_back(t);
    }
    for (Vid t : targets)
      rows[static_cast<std::size_t>(i)].edges.push_back(
          {t, (1.0 - pb) / static_cast<double>(targets.size())});
  }
  return std::make_unique<FiniteGraph>(std::move(rows), 0, 1e-6, "fuzz");
}

std::unique_ptr<FiniteGraph> permuted(const FiniteGraph& g, const std::vector<Vid>& perm) {
  // perm[old] = new index
  const std::int64_t n = g.vertex_count();
  std::vector<FiniteGraph::Row> rows(static_cast<std::size_t>(n));
  for (Vid v = 0; v < n; ++v) {
    const FiniteGraph::Row& r = g.row(v);
    FiniteGraph::Row nr;
    nr.name = r.name;
    nr.p_back = r.p_back;
    for (const OutEdge& e : r.edges) nr.edges.push_back({perm[static_cast<std::size_t>(e.to)], e.p});
    rows[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] = std::move(nr);
  }
  return std::make_unique<FiniteGraph>(std::move(rows), perm[static_cast<std::size_t>(g.root())],
                                       1e-6, "fuzz-perm");
}

}  // namespace

TEST_CASE("permutation equivariance over 50 random specs") {
  CounterRng rng(4242, 0);
  int transient_seen = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_spec(rng);
    const std::int64_t n = g->vertex_count();
    std::vector<Vid> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.next_u64() % i]);
    auto h = permuted(*g, perm);

    // kernel invariants hold everywhere
    for (Vid v = 0; v < n; ++v) {
      g->check_vertex(v);
      h->check_vertex(v);
    }

    // spectral scalar is label-free
    const double pf_g = truncated_pf(*g, MatrixKind::MeanOffspring, static_cast<int>(n) + 1, 1e-11);
    const double pf_h = truncated_pf(*h, MatrixKind::MeanOffspring, static_cast<int>(n) + 1, 1e-11);
    CHECK(pf_g == doctest::Approx(pf_h).epsilon(1e-9));

    AnalyzeOptions opt;
    opt.tol = 1e-14;
    GfSolution sg = analyze(*g, opt);
    GfSolution sh = analyze(*h, opt);
    CHECK((sg.verdict == sh.verdict));
    // F transported along the permutation (labels are preserved)
    for (Vid v = 0; v < n; ++v)
      CHECK(sg.F[static_cast<std::size_t>(v)] ==
            doctest::Approx(sh.F[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])])
                .epsilon(1e-10));
    CHECK(sg.U_root == doctest::Approx(sh.U_root).epsilon(1e-10));
    if (sg.verdict == AnalyticClass::transient && sg.lambda_finite && sh.lambda_finite) {
      ++transient_seen;
      CHECK(sg.ell0 == doctest::Approx(sh.ell0).epsilon(1e-9));
      CHECK(sg.h == doctest::Approx(sh.h).epsilon(1e-9));
      // row stochasticity and the F = Gbar p(-i) identity on the way
      for (Vid v = 0; v < n; ++v) {
        const std::size_t i = static_cast<std::size_t>(v);
        double row = 0;
        for (double q : sg.Q[i]) row += q;
        CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(sg.F[i] ==
              doctest::Approx(sg.Gbar[i] * g->row(v).p_back).epsilon(1e-10));
        CHECK(sg.hq >= 0.0);
      }
      CHECK(sg.h <= -std::log(sg.eps0) + 1e-12);
    }
  }
  CHECK(transient_seen >= 5);  // the family genuinely exercises both regimes
}

TEST_CASE("aggregates are bitwise identical across 1, 2 and 8 workers") {
  auto g = cctest::entropy_example();
  GfSolution sol = analyze(*g, AnalyzeOptions{});

  std::vector<std::string> entropy_docs, recur_docs, couple_docs;
  for (const char* threads : {"1", "2", "8"}) {
    setenv("CONECOVER_THREADS", threads, 1);
    EntropySpeedOptions opt;
    opt.runs = 300;
    opt.horizon = 3000;
    opt.seed = 99;
    opt.weights.push_back(unit_weight());
    opt.model = make_exit_chain_model(*g, sol);
    entropy_docs.push_back(dump_json(to_json(empirical_entropy_speed(*g, opt))));
    recur_docs.push_back(dump_json(to_json(empirical_recurrence(*g, 2000, 300, 5))));
    couple_docs.push_back(dump_json(to_json(couple_check(*g, 500, 2000, 1500, 5))));
  }
  unsetenv("CONECOVER_THREADS");
  CHECK(entropy_docs[0] == entropy_docs[1]);
  CHECK(entropy_docs[0] == entropy_docs[2]);
  CHECK(recur_docs[0] == recur_docs[1]);
  CHECK(recur_docs[0] == recur_docs[2]);
  CHECK(couple_docs[0] == couple_docs[1]);
  CHECK(couple_docs[0] == couple_docs[2]);
}

TEST_CASE("truncated_pf is monotone in the radius") {
  auto half = make_halfline_critical();
  double prev = 0;
  for (int radius : {5, 10, 20, 40, 80}) {
    const double v = truncated_pf(*half, MatrixKind::MeanOffspring, radius, 1e-10);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  auto osc = make_oscillating_growth();
  prev = 0;
  for (int radius : {4, 8, 12}) {
    const double v = truncated_pf(*osc, MatrixKind::Adjacency, radius, 1e-10);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("json writer round-trips doubles at 17 significant digits") {
  Json j = Json::object();
  j["third"] = 1.0 / 3.0;
  j["ell0"] = 0.23619389852406691;
  j["half"] = 0.5;
  j["neg"] = -1234.5678901234567;
  const std::string text = dump_json(j);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("0.23619389852406691") != std::string::npos);
  CHECK(text.find("\"half\": 0.5") != std::string::npos);
  Json back = Json::parse(text);
  CHECK(back["third"].get<double>() == 1.0 / 3.0);
  CHECK(back["neg"].get<double>() == -1234.5678901234567);
}
