#pragma once

#include <cmath>
#include <memory>

#include "conecover/graph.hpp"

namespace cctest {

using namespace conecover;

// The 3-vertex worked example used throughout (tree-kernel parameters):
//   p(-i0)=1/3, p(i0,i1)=p(i0,i2)=1/3; p(-i1)=1/2, p(i1,i0)=1/2;
//   p(-i2)=1/4, p(i2,i1)=3/4.
inline std::unique_ptr<FiniteGraph> entropy_example() {
  std::vector<FiniteGraph::Row> rows(3);
  rows[0] = {"i0", 1.0 / 3.0, {{1, 1.0 / 3.0}, {2, 1.0 / 3.0}}};
  rows[1] = {"i1", 1.0 / 2.0, {{0, 1.0 / 2.0}}};
  rows[2] = {"i2", 1.0 / 4.0, {{1, 3.0 / 4.0}}};
  return std::make_unique<FiniteGraph>(std::move(rows), 0, 1e-6, "test:entropy_example");
}

// Same topology, uniformly homesick: p(-i) = 3/4 everywhere.
inline std::unique_ptr<FiniteGraph> recurrent_example() {
  std::vector<FiniteGraph::Row> rows(3);
  rows[0] = {"i0", 0.75, {{1, 0.125}, {2, 0.125}}};
  rows[1] = {"i1", 0.75, {{0, 0.25}}};
  rows[2] = {"i2", 0.75, {{1, 0.25}}};
  return std::make_unique<FiniteGraph>(std::move(rows), 0, 1e-6, "test:recurrent_example");
}

// Frozen oracle values for the entropy example, computed independently with
// 50-digit arithmetic from the fixed-point system and re-verified below by
// the long-double Newton oracle in test_generating.
namespace oracle {
inline constexpr double F0 = 0.56082255501406359356;
inline constexpr double F1 = 0.69484135085911658819;
inline constexpr double F2 = 0.52206345965635336472;
inline constexpr double Gbar0 = 1.6824676650421907807;
inline constexpr double Gbar1 = 1.3896827017182331764;
inline constexpr double Gbar2 = 2.0882538386254134589;
inline constexpr double U_root = 0.73896827017182331764;
inline constexpr double Fp0 = 2.5394006739972374424;
inline constexpr double Fp1 = 2.191643085708480623;
inline constexpr double Fp2 = 2.8821996752423519768;
inline constexpr double q01 = 0.38968270171823317638;
inline constexpr double q02 = 0.61031729828176682362;
inline constexpr double nu0 = 0.38309518948453004709;
inline constexpr double nu1 = 0.38309518948453004709;
inline constexpr double nu2 = 0.23380962103093990583;
inline constexpr double Lambda = 4.2338096210309399058;
inline constexpr double ell0 = 0.23619389852406690986;
inline constexpr double hQ = 0.25613972074401657891;
inline constexpr double h = 0.060498639209395087893;
inline constexpr double paper_h = 0.060499;
}  // namespace oracle

}  // namespace cctest
