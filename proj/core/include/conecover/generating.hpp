#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conecover/graph.hpp"
#include "conecover/spectral.hpp"
#include "conecover/walk.hpp"

namespace conecover {

// Finite first-passage system: either a whole finite graph or a root ball of
// an infinite one with F frozen to a constant outside.
struct FirstPassageSystem {
  std::vector<Vid> vids;                                  // system index -> graph vertex
  std::vector<std::string> labels;
  std::vector<double> p_back;
  std::vector<std::vector<std::pair<int, double>>> fwd;    // (index, p(i,j)) inside
  std::vector<std::vector<double>> boundary_p;             // p(i,j) of edges leaving the system
  int root_index = 0;
  double boundary_value = 0;                               // frozen F outside
};

FirstPassageSystem whole_graph_system(const BaseGraph& g);
FirstPassageSystem truncated_system(const BaseGraph& g, int radius, double boundary_value);

struct FSolve {
  std::vector<double> F;
  std::int64_t iterations = 0;
  double last_update = 0;
  double residual = 0;
  bool converged = false;
};

// Minimal non-negative solution of F(-i) = p(-i) + sum_j p(i,j) F(-j) F(-i)
// by monotone iteration from zero. Never use a generic root-finder here: the
// recurrent branch F = 1 is a spurious attractor in the transient case.
FSolve solve_F(const FirstPassageSystem& sys, double tol = 1e-15, std::int64_t max_iter = 200000);

enum class AnalyticClass { transient, recurrent_or_critical };
// transient iff 1 - U_root > tol with U_root = p(-i0) + sum_j p(i0,j) F(-j).
AnalyticClass classify_analytic(const FirstPassageSystem& sys, const FSolve& f, double tol = 1e-4);
double return_probability(const FirstPassageSystem& sys, const std::vector<double>& F);

struct FprimeResult {
  std::vector<double> Fp;
  bool finite = true;    // false marks the Lambda = infinity regime
  bool dense_solve = true;
  std::int64_t iterations = 0;
};
FprimeResult solve_Fprime(const FirstPassageSystem& sys, const std::vector<double>& F,
                          double tol = 1e-14);

struct ExitChain {
  std::vector<std::vector<double>> Q;  // dense row-stochastic
  std::vector<double> Gbar;
};
ExitChain build_exit_chain(const FirstPassageSystem& sys, const std::vector<double>& F);

// Stationary distribution of an irreducible row-stochastic matrix.
std::vector<double> stationary(const std::vector<std::vector<double>>& Q,
                               const std::vector<std::string>& labels, double tol = 1e-12);

struct WeightRate {
  std::string name;
  double value = 0;
};

// The full analytic bundle of the generating-function pipeline.
struct GfSolution {
  std::vector<std::string> labels;
  std::vector<double> F, Fp, Gbar, nu;
  std::vector<std::vector<double>> Q;
  double U_root = 0;
  AnalyticClass verdict = AnalyticClass::recurrent_or_critical;
  bool lambda_finite = false;
  double Lambda = 0;
  double ell0 = 0;  // zero marks the Lambda = infinity / recurrent regimes
  std::vector<WeightRate> ell_w;
  double h = 0;
  double hq = 0;  // entropy rate of the exit chain = h / ell0
  double dim_lower = 0, dim_point = 0, dim_upper = 0;
  double eps0 = 0;  // min positive one-step probability
  // convergence metadata
  std::int64_t f_iterations = 0;
  double f_residual = 0;
  bool f_converged = false;
  std::int64_t fp_iterations = 0;
  bool fp_dense = true;
  double stationary_residual = 0;
  std::optional<int> truncation_radius;
  double spectral_attachment = 0;  // truncated PF lower bound on lambda^+(M)
  // Hausdorff caveat: dim_point additionally assumes the almost-sure limit
  // hypothesis; carried on every report.
  static constexpr const char* kDimPointCaveat =
      "dim_point assumes -log pi_n(X_n)/n converges almost surely to h";
};

struct AnalyzeOptions {
  double tol = 1e-12;
  std::int64_t max_iter = 200000;
  std::optional<int> truncation_radius;
  std::vector<WeightFunction> weights;
  bool structural_check = false;  // equal-depth implies equal backward probability
};

GfSolution analyze(const BaseGraph& g, const AnalyzeOptions& opt = {});

// Bracketed analysis of an infinite graph: freeze-at-one is the upper
// bracket for F (conservative toward recurrence), freeze-at-zero the lower.
struct GfBracket {
  GfSolution lower;  // boundary F = 0
  GfSolution upper;  // boundary F = 1
  bool agree = false;
  double max_gap = 0;
  bool positive_recurrence_unverified = true;
  std::optional<bool> structural_check_passed;
};

GfBracket analyze_truncated(const BaseGraph& g, int radius, const AnalyzeOptions& opt = {});

// Analytic exit-chain transitions for the walk estimators.
ExitChainModel make_exit_chain_model(const BaseGraph& g, const GfSolution& sol);

// Loop-traversal probability of the walk (= extinction probability of the
// coupled branching process): F(-i0) = p(-i0) Gbar_{i0}(1).
double analytic_loop_probability(const GfSolution& sol, const BaseGraph& g);

}  // namespace conecover
