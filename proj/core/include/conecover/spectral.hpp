#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "conecover/graph.hpp"

namespace conecover {

using BigInt = boost::multiprecision::cpp_int;

enum class MatrixKind { Adjacency, MeanOffspring };

// Vertices within `radius` of the root. Finite graphs symmetrize reachability
// (in-edges are known); generators use forward reachability.
struct Ball {
  std::vector<Vid> verts;                 // discovery order, deterministic
  std::unordered_map<Vid, int> index;
  int radius = 0;
};
Ball ball_around_root(const BaseGraph& g, int radius);

struct SparseMatrix {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  bool zero() const;
};
SparseMatrix induced_matrix(const BaseGraph& g, const Ball& ball, MatrixKind kind);

struct PowerIterationResult {
  double value = 0;
  std::int64_t iterations = 0;
  double last_change = 0;
};

// Largest eigenvalue of a non-negative matrix by power iteration from the
// all-ones vector. The estimate is the two-step geometric mean of sup-norm
// growth factors, which settles also for period-2 (bipartite) structure.
PowerIterationResult power_iteration(const SparseMatrix& m, double tol, std::int64_t max_iter);

// Lower bound for rho(M) (= Perron-Frobenius value of the whole matrix when
// the graph is finite, strongly connected and radius covers it).
double truncated_pf(const BaseGraph& g, MatrixKind kind, int radius, double tol = 1e-10,
                    std::int64_t max_iter = 2000000);

struct CwCertificate {
  bool certified = false;
  double lambda = 0;
  int radius = 0;
  double margin = 0;           // min over the ball of (Mf)(i) - lambda f(i)
  std::string worst_vertex;    // argmin
  double deficit = 0;          // lambda f - Mf at the worst vertex when refuted
  std::string note;
};

// Checks (Mf)(i) >= lambda f(i) - 1e-12 on the ball. A certificate bounds
// lambda^+ from below modulo the unchecked complement, which `note` flags.
CwCertificate cw_certify(const BaseGraph& g,
                         const std::function<double(const BaseGraph&, Vid)>& f, double lambda,
                         int radius, MatrixKind kind = MatrixKind::MeanOffspring);

struct LevelCounts {
  std::vector<BigInt> counts;  // |T_0| .. |T_n_reached|
  bool complete = true;
  int n_reached = 0;
  std::vector<double> roots() const;  // |T_n|^{1/n}, n >= 1
};

// Exact |T_n| for n <= N by dynamic programming on label multiplicities.
// Stops early (complete=false) once the support exceeds `budget` distinct
// base vertices.
LevelCounts count_levels(const BaseGraph& g, int N, std::int64_t budget = 2000000);

enum class ErgodicVerdict { ergodic, non_ergodic, inconclusive };

struct ErgodicityReport {
  ErgodicVerdict verdict = ErgodicVerdict::inconclusive;
  double lambda_lower = 0;                // truncated PF lower bound on lambda^+(M)
  int radius = 0;
  std::vector<double> r_inf_proxy;        // ||M^n 1||_inf^{1/n} on the ball
  std::string reason;
};

// Three-way verdict. Non-ergodic when the truncated Perron-Frobenius value
// certifies rho(M) > 1 (which already forces transience); ergodic only for
// finite graphs whose r_inf proxy is decisively below 1. Truncations of
// infinite graphs never claim ergodicity.
ErgodicityReport ergodicity_verdict(const BaseGraph& g, int radius, int n_powers,
                                    double margin = 1e-6);

struct SpectralReport {
  double rho_lower = 0;
  int radius = 0;
  MatrixKind kind = MatrixKind::MeanOffspring;
  std::optional<CwCertificate> cw;
  std::vector<double> r_inf_estimate;
  std::string note;  // lower-bound caveat for infinite graphs
};

SpectralReport spectral_report(const BaseGraph& g, MatrixKind kind, int radius, int n_powers,
                               double tol = 1e-10);

}  // namespace conecover
