#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conecover/lyapunov.hpp"

namespace conecover {

// Finitely supported one-dimensional marginal.
struct FiniteMarginal {
  std::vector<double> values;
  std::vector<double> probs;
  void validate(const char* which, double lo, double hi) const;
  bool degenerate() const { return values.size() == 1; }
};

enum class RwdcreClass { transient, recurrent, inconclusive };

struct RwdcreReport {
  RwdcreClass verdict = RwdcreClass::inconclusive;
  int lambda_case = 0;        // 1: no admissible lambda, 2: lambda > 1, 3: lambda < 1
  double lambda_lo = 0, lambda_hi = 0;
  double gamma = 0;           // top Lyapunov exponent (exact for degenerate support)
  double gamma_se = 0;
  double threshold = 0;       // E ln(mu-/mu+) resp. E ln(mu+/mu-)
  bool monte_carlo = false;
  int n = 0, trials = 0;
  std::string note;
};

// Classification of the random walk on directed covers in random environment
// over Z. The lambda-case analysis runs over the product support of
// (omega+, nu) with mu- = omega-/nu, mu+ = omega+/nu; cases 2 and 3 compare a
// top Lyapunov exponent against the log-ratio threshold with a 3-standard-
// error decision band. Degenerate supports are decided without Monte Carlo
// via the exact 2x2 spectral radius.
RwdcreReport classify_rwdcre(const FiniteMarginal& omega, const FiniteMarginal& nu, int n,
                             int trials, std::uint64_t seed);

// The transfer matrices of the classification, exposed for tests.
Mat2 rwdcre_matrix_A(double omega_plus, double nu);
Mat2 rwdcre_matrix_Atilde(double omega_plus, double nu);

}  // namespace conecover
