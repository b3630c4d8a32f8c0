#include "conecover/rwdcre.hpp"

#include <cmath>
#include <limits>

#include "conecover/errors.hpp"

namespace conecover {

void FiniteMarginal::validate(const char* which, double lo, double hi) const {
  if (values.empty() || values.size() != probs.size())
    throw BadGeneratorSpec(std::string(which) + " marginal needs matching values/probs");
  double s = 0;
  for (double p : probs) {
    if (!(p > 0)) throw BadGeneratorSpec(std::string(which) + " marginal probs must be positive");
    s += p;
  }
  if (std::fabs(s - 1.0) > 1e-9)
    throw BadGeneratorSpec(std::string(which) + " marginal probs must sum to 1");
  for (double v : values)
    if (!(v > lo && v < hi))
      throw BadGeneratorSpec(std::string(which) + " support must lie in (" + std::to_string(lo) +
                             "," + std::to_string(hi) + ")");
}

Mat2 rwdcre_matrix_A(double w, double nu) {
  return Mat2{nu * w, -(1.0 - w) / w, 1.0, 0.0};
}

Mat2 rwdcre_matrix_Atilde(double w, double nu) {
  return Mat2{nu * (1.0 - w), -w / (1.0 - w), 1.0, 0.0};
}

RwdcreReport classify_rwdcre(const FiniteMarginal& omega, const FiniteMarginal& nu, int n,
                             int trials, std::uint64_t seed) {
  omega.validate("omega", 0.0, 1.0);
  nu.validate("nu", 0.0, 1.0);

  RwdcreReport rep;
  rep.n = n;
  rep.trials = trials;

  // Admissible lambda: mu0-/lambda + mu0+ lambda <= 1 must hold at every
  // support point. Per point the feasible set is the root interval of
  // mu+ x^2 - x + mu- <= 0; intersect over the product support.
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (double w : omega.values) {
    for (double v : nu.values) {
      const double mu_minus = (1.0 - w) / v;
      const double mu_plus = w / v;
      const double disc = 1.0 - 4.0 * mu_plus * mu_minus;
      if (disc < 0.0) {
        lo = 1.0;
        hi = 0.0;
        break;
      }
      const double s = std::sqrt(disc);
      lo = std::max(lo, (1.0 - s) / (2.0 * mu_plus));
      hi = std::min(hi, (1.0 + s) / (2.0 * mu_plus));
    }
    if (lo > hi) break;
  }

  if (lo > hi) {
    rep.lambda_case = 1;
    rep.verdict = RwdcreClass::transient;
    rep.note = "no admissible lambda on the support";
    return rep;
  }
  rep.lambda_lo = lo;
  rep.lambda_hi = hi;

  // mu0- + mu0+ = 1/nu0 > 1, so the interval cannot contain 1.
  const bool above_one = lo > 1.0;
  rep.lambda_case = above_one ? 2 : 3;

  // threshold: E ln(mu-/mu+) = E ln(omega-/omega+) in case 2 (nu cancels),
  // mirrored in case 3
  double thr = 0;
  for (std::size_t i = 0; i < omega.values.size(); ++i) {
    const double w = omega.values[i];
    const double ratio = above_one ? (1.0 - w) / w : w / (1.0 - w);
    thr += omega.probs[i] * std::log(ratio);
  }
  rep.threshold = thr;

  if (omega.degenerate() && nu.degenerate()) {
    const Mat2 m = above_one ? rwdcre_matrix_A(omega.values[0], nu.values[0])
                             : rwdcre_matrix_Atilde(omega.values[0], nu.values[0]);
    rep.gamma = std::log(m.spectral_radius());
    rep.gamma_se = 0;
    rep.note = "degenerate environment: exact Lyapunov exponent, no Monte Carlo";
    if (std::fabs(rep.gamma - thr) <= 1e-12)
      rep.verdict = RwdcreClass::inconclusive;
    else
      rep.verdict = rep.gamma < thr ? RwdcreClass::transient : RwdcreClass::recurrent;
    return rep;
  }

  MatrixSampler sampler = [&, above_one](CounterRng& rng) {
    auto draw = [&rng](const FiniteMarginal& m) {
      const double u = rng.next_u01();
      double acc = 0;
      for (std::size_t k = 0; k < m.values.size(); ++k) {
        acc += m.probs[k];
        if (u < acc) return m.values[k];
      }
      return m.values.back();
    };
    const double w = draw(omega);
    const double v = draw(nu);
    return above_one ? rwdcre_matrix_A(w, v) : rwdcre_matrix_Atilde(w, v);
  };
  LyapunovEstimate est = lyapunov_top(sampler, n, trials, seed);
  rep.gamma = est.mean;
  rep.gamma_se = est.stderr_;
  rep.monte_carlo = true;
  const double band = 3.0 * est.stderr_;
  if (rep.gamma < thr - band)
    rep.verdict = RwdcreClass::transient;
  else if (rep.gamma > thr + band)
    rep.verdict = RwdcreClass::recurrent;
  else {
    rep.verdict = RwdcreClass::inconclusive;
    rep.note = "threshold within the 3-stderr decision band";
  }
  return rep;
}

}  // namespace conecover
