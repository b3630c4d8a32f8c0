#include "conecover/lyapunov.hpp"

#include <cmath>
#include <vector>

#include "conecover/errors.hpp"
#include "conecover/parallel.hpp"

namespace conecover {

double Mat2::inf_norm() const {
  return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d));
}

Mat2 Mat2::mul(const Mat2& r) const {
  return Mat2{a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
}

double Mat2::spectral_radius() const {
  const double tr = a + d;
  const double det = a * d - b * c;
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::fabs((tr + s) / 2.0), std::fabs((tr - s) / 2.0));
  }
  return std::sqrt(det);  // complex pair, |lambda|^2 = det
}

LyapunovEstimate lyapunov_top(const MatrixSampler& sampler, int n, int trials,
                              std::uint64_t seed) {
  if (n < 1 || trials < 1) throw UsageError("lyapunov_top requires n >= 1 and trials >= 1");

  auto one_trial = [&](int, std::int64_t t) -> double {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    Mat2 prod{1, 0, 0, 1};
    double log_norm = 0;
    for (int k = 0; k < n; ++k) {
      prod = sampler(rng).mul(prod);
      const double s = prod.inf_norm();
      if (s == 0.0) throw SingularCollapse();
      log_norm += std::log(s);
      prod.a /= s;
      prod.b /= s;
      prod.c /= s;
      prod.d /= s;
    }
    return log_norm / n;
  };

  std::vector<double> values = parallel_index_map<double>(trials, one_trial);
  double mean = 0;
  for (double v : values) mean += v;
  mean /= trials;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
  return LyapunovEstimate{mean, sd / std::sqrt(static_cast<double>(trials)), n, trials};
}

}  // namespace conecover
