#pragma once

#include <cstdint>
#include <functional>

#include "conecover/rng.hpp"

namespace conecover {

struct Mat2 {
  double a, b, c, d;  // [[a,b],[c,d]]

  // operator infinity-norm (max absolute row sum); fixed for reproducibility,
  // the Lyapunov limit is norm independent
  double inf_norm() const;
  Mat2 mul(const Mat2& rhs) const;
  // spectral radius (largest eigenvalue modulus) of the 2x2
  double spectral_radius() const;
};

using MatrixSampler = std::function<Mat2(CounterRng&)>;

struct LyapunovEstimate {
  double mean = 0;
  double stderr_ = 0;
  int n = 0;
  int trials = 0;
};

// gamma = lim (1/n) E ln ||A_n ... A_1||, estimated over independent trials
// with per-step renormalization of the running product. Trial t uses stream t
// of `seed`; aggregation is in trial order, so results do not depend on any
// parallel schedule.
LyapunovEstimate lyapunov_top(const MatrixSampler& sampler, int n, int trials,
                              std::uint64_t seed);

}  // namespace conecover
