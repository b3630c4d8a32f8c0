#include "conecover/spectral.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "conecover/rng.hpp"

namespace conecover {

Ball ball_around_root(const BaseGraph& g, int radius) {
  Ball ball;
  ball.radius = radius;
  std::deque<std::pair<Vid, int>> queue;
  auto visit = [&](Vid v) {
    if (ball.index.count(v)) return false;
    ball.index.emplace(v, static_cast<int>(ball.verts.size()));
    ball.verts.push_back(v);
    return true;
  };
  visit(g.root());
  queue.emplace_back(g.root(), 0);

  // Finite graphs: symmetrized reachability via the full reverse adjacency.
  std::unordered_map<Vid, std::vector<Vid>> reverse;
  if (g.finite()) {
    EdgeSet es;
    const std::int64_t n = g.vertex_count();
    for (Vid v = 0; v < n; ++v) {
      g.out(v, es);
      for (int k = 0; k < es.size(); ++k) reverse[es[k].to].push_back(v);
    }
  }

  EdgeSet es;
  while (!queue.empty()) {
    auto [v, depth] = queue.front();
    queue.pop_front();
    if (depth >= radius) continue;
    g.out(v, es);
    for (int k = 0; k < es.size(); ++k)
      if (visit(es[k].to)) queue.emplace_back(es[k].to, depth + 1);
    if (g.finite()) {
      auto it = reverse.find(v);
      if (it != reverse.end())
        for (Vid u : it->second)
          if (visit(u)) queue.emplace_back(u, depth + 1);
    }
  }
  return ball;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (const auto& [j, v] : rows[static_cast<std::size_t>(i)])
      s += v * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
}

bool SparseMatrix::zero() const {
  for (const auto& row : rows)
    for (const auto& [j, v] : row)
      if (v != 0.0) return false;
  return true;
}

SparseMatrix induced_matrix(const BaseGraph& g, const Ball& ball, MatrixKind kind) {
  SparseMatrix m;
  m.n = static_cast<int>(ball.verts.size());
  m.rows.resize(ball.verts.size());
  EdgeSet es;
  for (std::size_t i = 0; i < ball.verts.size(); ++i) {
    g.out(ball.verts[i], es);
    for (int k = 0; k < es.size(); ++k) {
      auto it = ball.index.find(es[k].to);
      if (it == ball.index.end()) continue;
      const double value =
          kind == MatrixKind::Adjacency ? 1.0 : es[k].p / es.p_back();
      m.rows[i].emplace_back(it->second, value);
    }
  }
  return m;
}

PowerIterationResult power_iteration(const SparseMatrix& m, double tol, std::int64_t max_iter) {
  if (m.n == 0 || m.zero()) throw ZeroMatrix();
  const std::size_t n = static_cast<std::size_t>(m.n);
  std::vector<double> x(n, 1.0), y;
  double g_prev = 0;            // previous sup-norm growth factor
  double est = 0, est_prev = -1;
  double diff_prev = -1;
  int stable = 0;
  bool restarted = false;
  // Growth factors from the all-ones start can plateau until boundary
  // effects cross the ball, so convergence may not be declared before the
  // diameter has been traversed a couple of times.
  const std::int64_t min_iter = std::max<std::int64_t>(32, 2 * m.n);
  std::int64_t it = 0;
  for (it = 1; it <= max_iter; ++it) {
    m.multiply(x, y);
    double norm = 0;
    for (double v : y) norm = std::max(norm, std::fabs(v));
    if (norm == 0.0) throw ZeroMatrix();
    for (double& v : y) v /= norm;
    x.swap(y);
    if (it >= 2) {
      est_prev = est;
      est = std::sqrt(norm * g_prev);
      const double diff = std::fabs(est - est_prev);
      // geometric-decay error bound: |est - limit| <~ diff * r/(1-r)
      double err = diff;
      if (diff_prev > 0 && diff > 0) {
        const double r = std::min(diff / diff_prev, 0.999999);
        err = diff * r / (1.0 - r);
      }
      if (est_prev >= 0 && err <= tol * std::max(est, 1e-300)) {
        if (++stable >= 5 && it >= min_iter) return PowerIterationResult{est, it, diff};
      } else {
        stable = 0;
      }
      diff_prev = diff;
    }
    g_prev = norm;
    if (!restarted && it == max_iter / 2) {
      // stagnation fallback: re-seed with a randomized positive vector
      restarted = true;
      CounterRng rng(0x9e3779b9u, 17);
      for (double& v : x) v = 0.5 + rng.next_u01();
      stable = 0;
    }
  }
  throw NonConvergence(max_iter, est_prev, est);
}

double truncated_pf(const BaseGraph& g, MatrixKind kind, int radius, double tol,
                    std::int64_t max_iter) {
  Ball ball = ball_around_root(g, radius);
  SparseMatrix m = induced_matrix(g, ball, kind);
  return power_iteration(m, tol, max_iter).value;
}

CwCertificate cw_certify(const BaseGraph& g,
                         const std::function<double(const BaseGraph&, Vid)>& f, double lambda,
                         int radius, MatrixKind kind) {
  Ball ball = ball_around_root(g, radius);
  CwCertificate cert;
  cert.lambda = lambda;
  cert.radius = radius;
  cert.margin = std::numeric_limits<double>::infinity();
  EdgeSet es;
  for (Vid v : ball.verts) {
    const double fv = f(g, v);
    if (!(fv > 0.0)) throw NonPositiveTestFunction(g.label(v));
    g.out(v, es);
    double mf = 0;
    for (int k = 0; k < es.size(); ++k) {
      const double entry = kind == MatrixKind::Adjacency ? 1.0 : es[k].p / es.p_back();
      mf += entry * f(g, es[k].to);  // neighbours outside the ball still count
    }
    const double margin = mf - lambda * fv;
    if (margin < cert.margin) {
      cert.margin = margin;
      cert.worst_vertex = g.label(v);
      cert.deficit = std::max(0.0, -margin);
    }
  }
  cert.certified = cert.margin >= -1e-12;
  cert.note = g.finite() && radius >= static_cast<int>(ball.verts.size())
                  ? "checked on the whole graph"
                  : "unchecked outside radius " + std::to_string(radius);
  return cert;
}

LevelCounts count_levels(const BaseGraph& g, int N, std::int64_t budget) {
  LevelCounts lc;
  lc.counts.push_back(1);
  lc.n_reached = 0;
  // measure: base vertex -> number of tree vertices at the current height
  std::map<Vid, BigInt> level{{g.root(), BigInt(1)}};
  EdgeSet es;
  for (int n = 1; n <= N; ++n) {
    std::map<Vid, BigInt> next;
    for (const auto& [v, c] : level) {
      g.out(v, es);
      for (int k = 0; k < es.size(); ++k) next[es[k].to] += c;
    }
    if (static_cast<std::int64_t>(next.size()) > budget) {
      lc.complete = false;
      return lc;
    }
    BigInt total = 0;
    for (const auto& [v, c] : next) total += c;
    lc.counts.push_back(total);
    lc.n_reached = n;
    level.swap(next);
  }
  return lc;
}

std::vector<double> LevelCounts::roots() const {
  std::vector<double> out;
  for (std::size_t n = 1; n < counts.size(); ++n) {
    const double v = counts[n].convert_to<double>();
    double lg;
    if (std::isfinite(v)) {
      lg = std::log(v);
    } else {
      // counts beyond double range: shift by whole bits first
      const unsigned shift = boost::multiprecision::msb(counts[n]) - 512;
      lg = std::log((counts[n] >> shift).convert_to<double>()) + shift * std::log(2.0);
    }
    out.push_back(std::exp(lg / static_cast<double>(n)));
  }
  return out;
}

namespace {

std::vector<double> rinf_proxy_sequence(const BaseGraph& g, const Ball& ball, int n_powers) {
  SparseMatrix m = induced_matrix(g, ball, MatrixKind::MeanOffspring);
  std::vector<double> x(ball.verts.size(), 1.0), y;
  std::vector<double> proxy;
  double log_norm = 0;
  for (int n = 1; n <= n_powers; ++n) {
    m.multiply(x, y);
    double norm = 0;
    for (double v : y) norm = std::max(norm, std::fabs(v));
    if (norm == 0.0) {
      proxy.push_back(0.0);
      break;
    }
    log_norm += std::log(norm);
    proxy.push_back(std::exp(log_norm / n));
    for (double& v : y) v /= norm;
    x.swap(y);
  }
  return proxy;
}

}  // namespace

ErgodicityReport ergodicity_verdict(const BaseGraph& g, int radius, int n_powers, double margin) {
  ErgodicityReport rep;
  rep.radius = radius;
  Ball ball = ball_around_root(g, radius);
  rep.lambda_lower = power_iteration(induced_matrix(g, ball, MatrixKind::MeanOffspring), 1e-10,
                                     2000000)
                         .value;
  rep.r_inf_proxy = rinf_proxy_sequence(g, ball, n_powers);

  if (rep.lambda_lower > 1.0 + 1e-9) {
    // rho(M_F) > 1 certifies rho(M) > 1, which forces transience of the walk
    // (a finite sub-cover is already transient), hence non-ergodicity. Note
    // rho can exceed lambda^+ on infinite graphs: zero-padded Perron vectors
    // of truncations need not be strictly positive.
    rep.verdict = ErgodicVerdict::non_ergodic;
    rep.reason = "truncated Perron-Frobenius value exceeds 1: rho(M) > 1 forces transience";
    return rep;
  }
  const std::size_t k = rep.r_inf_proxy.size();
  bool tail_decreasing = k >= 5;
  for (std::size_t i = k >= 5 ? k - 5 : 0; i + 1 < k; ++i)
    if (rep.r_inf_proxy[i + 1] > rep.r_inf_proxy[i] + 1e-12) tail_decreasing = false;
  if (g.finite() && !rep.r_inf_proxy.empty() && rep.r_inf_proxy.back() < 1.0 - margin &&
      tail_decreasing) {
    rep.verdict = ErgodicVerdict::ergodic;
    rep.reason = "finite graph with r_inf(M) proxy decisively below 1";
    return rep;
  }
  rep.verdict = ErgodicVerdict::inconclusive;
  rep.reason = g.finite() ? "proxy not decisive at this radius/power budget"
                          : "r_inf of an infinite graph cannot be certified from a truncation";
  return rep;
}

SpectralReport spectral_report(const BaseGraph& g, MatrixKind kind, int radius, int n_powers,
                               double tol) {
  SpectralReport rep;
  rep.kind = kind;
  rep.radius = radius;
  Ball ball = ball_around_root(g, radius);
  rep.rho_lower = power_iteration(induced_matrix(g, ball, kind), tol, 2000000).value;
  if (kind == MatrixKind::MeanOffspring) rep.r_inf_estimate = rinf_proxy_sequence(g, ball, n_powers);
  rep.note = g.finite() ? "finite graph: value is the Perron-Frobenius eigenvalue at full radius"
                        : "finite truncation: lower bound for the infinite operator";
  return rep;
}

}  // namespace conecover
