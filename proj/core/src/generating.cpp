#include "conecover/generating.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "conecover/linalg.hpp"

namespace conecover {

namespace {

FirstPassageSystem system_from_ball(const BaseGraph& g, const std::vector<Vid>& verts,
                                    const std::unordered_map<Vid, int>& index,
                                    double boundary_value) {
  FirstPassageSystem sys;
  sys.vids = verts;
  sys.boundary_value = boundary_value;
  sys.p_back.resize(verts.size());
  sys.fwd.resize(verts.size());
  sys.boundary_p.resize(verts.size());
  sys.labels.resize(verts.size());
  EdgeSet es;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    g.out(verts[i], es);
    sys.labels[i] = g.label(verts[i]);
    sys.p_back[i] = es.p_back();
    for (int k = 0; k < es.size(); ++k) {
      auto it = index.find(es[k].to);
      if (it == index.end())
        sys.boundary_p[i].push_back(es[k].p);
      else
        sys.fwd[i].emplace_back(it->second, es[k].p);
    }
  }
  auto rit = index.find(g.root());
  sys.root_index = rit == index.end() ? 0 : rit->second;
  return sys;
}

}  // namespace

FirstPassageSystem whole_graph_system(const BaseGraph& g) {
  if (!g.finite()) throw TruncationRequired();
  const std::int64_t n = g.vertex_count();
  std::vector<Vid> verts;
  std::unordered_map<Vid, int> index;
  for (Vid v = 0; v < n; ++v) {
    index.emplace(v, static_cast<int>(verts.size()));
    verts.push_back(v);
  }
  return system_from_ball(g, verts, index, 0.0);
}

FirstPassageSystem truncated_system(const BaseGraph& g, int radius, double boundary_value) {
  Ball ball = ball_around_root(g, radius);
  return system_from_ball(g, ball.verts, ball.index, boundary_value);
}

FSolve solve_F(const FirstPassageSystem& sys, double tol, std::int64_t max_iter) {
  const std::size_t n = sys.vids.size();
  FSolve out;
  out.F.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> boundary_mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (double p : sys.boundary_p[i]) boundary_mass[i] += p * sys.boundary_value;

  for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations) {
    double delta = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = boundary_mass[i];
      for (const auto& [j, p] : sys.fwd[i]) s += p * out.F[static_cast<std::size_t>(j)];
      const double v = sys.p_back[i] + s * out.F[i];
      delta = std::max(delta, std::fabs(v - out.F[i]));  // monotone up to rounding
      next[i] = v;
    }
    out.F.swap(next);
    out.last_update = delta;
    if (delta < tol) {
      out.converged = true;
      break;
    }
  }
  double res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = boundary_mass[i];
    for (const auto& [j, p] : sys.fwd[i]) s += p * out.F[static_cast<std::size_t>(j)];
    res = std::max(res, std::fabs(sys.p_back[i] + s * out.F[i] - out.F[i]));
  }
  out.residual = res;
  return out;
}

double return_probability(const FirstPassageSystem& sys, const std::vector<double>& F) {
  const std::size_t r = static_cast<std::size_t>(sys.root_index);
  double u = sys.p_back[r];
  for (const auto& [j, p] : sys.fwd[r]) u += p * F[static_cast<std::size_t>(j)];
  for (double p : sys.boundary_p[r]) u += p * sys.boundary_value;
  return u;
}

AnalyticClass classify_analytic(const FirstPassageSystem& sys, const FSolve& f, double tol) {
  return 1.0 - return_probability(sys, f.F) > tol ? AnalyticClass::transient
                                                  : AnalyticClass::recurrent_or_critical;
}

FprimeResult solve_Fprime(const FirstPassageSystem& sys, const std::vector<double>& F,
                          double tol) {
  const std::size_t n = sys.vids.size();
  FprimeResult out;

  // F'(-i) = c(i) + sum_j B(i,j) F'(-j) with
  //   B(i,j) = p(i,j) F(-i) + delta_ij sum_k p(i,k) F(-k),
  //   c(i)   = p(-i) + sum_j p(i,j) F(-j) F(-i)  (= F(-i) at the fixed point).
  // Boundary neighbours contribute the frozen constant to the diagonal sum
  // and nothing to the coupling (their F' is outside the system).
  std::vector<double> diag(n, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (const auto& [j, p] : sys.fwd[i]) s += p * F[static_cast<std::size_t>(j)];
    for (double p : sys.boundary_p[i]) s += p * sys.boundary_value;
    diag[i] = s;
    c[i] = sys.p_back[i] + s * F[i];
  }

  if (n <= 4096) {
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i * n + i] = 1.0 - diag[i];
      for (const auto& [j, p] : sys.fwd[i]) a[i * n + static_cast<std::size_t>(j)] -= p * F[i];
    }
    try {
      out.Fp = lu_solve(std::move(a), c);
    } catch (const SingularSystem&) {
      out.finite = false;
      return out;
    }
    for (double v : out.Fp)
      if (!(v >= 0.0) || !std::isfinite(v) || v > 1e12) {
        // the linear solve landed outside the cone: divergent regime
        out.finite = false;
        return out;
      }
    return out;
  }

  // Large systems: monotone fixed-point iteration from zero; divergence past
  // 1e12 in sup norm marks Lambda = infinity rather than an error.
  out.dense_solve = false;
  std::vector<double> x(n, 0.0), y(n, 0.0);
  for (std::int64_t it = 1; it <= 2000000; ++it) {
    double delta = 0, sup = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = c[i] + diag[i] * x[i];
      for (const auto& [j, p] : sys.fwd[i]) s += p * F[i] * x[static_cast<std::size_t>(j)];
      delta = std::max(delta, std::fabs(s - x[i]));
      sup = std::max(sup, s);
      y[i] = s;
    }
    x.swap(y);
    out.iterations = it;
    if (sup > 1e12) {
      out.finite = false;
      return out;
    }
    if (delta < tol) {
      out.Fp = x;
      return out;
    }
  }
  out.finite = false;
  return out;
}

ExitChain build_exit_chain(const FirstPassageSystem& sys, const std::vector<double>& F) {
  const std::size_t n = sys.vids.size();
  ExitChain chain;
  chain.Gbar.resize(n);
  chain.Q.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (F[i] >= 1.0 - 1e-12) throw RecurrentType(sys.labels[i]);
    double s = 0;
    for (const auto& [j, p] : sys.fwd[i]) s += p * F[static_cast<std::size_t>(j)];
    for (double p : sys.boundary_p[i]) s += p * sys.boundary_value;
    chain.Gbar[i] = 1.0 / (1.0 - s);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (const auto& [j, p] : sys.fwd[i]) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double q = (1.0 - F[sj]) / (1.0 - F[i]) * p * chain.Gbar[i];
      chain.Q[i][sj] += q;
      row += q;
    }
    // boundary exits are dropped; rows of a whole-graph system are already
    // stochastic, truncated ones renormalize and report the defect upstream
    if (row > 0 && !sys.boundary_p[i].empty())
      for (double& v : chain.Q[i]) v /= row;
  }
  return chain;
}

std::vector<double> stationary(const std::vector<std::vector<double>>& Q,
                               const std::vector<std::string>& labels, double tol) {
  const std::size_t n = Q.size();
  if (n == 0) throw Reducible("empty chain", {});

  // irreducibility: strong connectivity on the positive-entry digraph
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w = 0; w < n; ++w) {
        const double entry = transpose ? Q[w][v] : Q[v][w];
        if (entry > 0 && !seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    return seen;
  };
  const std::vector<char> fwd = reach(false), bwd = reach(true);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < n; ++i)
    if (!fwd[i] || !bwd[i]) missing.push_back(labels.size() == n ? labels[i] : std::to_string(i));
  if (!missing.empty())
    throw Reducible("exit chain is not irreducible", missing);

  std::vector<double> nu;
  if (n <= 2048) {
    // solve nu Q = nu with the normalization replacing the last equation
    std::vector<double> a(n * n, 0.0), b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] = Q[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j) a[(n - 1) * n + j] = 1.0;
    b[n - 1] = 1.0;
    nu = lu_solve(std::move(a), std::move(b));
  } else {
    nu.assign(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    for (std::int64_t it = 0; it < 2000000; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) next[j] += nu[i] * Q[i][j];
      double norm = 0, delta = 0;
      for (double v : next) norm += v;
      for (std::size_t j = 0; j < n; ++j) {
        next[j] /= norm;
        delta = std::max(delta, std::fabs(next[j] - nu[j]));
      }
      nu.swap(next);
      if (delta < tol) break;
    }
  }
  double res = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += nu[i] * Q[i][j];
    res = std::max(res, std::fabs(s - nu[j]));
  }
  if (res > std::max(tol * 100, 1e-9))
    throw NonConvergence(0, res, res);
  for (double& v : nu) v = std::max(v, 0.0);
  return nu;
}

namespace {

GfSolution analyze_system(const BaseGraph& g, const FirstPassageSystem& sys,
                          const AnalyzeOptions& opt) {
  GfSolution sol;
  sol.labels = sys.labels;
  sol.truncation_radius = opt.truncation_radius;

  FSolve f = solve_F(sys, opt.tol, opt.max_iter);
  if (!f.converged && f.residual > std::sqrt(opt.tol))
    throw MaxIterExceeded(f.iterations, f.residual);
  sol.F = f.F;
  sol.f_iterations = f.iterations;
  sol.f_residual = f.residual;
  sol.f_converged = f.converged;
  sol.U_root = return_probability(sys, f.F);
  sol.verdict = classify_analytic(sys, f);

  // epsilon_0: min positive one-step probability of the walk
  sol.eps0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sys.vids.size(); ++i) {
    sol.eps0 = std::min(sol.eps0, sys.p_back[i]);
    for (const auto& [j, p] : sys.fwd[i]) {
      (void)j;
      if (p > 0) sol.eps0 = std::min(sol.eps0, p);
    }
    for (double p : sys.boundary_p[i])
      if (p > 0) sol.eps0 = std::min(sol.eps0, p);
  }

  if (sol.verdict != AnalyticClass::transient) {
    sol.ell0 = 0.0;  // recurrent or critical: no positive rate of escape here
    return sol;
  }

  FprimeResult fp = solve_Fprime(sys, sol.F, std::min(opt.tol, 1e-14));
  sol.fp_iterations = fp.iterations;
  sol.fp_dense = fp.dense_solve;
  if (!fp.finite) {
    sol.lambda_finite = false;
    sol.ell0 = 0.0;  // Lambda = infinity regime: liminf l(X_n)/n = 0
    return sol;
  }
  sol.Fp = fp.Fp;
  sol.lambda_finite = true;

  ExitChain chain = build_exit_chain(sys, sol.F);
  sol.Gbar = chain.Gbar;
  sol.Q = chain.Q;
  sol.nu = stationary(chain.Q, sys.labels, 1e-12);
  {
    double res = 0;
    for (std::size_t j = 0; j < sol.nu.size(); ++j) {
      double s = 0;
      for (std::size_t i = 0; i < sol.nu.size(); ++i) s += sol.nu[i] * sol.Q[i][j];
      res = std::max(res, std::fabs(s - sol.nu[j]));
    }
    sol.stationary_residual = res;
  }

  double lambda = 0;
  for (std::size_t i = 0; i < sys.vids.size(); ++i) lambda += sol.nu[i] * sol.Fp[i] / sol.F[i];
  sol.Lambda = lambda;
  sol.ell0 = 1.0 / lambda;

  double hq = 0;
  for (std::size_t i = 0; i < sys.vids.size(); ++i)
    for (std::size_t j = 0; j < sys.vids.size(); ++j)
      if (sol.Q[i][j] > 0) hq -= sol.nu[i] * sol.Q[i][j] * std::log(sol.Q[i][j]);
  sol.hq = hq;
  sol.h = sol.ell0 * hq;
  sol.dim_lower = hq;
  sol.dim_point = hq;
  sol.dim_upper = -std::log(sol.eps0) / sol.ell0;

  for (const WeightFunction& w : opt.weights) {
    double num = 0;
    for (std::size_t i = 0; i < sys.vids.size(); ++i)
      for (const auto& [j, p] : sys.fwd[i]) {
        (void)p;
        const std::size_t sj = static_cast<std::size_t>(j);
        if (sol.Q[i][sj] > 0)
          num += sol.nu[i] * sol.Q[i][sj] * w.w(g, sys.vids[i], sys.vids[sj]);
      }
    sol.ell_w.push_back(WeightRate{w.name, num * sol.ell0});
  }
  return sol;
}

}  // namespace

GfSolution analyze(const BaseGraph& g, const AnalyzeOptions& opt) {
  if (!g.finite()) {
    if (!opt.truncation_radius) throw TruncationRequired();
    GfBracket bracket = analyze_truncated(g, *opt.truncation_radius, opt);
    if (!bracket.agree)
      throw Error("TruncationBracketOpen",
                  "freeze-at-0 and freeze-at-1 brackets disagree; report them separately");
    return bracket.lower;
  }
  FirstPassageSystem sys = whole_graph_system(g);
  AnalyzeOptions o = opt;
  o.truncation_radius.reset();
  GfSolution sol = analyze_system(g, sys, o);
  sol.spectral_attachment = truncated_pf(g, MatrixKind::MeanOffspring,
                                         static_cast<int>(g.vertex_count()) + 1, 1e-10);
  return sol;
}

GfBracket analyze_truncated(const BaseGraph& g, int radius, const AnalyzeOptions& opt) {
  AnalyzeOptions o = opt;
  o.truncation_radius = radius;
  GfBracket bracket;
  FirstPassageSystem lower_sys = truncated_system(g, radius, 0.0);
  FirstPassageSystem upper_sys = truncated_system(g, radius, 1.0);
  bracket.lower = analyze_system(g, lower_sys, o);
  bracket.upper = analyze_system(g, upper_sys, o);
  bracket.max_gap = 0;
  for (std::size_t i = 0; i < bracket.lower.F.size(); ++i)
    bracket.max_gap = std::max(bracket.max_gap, bracket.upper.F[i] - bracket.lower.F[i]);
  bracket.agree = bracket.max_gap <= 10.0 * opt.tol;
  if (opt.structural_check) {
    // Sufficient condition for positive recurrence of Q: vertices reachable
    // at a common distance from the root share their backward probability.
    Ball ball = ball_around_root(g, radius);
    std::unordered_map<Vid, std::uint64_t> depth_mask;
    std::deque<std::pair<Vid, int>> queue{{g.root(), 0}};
    depth_mask[g.root()] = 1;
    EdgeSet es;
    bool ok = true;
    while (!queue.empty()) {
      auto [v, d] = queue.front();
      queue.pop_front();
      if (d >= std::min(radius, 63)) continue;
      g.out(v, es);
      for (int k = 0; k < es.size(); ++k) {
        const std::uint64_t bit = 1ULL << (d + 1);
        auto [it, fresh] = depth_mask.emplace(es[k].to, 0);
        if (!(it->second & bit)) {
          it->second |= bit;
          queue.emplace_back(es[k].to, d + 1);
        }
        (void)fresh;
      }
    }
    std::vector<std::pair<Vid, std::uint64_t>> items(depth_mask.begin(), depth_mask.end());
    for (std::size_t a = 0; a < items.size() && ok; ++a)
      for (std::size_t b = a + 1; b < items.size() && ok; ++b)
        if ((items[a].second & items[b].second) != 0 &&
            std::fabs(g.backward(items[a].first) - g.backward(items[b].first)) > 1e-12)
          ok = false;
    bracket.structural_check_passed = ok;
  }
  return bracket;
}

ExitChainModel make_exit_chain_model(const BaseGraph& g, const GfSolution& sol) {
  // Vid -> system index; analyze() on finite graphs uses identity order.
  auto index = std::make_shared<std::unordered_map<Vid, std::size_t>>();
  for (std::size_t i = 0; i < sol.labels.size(); ++i) {
    auto v = g.resolve(sol.labels[i]);
    if (v) index->emplace(*v, i);
  }
  auto Q = std::make_shared<std::vector<std::vector<double>>>(sol.Q);
  return ExitChainModel{[index, Q](Vid i, Vid j) {
    auto it = index->find(i);
    auto jt = index->find(j);
    if (it == index->end() || jt == index->end()) return 1e-300;
    return std::max((*Q)[it->second][jt->second], 1e-300);
  }};
}

double analytic_loop_probability(const GfSolution& sol, const BaseGraph& g) {
  auto root_label = g.label(g.root());
  for (std::size_t i = 0; i < sol.labels.size(); ++i)
    if (sol.labels[i] == root_label) return sol.F[i];
  throw UnknownVertex(root_label);
}

}  // namespace conecover
