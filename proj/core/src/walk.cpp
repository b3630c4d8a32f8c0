#include "conecover/walk.hpp"

#include <cmath>
#include <deque>
#include <map>

#include "conecover/parallel.hpp"
#include "conecover/rng.hpp"

namespace conecover {

namespace {

struct StepEvent {
  std::int64_t t;
  int dir;  // +1 forward, -1 backward, 0 root loop
  std::int64_t height;
  Vid from_label, to_label;  // traversed edge as (parent, child); loop: (root, root)
  Vid top_label;
};

// One walk, one consumer. The stack holds the label path from the root; a
// forward step pushes the chosen child, a backward step pops. Exactly one
// uniform draw per step keeps runs prefix-stable under horizon extension.
template <typename OnStep>
void run_walk(const BaseGraph& g, std::int64_t n_steps, std::uint64_t seed, std::uint64_t stream,
              OnStep&& on_step) {
  CounterRng rng(seed, stream);
  std::vector<Vid> stack{g.root()};
  stack.reserve(256);

  const FiniteGraph* fg = dynamic_cast<const FiniteGraph*>(&g);
  EdgeSet scratch;

  for (std::int64_t t = 1; t <= n_steps; ++t) {
    const Vid cur = stack.back();
    double p_back;
    int n_out;
    const OutEdge* edges;
    if (fg) {
      const FiniteGraph::Row& row = fg->row(cur);
      p_back = row.p_back;
      n_out = static_cast<int>(row.edges.size());
      edges = row.edges.data();
    } else {
      g.out(cur, scratch);
      p_back = scratch.p_back();
      n_out = scratch.size();
      edges = nullptr;
    }
    auto edge_at = [&](int k) -> const OutEdge& { return fg ? edges[k] : scratch[k]; };

    const double u = rng.next_u01();
    StepEvent ev;
    ev.t = t;
    if (u < p_back) {
      if (stack.size() == 1) {
        ev.dir = 0;
        ev.from_label = ev.to_label = cur;
        ev.top_label = cur;
      } else {
        const Vid popped = stack.back();
        stack.pop_back();
        ev.dir = -1;
        ev.from_label = stack.back();
        ev.to_label = popped;
        ev.top_label = stack.back();
      }
    } else {
      double acc = p_back;
      int pick = n_out - 1;
      for (int k = 0; k < n_out; ++k) {
        acc += edge_at(k).p;
        if (u < acc) {
          pick = k;
          break;
        }
      }
      const Vid child = edge_at(pick).to;
      ev.dir = +1;
      ev.from_label = cur;
      ev.to_label = child;
      ev.top_label = child;
      stack.push_back(child);
    }
    ev.height = static_cast<std::int64_t>(stack.size()) - 1;
    on_step(ev);
  }
}

// Streaming first-stable-window exit tracker.
class ExitTracker {
 public:
  ExitTracker(MarginPolicy margin, std::function<void(std::int64_t, std::int64_t, Vid)> emit)
      : margin_(margin), emit_(std::move(emit)) {}

  void on_step(const StepEvent& ev) {
    if (ev.dir == +1) {
      const std::int64_t k = ev.height;
      if (k > emitted_ + static_cast<std::int64_t>(cands_.size()))
        cands_.push_back(Cand{ev.t, ev.to_label});
    } else if (ev.dir == -1) {
      // height dropped to ev.height: un-emitted candidates above it die
      const std::int64_t keep = std::max<std::int64_t>(ev.height - emitted_, 0);
      while (static_cast<std::int64_t>(cands_.size()) > keep) cands_.pop_back();
    }
    while (!cands_.empty() && ev.t - cands_.front().enter >= margin_.steps(emitted_ + 1)) {
      emit_(emitted_ + 1, cands_.front().enter, cands_.front().label);
      cands_.pop_front();
      ++emitted_;
    }
  }

 private:
  struct Cand {
    std::int64_t enter;
    Vid label;
  };
  MarginPolicy margin_;
  std::function<void(std::int64_t, std::int64_t, Vid)> emit_;
  std::deque<Cand> cands_;
  std::int64_t emitted_ = 0;
};

}  // namespace

WalkRun simulate(const BaseGraph& g, const SimulateOptions& opt) {
  if (opt.n_steps < 1) throw UsageError("simulate requires n_steps >= 1");
  WalkRun run;
  run.seed = opt.seed;
  run.n_steps = opt.n_steps;
  for (const WeightFunction& w : opt.weights) run.weight_names.push_back(w.name);
  run.l_final.assign(opt.weights.size(), 0.0);
  run.final_label = g.root();

  // open level windows, parallel to run.windows
  std::vector<std::int64_t> open_enter;
  std::vector<Vid> open_label;

  run_walk(g, opt.n_steps, opt.seed, opt.stream, [&](const StepEvent& ev) {
    run.max_height = std::max(run.max_height, ev.height);
    if (ev.height == 0) ++run.returns_to_root;
    if (ev.dir == 0) {
      ++run.loop_traversals;
      run.visited_loop = true;
    }
    for (std::size_t wi = 0; wi < opt.weights.size(); ++wi) {
      if (ev.dir == +1)
        run.l_final[wi] += opt.weights[wi].w(g, ev.from_label, ev.to_label);
      else if (ev.dir == -1)
        run.l_final[wi] -= opt.weights[wi].w(g, ev.from_label, ev.to_label);
    }
    if (opt.record_windows) {
      if (ev.dir == +1) {
        const std::size_t k = static_cast<std::size_t>(ev.height);
        if (run.windows.size() < k) run.windows.resize(k);
        if (open_enter.size() < k) {
          open_enter.push_back(ev.t);
          open_label.push_back(ev.to_label);
        }
      } else if (ev.dir == -1) {
        // close windows of all levels now above the height
        while (static_cast<std::int64_t>(open_enter.size()) > ev.height) {
          const std::size_t k = open_enter.size();
          run.windows[k - 1].push_back(LevelWindow{open_enter.back(), ev.t, open_label.back()});
          open_enter.pop_back();
          open_label.pop_back();
        }
      }
    }
    if (opt.record_trajectory)
      run.trajectory.push_back(TrajectoryStep{ev.height, ev.top_label, ev.dir == 0});
    if (ev.t == opt.n_steps) {
      run.final_height = ev.height;
      run.final_label = ev.top_label;
    }
  });

  // close windows still open at the horizon
  while (!open_enter.empty()) {
    const std::size_t k = open_enter.size();
    run.windows[k - 1].push_back(LevelWindow{open_enter.back(), opt.n_steps, open_label.back()});
    open_enter.pop_back();
    open_label.pop_back();
  }
  return run;
}

std::vector<ExitRecord> extract_exits(const WalkRun& run, const MarginPolicy& margin) {
  std::vector<ExitRecord> out;
  for (std::size_t ki = 0; ki < run.windows.size(); ++ki) {
    const std::int64_t k = static_cast<std::int64_t>(ki) + 1;
    bool found = false;
    for (const LevelWindow& w : run.windows[ki]) {
      if (w.end - w.enter >= margin.steps(k)) {
        out.push_back(ExitRecord{k, w.enter, w.label});
        found = true;
        break;
      }
    }
    if (!found) break;  // higher levels cannot qualify with a monotone margin
  }
  return out;
}

RecurrenceEvidence empirical_recurrence(const BaseGraph& g, std::int64_t n_steps,
                                        std::int64_t n_runs, std::uint64_t seed) {
  if (n_runs < 1 || n_steps < 1) throw UsageError("empirical_recurrence needs n_steps and n_runs >= 1");

  struct PerRun {
    std::int64_t returns = 0;
    std::int64_t final_height = 0;
    bool visited_loop = false;
  };
  const int threads = effective_threads();
  std::vector<std::unique_ptr<BaseGraph>> graphs;
  if (g.stable_ids())
    for (int w = 0; w < threads; ++w) graphs.push_back(g.clone());

  std::vector<PerRun> per = parallel_index_map<PerRun>(
      n_runs,
      [&](int worker, std::int64_t r) {
        const BaseGraph& wg = graphs.empty() ? g : *graphs[static_cast<std::size_t>(worker)];
        PerRun p;
        run_walk(wg, n_steps, seed, static_cast<std::uint64_t>(r), [&](const StepEvent& ev) {
          if (ev.height == 0) ++p.returns;
          if (ev.dir == 0) p.visited_loop = true;
          if (ev.t == n_steps) p.final_height = ev.height;
        });
        return p;
      },
      threads);

  RecurrenceEvidence ev;
  ev.horizon = n_steps;
  ev.runs = n_runs;
  ev.seed = seed;
  std::int64_t loop_runs = 0, no_return = 0, escaped = 0, returns_sum = 0;
  for (const PerRun& p : per) {
    returns_sum += p.returns;
    ev.returns_max = std::max(ev.returns_max, p.returns);
    if (p.visited_loop) ++loop_runs;
    if (p.returns == 0) ++no_return;
    if (p.final_height > n_steps / 4) ++escaped;
  }
  const double n = static_cast<double>(n_runs);
  ev.returns_mean = static_cast<double>(returns_sum) / n;
  ev.escape_quarter_fraction = static_cast<double>(escaped) / n;
  ev.no_return_fraction = static_cast<double>(no_return) / n;
  ev.q_walk_hat = static_cast<double>(loop_runs) / n;
  ev.q_walk_se = std::sqrt(std::max(ev.q_walk_hat * (1.0 - ev.q_walk_hat), 0.0) / n);
  ev.note = "horizon-limited evidence, not a proof";
  return ev;
}

EntropySpeedEstimate empirical_entropy_speed(const BaseGraph& g, const EntropySpeedOptions& opt) {
  if (opt.runs < 1 || opt.horizon < 1)
    throw UsageError("empirical_entropy_speed needs runs and horizon >= 1");

  const std::size_t nw = opt.weights.size();
  struct PerRun {
    std::int64_t final_height = 0;
    std::vector<double> l_final;
    bool escaped = false;
    // exit chain tallies past the burn-in
    double neg_log_q_sum = 0;                                   // analytic model
    std::vector<std::pair<std::pair<Vid, Vid>, std::int64_t>> transitions;  // plugin counts
    std::int64_t k_used = 0;
    std::int64_t span = 0;  // e_K - e_B
  };

  const double escape_height = std::pow(static_cast<double>(opt.horizon), opt.escape_exponent);
  const std::int64_t burn = std::max<std::int64_t>(opt.burn_exits, 1);
  const MarginPolicy margin{0, opt.exit_margin};

  const int threads = effective_threads();
  std::vector<std::unique_ptr<BaseGraph>> graphs;
  if (g.stable_ids())
    for (int w = 0; w < threads; ++w) graphs.push_back(g.clone());

  std::vector<PerRun> per = parallel_index_map<PerRun>(
      opt.runs,
      [&](int worker, std::int64_t r) {
        const BaseGraph& wg = graphs.empty() ? g : *graphs[static_cast<std::size_t>(worker)];
        PerRun p;
        p.l_final.assign(nw, 0.0);
        std::map<std::pair<Vid, Vid>, std::int64_t> counts;  // plugin tallies
        Vid prev_label = 0;
        std::int64_t exits = 0, e_burn = 0, e_last = 0;
        ExitTracker tracker(margin, [&](std::int64_t, std::int64_t e_k, Vid label) {
          ++exits;
          if (exits == burn) {
            e_burn = e_k;
            prev_label = label;
          } else if (exits > burn) {
            if (opt.model) {
              const double q = opt.model->q(prev_label, label);
              p.neg_log_q_sum += -std::log(q);
            } else {
              ++counts[{prev_label, label}];
            }
            prev_label = label;
            e_last = e_k;
            ++p.k_used;
          }
        });
        run_walk(wg, opt.horizon, opt.seed, static_cast<std::uint64_t>(r), [&](const StepEvent& ev) {
          tracker.on_step(ev);
          for (std::size_t wi = 0; wi < nw; ++wi) {
            if (ev.dir == +1)
              p.l_final[wi] += opt.weights[wi].w(wg, ev.from_label, ev.to_label);
            else if (ev.dir == -1)
              p.l_final[wi] -= opt.weights[wi].w(wg, ev.from_label, ev.to_label);
          }
          if (ev.t == opt.horizon) p.final_height = ev.height;
        });
        if (p.k_used > 0) p.span = e_last - e_burn;
        for (const auto& [pair, c] : counts) p.transitions.push_back({pair, c});
        p.escaped = static_cast<double>(p.final_height) >= escape_height;
        return p;
      },
      threads);

  EntropySpeedEstimate est;
  est.horizon = opt.horizon;
  est.runs = opt.runs;
  est.seed = opt.seed;
  est.exit_margin = opt.exit_margin;
  est.burn_exits = opt.burn_exits;
  est.q_source = opt.model ? "analytic" : "plugin";
  for (const WeightFunction& w : opt.weights) est.weight_names.push_back(w.name);

  std::int64_t escaped = 0;
  for (const PerRun& p : per)
    if (p.escaped) ++escaped;
  est.escape_fraction = static_cast<double>(escaped) / static_cast<double>(opt.runs);
  if (est.escape_fraction <= opt.guard_threshold) throw NotTransientEnough(est.escape_fraction);

  const double nr = static_cast<double>(opt.runs);

  // speed and weighted rates: per-run means and standard errors
  {
    double sum = 0, ss = 0;
    for (const PerRun& p : per) sum += static_cast<double>(p.final_height);
    est.ell0_hat = sum / nr / static_cast<double>(opt.horizon);
    for (const PerRun& p : per) {
      const double v = static_cast<double>(p.final_height) / static_cast<double>(opt.horizon);
      ss += (v - est.ell0_hat) * (v - est.ell0_hat);
    }
    est.ell0_se = opt.runs > 1 ? std::sqrt(ss / (nr - 1.0) / nr) : 0.0;
  }
  est.ellw_hat.assign(nw, 0.0);
  est.ellw_se.assign(nw, 0.0);
  for (std::size_t wi = 0; wi < nw; ++wi) {
    double sum = 0, ss = 0;
    for (const PerRun& p : per) sum += p.l_final[wi] / static_cast<double>(opt.horizon);
    est.ellw_hat[wi] = sum / nr;
    for (const PerRun& p : per) {
      const double v = p.l_final[wi] / static_cast<double>(opt.horizon);
      ss += (v - est.ellw_hat[wi]) * (v - est.ellw_hat[wi]);
    }
    est.ellw_se[wi] = opt.runs > 1 ? std::sqrt(ss / (nr - 1.0) / nr) : 0.0;
  }

  // pooled plug-in q when no analytic model is supplied
  std::map<std::pair<Vid, Vid>, double> neg_log_q;
  if (!opt.model) {
    std::map<std::pair<Vid, Vid>, std::int64_t> pooled;
    std::map<Vid, std::int64_t> row_totals;
    for (const PerRun& p : per)
      for (const auto& [pair, c] : p.transitions) {
        pooled[pair] += c;
        row_totals[pair.first] += c;
      }
    for (const auto& [pair, c] : pooled)
      neg_log_q[pair] =
          -std::log(static_cast<double>(c) / static_cast<double>(row_totals[pair.first]));
  }
  auto run_neg_log_sum = [&](const PerRun& p) {
    if (opt.model) return p.neg_log_q_sum;
    double s = 0;
    for (const auto& [pair, c] : p.transitions) s += static_cast<double>(c) * neg_log_q[pair];
    return s;
  };

  // pooled ratio estimators over (sum -ln q, time span, exit count)
  double num = 0, den = 0;
  std::int64_t k_total = 0;
  std::int64_t runs_with = 0;
  for (const PerRun& p : per) {
    if (p.k_used <= 0) continue;
    ++runs_with;
    num += run_neg_log_sum(p);
    den += static_cast<double>(p.span);
    k_total += p.k_used;
  }
  est.exits_used = k_total;
  est.runs_with_exits = runs_with;
  if (runs_with == 0 || den <= 0) throw NotTransientEnough(est.escape_fraction);

  est.h_hat = num / den;
  est.hq_hat = num / static_cast<double>(k_total);
  est.lambda_hat = den / static_cast<double>(k_total);

  // linearized (ratio-estimator) standard errors from per-run residuals
  {
    const double dbar = den / static_cast<double>(runs_with);
    double ssh = 0, ssl = 0;
    for (const PerRun& p : per) {
      if (p.k_used <= 0) continue;
      const double uh = run_neg_log_sum(p) - est.h_hat * static_cast<double>(p.span);
      ssh += uh * uh;
      const double ul = static_cast<double>(p.span) - est.lambda_hat * static_cast<double>(p.k_used);
      ssl += ul * ul;
    }
    if (runs_with > 1) {
      const double rw = static_cast<double>(runs_with);
      est.h_se = std::sqrt(ssh / (rw - 1.0) / rw) / dbar;
      const double kbar = static_cast<double>(k_total) / rw;
      est.lambda_se = std::sqrt(ssl / (rw - 1.0) / rw) / kbar;
    }
  }
  return est;
}

}  // namespace conecover
