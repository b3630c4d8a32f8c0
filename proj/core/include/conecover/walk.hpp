#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conecover/graph.hpp"

namespace conecover {

// Bounded edge-weight function w(i,j) inducing the length l(x) on the cover.
struct WeightFunction {
  std::string name;
  double bound = 1.0;
  std::function<double(const BaseGraph&, Vid, Vid)> w;
};

inline WeightFunction unit_weight() {
  return WeightFunction{"unit", 1.0, [](const BaseGraph&, Vid, Vid) { return 1.0; }};
}

// Emission rule for exit-time records: a level-k candidate window must stay
// at height >= k for steps(k) consecutive steps before (k, e_k, tau(W_k)) is
// emitted. First qualifying window wins, so records are stable under horizon
// extension.
struct MarginPolicy {
  std::int64_t slope = 10;
  std::int64_t offset = 100;
  std::int64_t steps(std::int64_t k) const { return slope * k + offset; }
};

struct LevelWindow {
  std::int64_t enter = 0;  // first step with height >= k since the last dip
  std::int64_t end = 0;    // step of the next dip below k, or the horizon
  Vid label = 0;           // tau(X_enter)
};

struct ExitRecord {
  std::int64_t k = 0;
  std::int64_t e_k = 0;
  Vid label = 0;
};

struct TrajectoryStep {
  std::int64_t height;
  Vid label;
  bool loop;
};

struct WalkRun {
  std::uint64_t seed = 0;
  std::int64_t n_steps = 0;
  std::int64_t final_height = 0;
  std::int64_t max_height = 0;
  std::int64_t returns_to_root = 0;   // steps landing on o (loop steps included)
  std::int64_t loop_traversals = 0;
  bool visited_loop = false;
  Vid final_label = 0;
  std::vector<std::string> weight_names;
  std::vector<double> l_final;                   // l(X_n) per registered weight
  std::vector<std::vector<LevelWindow>> windows; // windows[k-1]: level-k stay windows
  std::vector<TrajectoryStep> trajectory;        // optional full dump
};

struct SimulateOptions {
  std::int64_t n_steps = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // per-run derived stream index
  std::vector<WeightFunction> weights;
  bool record_windows = true;
  bool record_trajectory = false;
};

// Nearest-neighbour walk on the directed cover, never materializing the
// tree: the position is the label stack of the geodesic from the root.
// Deterministic given (spec, seed, stream).
WalkRun simulate(const BaseGraph& g, const SimulateOptions& opt);

// Exit records for every level whose first stable window fits the margin
// within the recorded horizon. Empty output is valid (recurrent-looking run).
std::vector<ExitRecord> extract_exits(const WalkRun& run, const MarginPolicy& margin);

struct RecurrenceEvidence {
  std::int64_t horizon = 0;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  double returns_mean = 0;
  std::int64_t returns_max = 0;
  double escape_quarter_fraction = 0;  // final height > horizon/4
  double no_return_fraction = 0;       // no visit to o after step 0
  double q_walk_hat = 0;               // fraction of runs traversing the root loop
  double q_walk_se = 0;
  std::string note;
};

// Horizon-limited Monte Carlo evidence for recurrence/transience; never a
// proof, and labelled as such in the note.
RecurrenceEvidence empirical_recurrence(const BaseGraph& g, std::int64_t n_steps,
                                        std::int64_t n_runs, std::uint64_t seed);

// Analytic exit-chain transition probabilities, when the generating module
// has them; otherwise the estimator falls back to plug-in frequencies.
struct ExitChainModel {
  std::function<double(Vid, Vid)> q;
};

struct EntropySpeedOptions {
  std::int64_t runs = 1000;
  std::int64_t horizon = 10000;
  std::uint64_t seed = 0;
  std::vector<WeightFunction> weights;
  std::int64_t exit_margin = 256;   // constant stability margin for the estimator
  std::int64_t burn_exits = 32;     // exit-chain burn-in per run
  double escape_exponent = 0.6;     // escape means final height >= horizon^exponent
  double guard_threshold = 0.5;
  std::optional<ExitChainModel> model;
};

struct EntropySpeedEstimate {
  std::int64_t horizon = 0;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  double escape_fraction = 0;
  double ell0_hat = 0, ell0_se = 0;      // mean final height / horizon
  double lambda_hat = 0, lambda_se = 0;  // mean exit-time increment
  double h_hat = 0, h_se = 0;            // pooled exit-chain entropy estimator
  double hq_hat = 0;                     // -ln q per exit transition
  std::vector<std::string> weight_names;
  std::vector<double> ellw_hat, ellw_se;
  std::int64_t exits_used = 0;
  std::int64_t runs_with_exits = 0;
  std::string q_source;  // "analytic" or "plugin"
  std::int64_t exit_margin = 0, burn_exits = 0;
};

// Empirical rate of escape and asymptotic entropy through the exit chain.
// h_hat is the pooled ratio  sum(-ln q over exit transitions) / sum(time
// spans), which converges to ell0 * h_Q. Requires the walk to look transient
// over the horizon (escape fraction above the guard), else throws
// NotTransientEnough.
EntropySpeedEstimate empirical_entropy_speed(const BaseGraph& g, const EntropySpeedOptions& opt);

}  // namespace conecover
