#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "trav/grid_mdp.hpp"
#include "trav/irl_solver.hpp"
#include "trav/reward_model.hpp"
#include "trav/sample.hpp"

namespace trav {

/// Mean over steps (End included) of -ln pi(a_t | s_t), natural log.
/// A zero-probability demonstrated action yields +infinity.
double nll(const Policy& policy, const Trajectory& traj);

inline bool nll_is_infinite(double v) { return v == std::numeric_limits<double>::infinity(); }

/// Symmetric Hausdorff distance between two cell sets, Euclidean in cell
/// coordinates. Throws DomainError when either set is empty.
double hausdorff(std::span<const Cell> a, std::span<const Cell> b);

/// Distinct visited cells (path cells plus terminal), in first-visit order.
std::vector<Cell> trajectory_cells(const Trajectory& traj);

/// Fraction of unordered pairs with distinct AEC where the higher return has
/// the smaller AEC. Return ties count as incorrect. Throws DomainError if no
/// valid pair exists.
double rank_accuracy(std::span<const double> returns, std::span<const double> aecs);

/// Most-likely rollout: argmax action (lowest code on ties) until End; End
/// is forced at the current cell once `horizon` moves have been made.
Trajectory plan_path(const GridMdp& mdp, const Policy& policy, const Cell& start, int horizon);

/// Stochastic rollout of `policy` with the same forced-End rule.
Trajectory sample_path(const GridMdp& mdp, const Policy& policy, const Cell& start, int horizon,
                       Rng& rng);

/// Spearman rank correlation with average ranks for ties. Throws DomainError
/// on size mismatch or when either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);
double spearman(const Field& a, const Field& b);

struct SampleEval {
  std::string id;
  double nll = 0.0;
  double hd = 0.0;
  double path_return = 0.0;  // undiscounted learned path return of the demo
  double planned_aec = 0.0;
  double spearman = 0.0;
  Trajectory planned;
};

struct EvalReport {
  double nll = 0.0;
  double hd = 0.0;
  double rank_acc = 0.0;
  double mean_aec = 0.0;
  double spearman = 0.0;
  bool nll_infinite = false;  // some demonstrated action had probability 0
  bool has_spearman = false;  // needs gt_cost on every test sample
  bool has_rank_acc = false;  // needs >= 2 distinct AEC labels
  std::vector<SampleEval> samples;
};

/// Planned-path AEC scorer; receives the test sample and its greedy plan.
using AecFn = std::function<double(const Sample&, const Trajectory&)>;

struct EvalOptions {
  double gamma = 0.95;
  int sweeps = 0;  // 0 = 2 * (rows + cols)
  double tol = 1e-6;
  int hd_rollouts = 16;
  int horizon = 0;   // 0 = 4 * (rows + cols)
  bool uniform_baseline = false;  // score the uniform policy instead of the model
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = TRAV_THREADS or 1
  AecFn planned_aec;  // mean_aec stays 0 when unset
};

/// Per-test-sample policy evaluation averaged into an EvalReport.
/// Throws ConfigError when the test split is empty.
EvalReport evaluate(const RewardModel& model, const std::vector<Sample>& dataset,
                    const EvalOptions& options);

/// Worker count from TRAV_THREADS (>= 1), defaulting to 1.
int eval_threads();

}  // namespace trav
