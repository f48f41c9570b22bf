#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trav/irl_solver.hpp"
#include "trav/ranking.hpp"
#include "trav/reward_model.hpp"
#include "trav/sample.hpp"

namespace trav {

enum class Algorithm { Medirl, TMedirl };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);  // "medirl" | "tmedirl"

struct TrainConfig {
  Algorithm algorithm = Algorithm::Medirl;
  double lr = 1e-3;
  int iterations = 0;
  std::uint64_t seed = 0;
  double gamma = 0.95;
  int sweeps = 0;  // 0 = 2 * (rows + cols)
  double tol = 1e-6;
  bool discounted = true;
  int horizon = 0;  // 0 = twice the demonstration length
  double weight_decay = 0.0;
  double dropout = 0.0;
  int checkpoint_every = 0;  // 0 = never
  int pairs_per_iter = 1;    // T-MEDIRL mini-batch of rank pairs

  SolverOptions solver_options() const;
  void validate() const;  // throws ConfigError
};

struct StepRecord {
  int iter = 0;
  double nll_proxy = 0.0;  // sum |D_tau - D_r| over path and goal maps
  double rank_loss = 0.0;
  double grad_norm = 0.0;
  double millis = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> records;
};

GridMdp mdp_for(const Sample& sample, double gamma);

/// Plain SGD ascent: theta <- theta * (1 - lr * weight_decay) + lr * grad.
void apply_update(ParamVector& params, double lr, double weight_decay);

/// Accumulates d L_D / d theta for one sample into model.params().grad()
/// and returns the sample's SVF residual. Leaves activations of `sample`.
double accumulate_demo_gradient(RewardModel& model, const Sample& sample, const TrainConfig& cfg);

struct PairGradient {
  double rank_loss = 0.0;
  double nll_proxy = 0.0;
};

/// Accumulates grad L_low + grad L_high - grad L_rank for one oriented pair
/// (`low` has the higher AEC). With `include_demo` false only the ranking
/// term (-grad L_rank) is accumulated.
PairGradient accumulate_pair_gradient(RewardModel& model, const Sample& low, const Sample& high,
                                      const TrainConfig& cfg, bool include_demo = true);

/// One MEDIRL iteration on a single sample.
StepRecord medirl_step(RewardModel& model, const Sample& sample, const TrainConfig& cfg);

/// One T-MEDIRL iteration on an oriented pair (low less preferred).
StepRecord tmedirl_step(RewardModel& model, const Sample& low, const Sample& high,
                        const TrainConfig& cfg);

using CheckpointFn = std::function<void(int iter, const ParamVector& params)>;

/// Runs cfg.iterations steps over the train split. The sample/pair sequence
/// and any dropout masks are drawn from cfg.seed.
TrainReport train(RewardModel& model, const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const CheckpointFn& on_checkpoint = {});

}  // namespace trav
