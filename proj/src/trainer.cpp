#include "trav/trainer.hpp"

#include <chrono>
#include <cmath>

namespace trav {

namespace {

double svf_residual(const SvfPair& svf) {
  double s = 0.0;
  for (std::size_t i = 0; i < svf.demo_path.size(); ++i) {
    s += std::abs(svf.demo_path[i] - svf.expected_path[i]);
    s += std::abs(svf.demo_goal[i] - svf.expected_goal[i]);
  }
  return s;
}

MedirlResult solve_sample(const RewardMaps& rewards, const Sample& sample,
                          const TrainConfig& cfg) {
  try {
    return medirl_gradient(mdp_for(sample, cfg.gamma), rewards, sample.trajectory,
                           cfg.solver_options());
  } catch (const NumericError& e) {
    throw NumericError("sample " + sample.id + ": " + e.what());
  }
}

void check_grad(const ParamVector& params, const std::string& what) {
  if (!params.grad_finite()) throw NumericError("non-finite parameter gradient at " + what);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

std::string algorithm_name(Algorithm a) { return a == Algorithm::Medirl ? "medirl" : "tmedirl"; }

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "medirl") return Algorithm::Medirl;
  if (name == "tmedirl") return Algorithm::TMedirl;
  throw ConfigError("unknown algorithm '" + name + "'");
}

SolverOptions TrainConfig::solver_options() const {
  SolverOptions o;
  o.sweeps = sweeps;
  o.tol = tol;
  o.discounted = discounted;
  o.horizon = horizon;
  return o;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (iterations < 0) throw ConfigError("iteration count must be nonnegative");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be nonnegative");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout rate must lie in [0,1)");
  if (pairs_per_iter < 1) throw ConfigError("pairs per iteration must be at least 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)");
}

GridMdp mdp_for(const Sample& sample, double gamma) {
  GridSpec spec;
  spec.rows = sample.rows();
  spec.cols = sample.cols();
  spec.gamma = gamma;
  return GridMdp(spec);
}

void apply_update(ParamVector& params, double lr, double weight_decay) {
  auto values = params.values();
  const auto grad = params.grad();
  const double shrink = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weight_decay != 0.0) values[i] *= shrink;
    values[i] += lr * grad[i];
  }
}

double accumulate_demo_gradient(RewardModel& model, const Sample& sample, const TrainConfig& cfg) {
  const RewardMaps rewards = model.forward(sample.features, sample.imu);
  const MedirlResult res = solve_sample(rewards, sample, cfg);
  model.backward(res.grad);
  return svf_residual(res.svf);
}

PairGradient accumulate_pair_gradient(RewardModel& model, const Sample& low, const Sample& high,
                                      const TrainConfig& cfg, bool include_demo) {
  if (!low.trajectory.aec || !high.trajectory.aec) {
    throw ConfigError("T-MEDIRL needs AEC labels on both trajectories");
  }
  // Both samples are evaluated at the same pre-step parameters; the second
  // one runs on a copy so each keeps its own activations for backward.
  auto twin = model.clone();
  twin->params().zero_grad();

  const RewardMaps r_low = model.forward(low.features, low.imu);
  const RewardMaps r_high = twin->forward(high.features, high.imu);

  const RankingLoss rank = ranking_loss(path_return(low.trajectory, r_low.path),
                                        path_return(high.trajectory, r_high.path));

  PairGradient out;
  out.rank_loss = rank.loss;
  RewardMaps up_low(low.rows(), low.cols());
  RewardMaps up_high(high.rows(), high.cols());
  if (include_demo) {
    const MedirlResult m_low = solve_sample(r_low, low, cfg);
    const MedirlResult m_high = solve_sample(r_high, high, cfg);
    up_low = m_low.grad;
    up_high = m_high.grad;
    out.nll_proxy = svf_residual(m_low.svf) + svf_residual(m_high.svf);
  }
  // ascent direction carries -dL_rank/dG on every visited cell
  for (const Step& s : low.trajectory.steps) up_low.path(s.cell.row, s.cell.col) -= rank.d_low;
  for (const Step& s : high.trajectory.steps) up_high.path(s.cell.row, s.cell.col) -= rank.d_high;

  model.backward(up_low);
  twin->backward(up_high);
  auto grad = model.params().grad();
  const auto twin_grad = twin->params().grad();
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += twin_grad[i];
  return out;
}

StepRecord medirl_step(RewardModel& model, const Sample& sample, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  model.params().zero_grad();
  StepRecord rec;
  rec.nll_proxy = accumulate_demo_gradient(model, sample, cfg);
  check_grad(model.params(), "sample " + sample.id);
  rec.grad_norm = model.params().grad_norm();
  apply_update(model.params(), cfg.lr, cfg.weight_decay);
  rec.millis = elapsed_ms(start);
  return rec;
}

StepRecord tmedirl_step(RewardModel& model, const Sample& low, const Sample& high,
                        const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  model.params().zero_grad();
  StepRecord rec;
  const PairGradient pg = accumulate_pair_gradient(model, low, high, cfg);
  rec.nll_proxy = pg.nll_proxy;
  rec.rank_loss = pg.rank_loss;
  check_grad(model.params(), "pair " + low.id + "/" + high.id);
  rec.grad_norm = model.params().grad_norm();
  apply_update(model.params(), cfg.lr, cfg.weight_decay);
  rec.millis = elapsed_ms(start);
  return rec;
}

TrainReport train(RewardModel& model, const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const CheckpointFn& on_checkpoint) {
  cfg.validate();
  const std::vector<const Sample*> pool = select_split(dataset, Split::Train);
  if (pool.empty()) throw ConfigError("training split is empty");

  std::vector<double> aecs;
  if (cfg.algorithm == Algorithm::TMedirl) {
    for (const Sample* s : pool) {
      if (!s->trajectory.aec) throw ConfigError("sample " + s->id + " has no AEC label");
      aecs.push_back(*s->trajectory.aec);
    }
    // fails early when fewer than two distinct labels exist
    Rng probe(0);
    draw_rank_pair(aecs, probe);
  }

  Rng rng(derive_seed(cfg.seed, 0x7a1));
  TrainReport report;
  report.records.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    if (cfg.dropout > 0.0) model.set_training(true, derive_seed(cfg.seed, 1000 + iter));
    StepRecord rec;
    if (cfg.algorithm == Algorithm::Medirl) {
      rec = medirl_step(model, *pool[rng.index(pool.size())], cfg);
    } else if (cfg.pairs_per_iter == 1) {
      const RankPair pair = draw_rank_pair(aecs, rng);
      rec = tmedirl_step(model, *pool[pair.low], *pool[pair.high], cfg);
    } else {
      const auto start = std::chrono::steady_clock::now();
      model.params().zero_grad();
      for (int k = 0; k < cfg.pairs_per_iter; ++k) {
        const RankPair pair = draw_rank_pair(aecs, rng);
        const PairGradient pg = accumulate_pair_gradient(model, *pool[pair.low], *pool[pair.high], cfg);
        rec.nll_proxy += pg.nll_proxy;
        rec.rank_loss += pg.rank_loss;
      }
      check_grad(model.params(), "iteration " + std::to_string(iter));
      rec.grad_norm = model.params().grad_norm();
      apply_update(model.params(), cfg.lr, cfg.weight_decay);
      rec.millis = elapsed_ms(start);
    }
    rec.iter = iter;
    report.records.push_back(rec);
    if (on_checkpoint && cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0) {
      on_checkpoint(iter + 1, model.params());
    }
  }
  model.set_training(false);
  return report;
}

}  // namespace trav
