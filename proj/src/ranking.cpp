#include "trav/ranking.hpp"

#include <cmath>
#include <set>

namespace trav {

double trajectory_energy(const JointLog& log) {
  const std::size_t n = static_cast<std::size_t>(log.stamps) * log.joints;
  if (log.stamps < 0 || log.joints < 0 || log.torques.size() != n ||
      log.displacements.size() != n) {
    throw DimensionError("joint log: torque and displacement arrays differ in shape");
  }
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(log.torques[i]) || !std::isfinite(log.displacements[i])) {
      throw DomainError("joint log contains a non-finite value");
    }
    energy += std::abs(log.torques[i]) * std::abs(log.displacements[i]);
  }
  return energy;
}

double aec(double energy, std::size_t length) {
  if (length == 0) throw DomainError("AEC of a zero-length trajectory");
  return energy / static_cast<double>(length);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RankingLoss ranking_loss(double return_low, double return_high) {
  if (!std::isfinite(return_low) || !std::isfinite(return_high)) {
    throw NumericError("ranking loss on a non-finite return");
  }
  const double margin = return_low - return_high;
  const double s = logistic(margin);
  return {softplus(margin), s, -s};
}

double path_return(const Trajectory& traj, const Field& path_reward) {
  double g = 0.0;
  for (const Step& step : traj.steps) {
    if (step.cell.row < 0 || step.cell.row >= path_reward.rows() || step.cell.col < 0 ||
        step.cell.col >= path_reward.cols()) {
      throw DimensionError("trajectory cell outside the reward field");
    }
    g += path_reward(step.cell.row, step.cell.col);
  }
  return g;
}

Field path_return_grad(const Trajectory& traj, int rows, int cols, double scale) {
  Field grad(rows, cols);
  for (const Step& step : traj.steps) grad(step.cell.row, step.cell.col) += scale;
  return grad;
}

RankPair draw_rank_pair(std::span<const double> aecs, Rng& rng) {
  if (aecs.size() < 2) throw DomainError("ranking needs at least two labelled trajectories");
  std::set<double> distinct(aecs.begin(), aecs.end());
  if (distinct.size() < 2) throw DomainError("ranking needs at least two distinct AEC values");
  for (;;) {
    const std::size_t i = rng.index(aecs.size());
    const std::size_t j = rng.index(aecs.size());
    if (aecs[i] == aecs[j]) continue;
    return aecs[i] > aecs[j] ? RankPair{i, j} : RankPair{j, i};
  }
}

std::vector<RankPair> rank_pairs(std::span<const double> aecs, std::size_t count,
                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RankPair> pairs;
  pairs.reserve(count);
  if (count == 0) {
    // still validate the labels
    draw_rank_pair(aecs, rng);
    return pairs;
  }
  for (std::size_t k = 0; k < count; ++k) pairs.push_back(draw_rank_pair(aecs, rng));
  return pairs;
}

}  // namespace trav
