#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trav/common.hpp"
#include "trav/grid_mdp.hpp"

namespace trav {

/// Joint torques (N m) and joint displacements (rad), n stamps x m joints.
struct JointLog {
  int stamps = 0;
  int joints = 0;
  std::vector<double> torques;        // [stamp][joint]
  std::vector<double> displacements;  // [stamp][joint]
};

/// Locomotion energy: sum over stamps of <|u_i|, |dq_i|>.
double trajectory_energy(const JointLog& log);

/// Average energy consumption: energy per path step.
double aec(double energy, std::size_t length);

struct RankingLoss {
  double loss = 0.0;
  double d_low = 0.0;   // dL/dG_i for the less preferred trajectory
  double d_high = 0.0;  // dL/dG_j for the preferred trajectory
};

/// Pairwise logistic ranking loss for tau_i < tau_j:
///   L = -log(e^Gj / (e^Gi + e^Gj)) = softplus(Gi - Gj).
RankingLoss ranking_loss(double return_low, double return_high);

double softplus(double x);
double logistic(double x);

/// Undiscounted sum of path rewards over visited cells (with multiplicity).
double path_return(const Trajectory& traj, const Field& path_reward);

/// d path_return / d path_reward scaled by `scale`: `scale` per visit.
Field path_return_grad(const Trajectory& traj, int rows, int cols, double scale);

struct RankPair {
  std::size_t low = 0;   // higher AEC, less preferred
  std::size_t high = 0;  // lower AEC, preferred

  friend bool operator==(const RankPair&, const RankPair&) = default;
};

/// Draws `count` oriented pairs uniformly among candidates with distinct AEC.
/// Tied candidates are skipped and redrawn.
std::vector<RankPair> rank_pairs(std::span<const double> aecs, std::size_t count,
                                 std::uint64_t seed);

/// Same draw using a caller-owned generator.
RankPair draw_rank_pair(std::span<const double> aecs, Rng& rng);

}  // namespace trav
