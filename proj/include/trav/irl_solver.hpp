#pragma once

#include <vector>

#include "trav/common.hpp"
#include "trav/grid_mdp.hpp"
#include "trav/reward_model.hpp"

namespace trav {

/// Stochastic policy over path states. Probabilities are stored per cell for
/// the full action alphabet; unavailable actions hold exactly 0.
class Policy {
 public:
  Policy() = default;
  Policy(int rows, int cols, int num_actions)
      : rows_(rows), cols_(cols), num_actions_(num_actions),
        probs_(static_cast<std::size_t>(rows) * cols * num_actions, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_actions() const { return num_actions_; }

  double& prob(int r, int c, Action a) { return probs_[offset(r, c) + action_code(a)]; }
  double prob(int r, int c, Action a) const { return probs_[offset(r, c) + action_code(a)]; }
  std::span<const double> row(int r, int c) const {
    return std::span<const double>(probs_).subspan(offset(r, c), num_actions_);
  }

 private:
  std::size_t offset(int r, int c) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * num_actions_;
  }

  int rows_ = 0;
  int cols_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

struct SoftSolution {
  Field value;  // V over path states; goal values are pinned to r_g
  Policy policy;
  int sweeps = 0;
  double residual = 0.0;
};

/// 2 * (rows + cols): enough sweeps for information to cross the grid.
int default_sweeps(const GridMdp& mdp);

/// Maximum-entropy soft value iteration with goal values pinned to r_g.
///
///   V_0(s) = r_p(s) + gamma r_g(s)
///   V_k(s) = r_p(s) + logsumexp_{a in A(s)} gamma V_{k-1}(T(s, a))
///
/// Stops after `sweeps` updates or once max |V_k - V_{k-1}| < tol. The
/// policy is the softmax of gamma V(T(s, a)) under the final values.
SoftSolution soft_value_iteration(const GridMdp& mdp, const RewardMaps& rewards, int sweeps,
                                  double tol = 1e-6);

/// Tempered policy pi(a|s) ~ exp(gamma V(T(s,a)) / temperature). A zero
/// temperature gives the argmax with ties broken by action-code order.
Policy tempered_policy(const GridMdp& mdp, const Field& value, const Field& goal_reward,
                       double temperature);

/// Uniform over the available actions of every path state.
Policy uniform_policy(const GridMdp& mdp);

struct VisitFrequencies {
  Field path;
  Field goal;
};

/// Demonstrated visitation: gamma^t per step t (1 when not discounted) and
/// gamma^|traj| on the terminal goal. Repeat visits accumulate.
VisitFrequencies demo_svf(const GridMdp& mdp, const Trajectory& traj, bool discounted = true);

struct PropagationResult {
  Field path;
  Field goal;
  double remaining_mass = 0.0;  // path mass still unabsorbed at the end
  int steps = 0;
  // remaining path mass + absorbed goal mass (undiscounted) after each step
  std::vector<double> mass_history;
};

/// Forward-propagates a start distribution under `policy` for up to
/// `horizon` steps, stopping once the remaining path mass drops below
/// `mass_cutoff`.
PropagationResult policy_propagation(const GridMdp& mdp, const Policy& policy, const Field& start,
                                     int horizon, bool discounted = true,
                                     double mass_cutoff = 1e-9);

struct SvfPair {
  Field demo_path;
  Field demo_goal;
  Field expected_path;
  Field expected_goal;
};

/// Reward-space gradient of the demonstration log-likelihood: demo - expected
/// for both maps. This is an ascent direction.
RewardMaps medirl_grad(const SvfPair& svf);

struct SolverOptions {
  int sweeps = 0;  // 0 = default_sweeps(mdp)
  double tol = 1e-6;
  bool discounted = true;
  int horizon = 0;  // 0 = twice the demonstration length
  double mass_cutoff = 1e-9;
};

struct MedirlResult {
  SoftSolution solution;
  SvfPair svf;
  RewardMaps grad;
};

/// One MEDIRL-Grad evaluation: solve, demo SVF, propagate from the first
/// demonstrated cell, and difference.
MedirlResult medirl_gradient(const GridMdp& mdp, const RewardMaps& rewards,
                             const Trajectory& demo, const SolverOptions& options = {});

}  // namespace trav
