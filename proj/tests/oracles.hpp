#pragma once

// Brute-force reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the solver code under test.

#include <functional>
#include <span>
#include <vector>

#include "trav/grid_mdp.hpp"
#include "trav/irl_solver.hpp"
#include "trav/reward_model.hpp"

namespace trav::oracle {

using TrajectoryVisitor = std::function<void(const Trajectory&)>;

// Every trajectory from `start` that ends with End after at most
// `max_path_steps` path steps (the End step counts as a path step).
void enumerate_trajectories(const GridMdp& mdp, const Cell& start, int max_path_steps,
                            const TrajectoryVisitor& visit);

// sum_t gamma^t r_p(s_t) + gamma^n r_g(terminal), computed directly.
double direct_return(const Trajectory& traj, const RewardMaps& rewards, double gamma);

// log sum_tau exp(return(tau)) over enumerate_trajectories(start, max_path_steps).
double enumerated_log_partition(const GridMdp& mdp, const RewardMaps& rewards, const Cell& start,
                                int max_path_steps);

// return(demo) - log Z, with Z enumerated from the demo's first cell.
double enumerated_log_likelihood(const GridMdp& mdp, const RewardMaps& rewards,
                                 const Trajectory& demo, int max_path_steps);

struct DenseSvf {
  Field path;
  Field goal;
};

// Transition matrix over path states (row = from, col = to) and End probabilities.
struct DenseChain {
  int n = 0;
  std::vector<double> move;  // n x n
  std::vector<double> end;   // n
};

DenseChain dense_chain(const GridMdp& mdp, const Policy& policy);

// Finite-horizon visitation via explicit matrix powers M^t.
DenseSvf dense_svf_finite(const GridMdp& mdp, const Policy& policy, const Field& start,
                          int horizon, double weight);

// Infinite-horizon visitation (I - w M^T)^{-1} d0 by Gaussian elimination.
DenseSvf dense_svf_limit(const GridMdp& mdp, const Policy& policy, const Field& start,
                         double weight);

struct MonteCarloSvf {
  Field path_mean, path_se;
  Field goal_mean, goal_se;
};

// Undiscounted visit counts of `rollouts` sampled episodes from `start`,
// truncated after `horizon` path steps.
MonteCarloSvf monte_carlo_svf(const GridMdp& mdp, const Policy& policy, const Cell& start,
                              int rollouts, int horizon, std::uint64_t seed);

// Solves A x = b in place (row-major n x n, partial pivoting).
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, int n);

// Central differences of f at x with step h.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor);

double max_abs_error(std::span<const double> a, std::span<const double> b);

// Uniform random reward maps in [lo, hi].
RewardMaps random_rewards(int rows, int cols, double lo, double hi, std::uint64_t seed);

// Small random feature stack / IMU window for gradient checks.
FeatureStack random_features(int rows, int cols, std::uint64_t seed);
ImuWindow random_imu(int length, std::uint64_t seed);

}  // namespace trav::oracle
