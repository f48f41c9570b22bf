#include "trav/irl_solver.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace trav {

namespace {

void check_rewards(const GridMdp& mdp, const RewardMaps& rewards) {
  if (rewards.path.rows() != mdp.rows() || rewards.path.cols() != mdp.cols() ||
      !rewards.path.same_shape(rewards.goal)) {
    throw DimensionError("reward maps do not match the grid");
  }
  if (!rewards.path.all_finite() || !rewards.goal.all_finite()) {
    throw NumericError("non-finite reward");
  }
}

// Value of the successor of (r, c) under a: V for path states, r_g for goals.
double successor_value(const Field& value, const Field& goal_reward, int r, int c, Action a) {
  if (a == Action::End) return goal_reward(r, c);
  const auto [dr, dc] = action_delta(a);
  return value(r + dr, c + dc);
}

[[noreturn]] void throw_numeric(int r, int c, int sweep) {
  std::ostringstream msg;
  msg << "non-finite soft value at path state (" << r << "," << c << ") in sweep " << sweep;
  throw NumericError(msg.str());
}

}  // namespace

int default_sweeps(const GridMdp& mdp) { return 2 * (mdp.rows() + mdp.cols()); }

SoftSolution soft_value_iteration(const GridMdp& mdp, const RewardMaps& rewards, int sweeps,
                                  double tol) {
  if (sweeps < 1) throw DomainError("soft value iteration needs at least one sweep");
  check_rewards(mdp, rewards);
  const double gamma = mdp.gamma();
  const Field& rp = rewards.path;
  const Field& rg = rewards.goal;

  Field prev(mdp.rows(), mdp.cols());
  for (std::size_t i = 0; i < prev.size(); ++i) prev[i] = rp[i] + gamma * rg[i];
  Field next(mdp.rows(), mdp.cols());

  SoftSolution sol;
  std::array<double, kMaxActions> scores{};
  for (int k = 1; k <= sweeps; ++k) {
    double residual = 0.0;
    for (int r = 0; r < mdp.rows(); ++r) {
      for (int c = 0; c < mdp.cols(); ++c) {
        const auto actions = mdp.available(r, c);
        for (std::size_t i = 0; i < actions.size(); ++i) {
          scores[i] = gamma * successor_value(prev, rg, r, c, actions[i]);
        }
        const double v =
            rp(r, c) + log_sum_exp(std::span<const double>(scores.data(), actions.size()));
        if (!std::isfinite(v)) throw_numeric(r, c, k);
        residual = std::max(residual, std::abs(v - prev(r, c)));
        next(r, c) = v;
      }
    }
    std::swap(prev, next);
    sol.sweeps = k;
    sol.residual = residual;
    if (residual < tol) break;
  }
  sol.value = std::move(prev);
  sol.policy = tempered_policy(mdp, sol.value, rg, 1.0);
  return sol;
}

Policy tempered_policy(const GridMdp& mdp, const Field& value, const Field& goal_reward,
                       double temperature) {
  if (temperature < 0.0) throw DomainError("negative policy temperature");
  const double gamma = mdp.gamma();
  Policy policy(mdp.rows(), mdp.cols(), mdp.num_actions());
  std::array<double, kMaxActions> scores{};
  for (int r = 0; r < mdp.rows(); ++r) {
    for (int c = 0; c < mdp.cols(); ++c) {
      const auto actions = mdp.available(r, c);
      const std::size_t n = actions.size();
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = gamma * successor_value(value, goal_reward, r, c, actions[i]);
      }
      if (temperature == 0.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (scores[i] > scores[best]) best = i;
        policy.prob(r, c, actions[best]) = 1.0;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) scores[i] /= temperature;
      const double lse = log_sum_exp(std::span<const double>(scores.data(), n));
      if (!std::isfinite(lse)) throw_numeric(r, c, 0);
      for (std::size_t i = 0; i < n; ++i) {
        policy.prob(r, c, actions[i]) = std::exp(scores[i] - lse);
      }
    }
  }
  return policy;
}

Policy uniform_policy(const GridMdp& mdp) {
  Policy policy(mdp.rows(), mdp.cols(), mdp.num_actions());
  for (int r = 0; r < mdp.rows(); ++r) {
    for (int c = 0; c < mdp.cols(); ++c) {
      const auto actions = mdp.available(r, c);
      for (Action a : actions) policy.prob(r, c, a) = 1.0 / static_cast<double>(actions.size());
    }
  }
  return policy;
}

VisitFrequencies demo_svf(const GridMdp& mdp, const Trajectory& traj, bool discounted) {
  require_valid(mdp, traj);
  VisitFrequencies out{Field(mdp.rows(), mdp.cols()), Field(mdp.rows(), mdp.cols())};
  const double gamma = discounted ? mdp.gamma() : 1.0;
  double weight = 1.0;
  for (const Step& step : traj.steps) {
    out.path(step.cell.row, step.cell.col) += weight;
    weight *= gamma;
  }
  out.goal(traj.terminal.row, traj.terminal.col) += weight;
  return out;
}

PropagationResult policy_propagation(const GridMdp& mdp, const Policy& policy, const Field& start,
                                     int horizon, bool discounted, double mass_cutoff) {
  if (horizon < 1) throw DomainError("propagation horizon must be at least 1");
  if (start.rows() != mdp.rows() || start.cols() != mdp.cols() ||
      policy.rows() != mdp.rows() || policy.cols() != mdp.cols()) {
    throw DimensionError("start distribution or policy does not match the grid");
  }
  double total = 0.0;
  for (double v : start.values()) {
    if (!(v >= 0.0)) throw DomainError("start distribution has a negative or NaN entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("start distribution sums to " + std::to_string(total) + ", not 1");
  }

  const double gamma = discounted ? mdp.gamma() : 1.0;
  PropagationResult out;
  out.path = Field(mdp.rows(), mdp.cols());
  out.goal = Field(mdp.rows(), mdp.cols());
  Field current = start;
  Field next(mdp.rows(), mdp.cols());
  double weight = 1.0;
  double absorbed = 0.0;
  double remaining = total;
  for (int t = 0; t < horizon; ++t) {
    std::fill(next.values().begin(), next.values().end(), 0.0);
    remaining = 0.0;
    for (int r = 0; r < mdp.rows(); ++r) {
      for (int c = 0; c < mdp.cols(); ++c) {
        const double mass = current(r, c);
        if (mass == 0.0) continue;
        out.path(r, c) += weight * mass;
        for (Action a : mdp.available(r, c)) {
          const double moved = mass * policy.prob(r, c, a);
          if (a == Action::End) {
            out.goal(r, c) += weight * gamma * moved;
            absorbed += moved;
          } else {
            const auto [dr, dc] = action_delta(a);
            next(r + dr, c + dc) += moved;
          }
        }
      }
    }
    for (double v : next.values()) remaining += v;
    std::swap(current, next);
    weight *= gamma;
    out.steps = t + 1;
    out.mass_history.push_back(remaining + absorbed);
    if (remaining < mass_cutoff) break;
  }
  out.remaining_mass = remaining;
  return out;
}

RewardMaps medirl_grad(const SvfPair& svf) {
  if (!svf.demo_path.same_shape(svf.expected_path) || !svf.demo_goal.same_shape(svf.expected_goal) ||
      !svf.demo_path.same_shape(svf.demo_goal)) {
    throw DimensionError("visitation fields differ in shape");
  }
  RewardMaps g(svf.demo_path.rows(), svf.demo_path.cols());
  for (std::size_t i = 0; i < g.path.size(); ++i) {
    g.path[i] = svf.demo_path[i] - svf.expected_path[i];
    g.goal[i] = svf.demo_goal[i] - svf.expected_goal[i];
  }
  return g;
}

MedirlResult medirl_gradient(const GridMdp& mdp, const RewardMaps& rewards,
                             const Trajectory& demo, const SolverOptions& options) {
  require_valid(mdp, demo);
  MedirlResult out;
  const int sweeps = options.sweeps > 0 ? options.sweeps : default_sweeps(mdp);
  out.solution = soft_value_iteration(mdp, rewards, sweeps, options.tol);

  VisitFrequencies demo_f = demo_svf(mdp, demo, options.discounted);
  Field start(mdp.rows(), mdp.cols());
  start(demo.steps.front().cell.row, demo.steps.front().cell.col) = 1.0;
  const int horizon =
      options.horizon > 0 ? options.horizon : 2 * static_cast<int>(demo.length());
  PropagationResult expected = policy_propagation(mdp, out.solution.policy, start, horizon,
                                                  options.discounted, options.mass_cutoff);

  out.svf = SvfPair{std::move(demo_f.path), std::move(demo_f.goal), std::move(expected.path),
                    std::move(expected.goal)};
  out.grad = medirl_grad(out.svf);
  return out;
}

}  // namespace trav
