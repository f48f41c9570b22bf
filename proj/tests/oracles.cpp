#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace trav::oracle {

namespace {

void dfs(const GridMdp& mdp, Trajectory& traj, Cell cur, int budget, const TrajectoryVisitor& visit) {
  for (Action a : mdp.available(cur.row, cur.col)) {
    traj.steps.push_back({cur, a});
    if (a == Action::End) {
      traj.terminal = cur;
      visit(traj);
    } else if (budget > 1) {
      const auto [dr, dc] = action_delta(a);
      dfs(mdp, traj, {cur.row + dr, cur.col + dc}, budget - 1, visit);
    }
    traj.steps.pop_back();
  }
}

}  // namespace

void enumerate_trajectories(const GridMdp& mdp, const Cell& start, int max_path_steps,
                            const TrajectoryVisitor& visit) {
  if (max_path_steps < 1) return;
  Trajectory traj;
  dfs(mdp, traj, start, max_path_steps, visit);
}

double direct_return(const Trajectory& traj, const RewardMaps& rewards, double gamma) {
  double g = 0.0;
  double w = 1.0;
  for (const Step& s : traj.steps) {
    g += w * rewards.path(s.cell.row, s.cell.col);
    w *= gamma;
  }
  return g + w * rewards.goal(traj.terminal.row, traj.terminal.col);
}

double enumerated_log_partition(const GridMdp& mdp, const RewardMaps& rewards, const Cell& start,
                                int max_path_steps) {
  std::vector<double> returns;
  enumerate_trajectories(mdp, start, max_path_steps, [&](const Trajectory& t) {
    returns.push_back(direct_return(t, rewards, mdp.gamma()));
  });
  // plain two-pass log-sum-exp, independent of the library helper
  double m = -INFINITY;
  for (double g : returns) m = std::max(m, g);
  double s = 0.0;
  for (double g : returns) s += std::exp(g - m);
  return m + std::log(s);
}

double enumerated_log_likelihood(const GridMdp& mdp, const RewardMaps& rewards,
                                 const Trajectory& demo, int max_path_steps) {
  return direct_return(demo, rewards, mdp.gamma()) -
         enumerated_log_partition(mdp, rewards, demo.steps.front().cell, max_path_steps);
}

MonteCarloSvf monte_carlo_svf(const GridMdp& mdp, const Policy& policy, const Cell& start,
                              int rollouts, int horizon, std::uint64_t seed) {
  const int n = mdp.num_path_states();
  std::vector<double> sum_p(n, 0.0), sq_p(n, 0.0), sum_g(n, 0.0), sq_g(n, 0.0);
  std::vector<int> count(n);
  Rng rng(seed);
  for (int k = 0; k < rollouts; ++k) {
    std::fill(count.begin(), count.end(), 0);
    Cell cur = start;
    int ended = -1;
    for (int t = 0; t < horizon; ++t) {
      ++count[mdp.cell_index(cur.row, cur.col)];
      double u = rng.uniform();
      const auto acts = mdp.available(cur.row, cur.col);
      Action a = acts.back();
      for (Action b : acts) {
        u -= policy.prob(cur.row, cur.col, b);
        if (u < 0.0) {
          a = b;
          break;
        }
      }
      if (a == Action::End) {
        ended = static_cast<int>(mdp.cell_index(cur.row, cur.col));
        break;
      }
      const auto [dr, dc] = action_delta(a);
      cur = {cur.row + dr, cur.col + dc};
    }
    for (int i = 0; i < n; ++i) {
      sum_p[i] += count[i];
      sq_p[i] += static_cast<double>(count[i]) * count[i];
      const double g = i == ended ? 1.0 : 0.0;
      sum_g[i] += g;
      sq_g[i] += g;
    }
  }
  MonteCarloSvf out{Field(mdp.rows(), mdp.cols()), Field(mdp.rows(), mdp.cols()),
                    Field(mdp.rows(), mdp.cols()), Field(mdp.rows(), mdp.cols())};
  const double m = rollouts;
  for (int i = 0; i < n; ++i) {
    out.path_mean[i] = sum_p[i] / m;
    out.path_se[i] = std::sqrt(std::max(0.0, sq_p[i] / m - out.path_mean[i] * out.path_mean[i]) / (m - 1.0));
    out.goal_mean[i] = sum_g[i] / m;
    out.goal_se[i] = std::sqrt(std::max(0.0, sq_g[i] / m - out.goal_mean[i] * out.goal_mean[i]) / (m - 1.0));
  }
  return out;
}

DenseChain dense_chain(const GridMdp& mdp, const Policy& policy) {
  DenseChain ch;
  ch.n = mdp.num_path_states();
  ch.move.assign(static_cast<std::size_t>(ch.n) * ch.n, 0.0);
  ch.end.assign(ch.n, 0.0);
  for (int r = 0; r < mdp.rows(); ++r) {
    for (int c = 0; c < mdp.cols(); ++c) {
      const auto from = mdp.cell_index(r, c);
      for (Action a : mdp.available(r, c)) {
        const double p = policy.prob(r, c, a);
        if (a == Action::End) {
          ch.end[from] += p;
        } else {
          const auto [dr, dc] = action_delta(a);
          ch.move[from * ch.n + mdp.cell_index(r + dr, c + dc)] += p;
        }
      }
    }
  }
  return ch;
}

DenseSvf dense_svf_finite(const GridMdp& mdp, const Policy& policy, const Field& start,
                          int horizon, double weight) {
  const DenseChain ch = dense_chain(mdp, policy);
  const int n = ch.n;
  // power = M^t, starting from the identity
  std::vector<double> power(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) power[i * n + i] = 1.0;
  DenseSvf out{Field(mdp.rows(), mdp.cols()), Field(mdp.rows(), mdp.cols())};
  double w = 1.0;
  for (int t = 0; t < horizon; ++t) {
    for (int j = 0; j < n; ++j) {
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += start[i] * power[i * n + j];
      out.path[j] += w * d;
      out.goal[j] += w * weight * d * ch.end[j];
    }
    std::vector<double> next(power.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) next[i * n + j] += power[i * n + k] * ch.move[k * n + j];
    power = std::move(next);
    w *= weight;
  }
  return out;
}

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) throw std::runtime_error("singular system");
    if (pivot != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

DenseSvf dense_svf_limit(const GridMdp& mdp, const Policy& policy, const Field& start,
                         double weight) {
  const DenseChain ch = dense_chain(mdp, policy);
  const int n = ch.n;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i * n + j] = (i == j ? 1.0 : 0.0) - weight * ch.move[j * n + i];
  }
  const std::vector<double> x =
      solve_linear(a, std::vector<double>(start.values().begin(), start.values().end()), n);
  DenseSvf out{Field(mdp.rows(), mdp.cols()), Field(mdp.rows(), mdp.cols())};
  for (int j = 0; j < n; ++j) {
    out.path[j] = x[j];
    out.goal[j] = weight * x[j] * ch.end[j];
  }
  return out;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

double max_abs_error(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

RewardMaps random_rewards(int rows, int cols, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  RewardMaps m(rows, cols);
  for (double& v : m.path.values()) v = rng.uniform(lo, hi);
  for (double& v : m.goal.values()) v = rng.uniform(lo, hi);
  return m;
}

FeatureStack random_features(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  FeatureStack f(rows, cols);
  for (double& v : f.data) v = rng.uniform(-1.0, 1.0);
  return f;
}

ImuWindow random_imu(int length, std::uint64_t seed) {
  Rng rng(seed);
  ImuWindow w(length);
  for (double& v : w.samples) v = rng.normal(0.0, 1.0);
  return w;
}

}  // namespace trav::oracle
