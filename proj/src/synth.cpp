#include "trav/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "trav/irl_solver.hpp"

namespace trav {

namespace {

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }

// Bilinearly interpolated lattice noise in [0, 1].
Field value_noise(int rows, int cols, int spacing, Rng& rng) {
  const int lr = rows / spacing + 2;
  const int lc = cols / spacing + 2;
  std::vector<double> lattice(static_cast<std::size_t>(lr) * lc);
  for (double& v : lattice) v = rng.uniform();
  Field out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int i = r / spacing;
    const double fr = smoothstep(static_cast<double>(r % spacing) / spacing);
    for (int c = 0; c < cols; ++c) {
      const int j = c / spacing;
      const double fc = smoothstep(static_cast<double>(c % spacing) / spacing);
      const double v00 = lattice[i * lc + j], v01 = lattice[i * lc + j + 1];
      const double v10 = lattice[(i + 1) * lc + j], v11 = lattice[(i + 1) * lc + j + 1];
      out(r, c) = (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11);
    }
  }
  return out;
}

// Central differences inside, one-sided at the border; metres per cell.
Field gradient_magnitude(const Field& h) {
  Field out(h.rows(), h.cols());
  for (int r = 0; r < h.rows(); ++r) {
    for (int c = 0; c < h.cols(); ++c) {
      double gr = 0.0, gc = 0.0;
      if (h.rows() > 1) {
        const int r0 = std::max(0, r - 1), r1 = std::min(h.rows() - 1, r + 1);
        gr = (h(r1, c) - h(r0, c)) / (r1 - r0);
      }
      if (h.cols() > 1) {
        const int c0 = std::max(0, c - 1), c1 = std::min(h.cols() - 1, c + 1);
        gc = (h(r, c1) - h(r, c0)) / (c1 - c0);
      }
      out(r, c) = std::hypot(gr, gc);
    }
  }
  return out;
}

constexpr double kRoughSlope = 0.1;

// Discounted (hard) value iteration on the demonstrator's reward.
Field optimal_values(const GridMdp& mdp, const Field& path_reward, const Field& goal_reward) {
  const double gamma = mdp.gamma();
  Field v(mdp.rows(), mdp.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = path_reward[i] + gamma * goal_reward[i];
  Field next = v;
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double residual = 0.0;
    for (int r = 0; r < mdp.rows(); ++r) {
      for (int c = 0; c < mdp.cols(); ++c) {
        double best = -INFINITY;
        for (Action a : mdp.available(r, c)) {
          const auto [dr, dc] = action_delta(a);
          const double succ = a == Action::End ? goal_reward(r, c) : v(r + dr, c + dc);
          best = std::max(best, gamma * succ);
        }
        next(r, c) = path_reward(r, c) + best;
        residual = std::max(residual, std::abs(next(r, c) - v(r, c)));
      }
    }
    std::swap(v, next);
    if (residual < 1e-12) break;
  }
  return v;
}

}  // namespace

World gen_world(const WorldSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ConfigError("world dimensions must be positive");
  if (spec.obstacle_density < 0.0 || spec.obstacle_density > 1.0 || spec.roughness < 0.0) {
    throw ConfigError("obstacle density must lie in [0,1] and roughness be nonnegative");
  }
  const SynthConstants& k = spec.constants;
  Rng rng(derive_seed(spec.seed, 0x301d));

  World w;
  w.features = FeatureStack(spec.rows, spec.cols);
  const Field noise = value_noise(spec.rows, spec.cols, k.noise_lattice, rng);
  Field elevation(spec.rows, spec.cols);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    elevation[i] = spec.roughness * k.elevation_amplitude * noise[i];
  }
  w.slope = gradient_magnitude(elevation);
  w.obstacle = Field(spec.rows, spec.cols);
  w.gt_cost = Field(spec.rows, spec.cols);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const bool obstacle = rng.uniform() < spec.obstacle_density;
      const double slope = w.slope(r, c);
      const double variance =
          spec.roughness * slope + (obstacle ? k.obstacle_variance : 0.0);
      w.obstacle(r, c) = obstacle ? 1.0 : 0.0;
      w.gt_cost(r, c) = k.c0 + k.c1 * variance + k.c2 * slope + (obstacle ? k.c_obs : 0.0);

      const auto& rgb = obstacle              ? k.obstacle_rgb
                        : slope > kRoughSlope ? k.rough_rgb
                                              : k.smooth_rgb;
      w.features.at(FeatureStack::Elevation, r, c) = elevation(r, c);
      w.features.at(FeatureStack::Variance, r, c) = variance;
      for (int ch = 0; ch < 3; ++ch) {
        w.features.at(FeatureStack::Red + ch, r, c) =
            std::clamp(rgb[ch] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
      }
    }
  }
  return w;
}

Cell default_start(const WorldSpec& spec) { return {spec.rows / 2, spec.cols / 2}; }

Field goal_bonus_field(const WorldSpec& spec, const Cell& start, std::uint64_t seed,
                       Cell* target) {
  Rng rng(derive_seed(seed, 0x60a1));
  const int min_dist =
      std::max(1, static_cast<int>(spec.constants.goal_min_distance * (spec.rows + spec.cols)));
  const int max_dist =
      std::max(min_dist, static_cast<int>(spec.constants.goal_max_distance * (spec.rows + spec.cols)));
  std::vector<Cell> candidates;
  for (int r = 0; r < spec.rows; ++r)
    for (int c = 0; c < spec.cols; ++c) {
      const int d = std::abs(r - start.row) + std::abs(c - start.col);
      if (d >= min_dist && d <= max_dist) candidates.push_back({r, c});
    }
  if (candidates.empty()) {
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c)
        if (r != start.row || c != start.col || spec.rows * spec.cols == 1)
          candidates.push_back({r, c});
  }
  const Cell chosen = candidates[rng.index(candidates.size())];
  if (target) *target = chosen;
  Field goal(spec.rows, spec.cols);
  goal(chosen.row, chosen.col) = spec.constants.goal_bonus;
  return goal;
}

Trajectory gen_demo(const WorldSpec& spec, const World& world, const Cell& start,
                    const Field& goal_reward, double beta, std::uint64_t seed) {
  if (beta < 0.0) throw ConfigError("demonstrator temperature must be nonnegative");
  GridSpec gs;
  gs.rows = world.gt_cost.rows();
  gs.cols = world.gt_cost.cols();
  gs.gamma = spec.gamma;
  const GridMdp mdp(gs);
  if (!mdp.in_grid(start.row, start.col)) throw DomainError("demonstration start outside grid");

  Field path_reward(gs.rows, gs.cols);
  for (std::size_t i = 0; i < path_reward.size(); ++i) path_reward[i] = -world.gt_cost[i];
  const Field values = optimal_values(mdp, path_reward, goal_reward);
  const Policy policy = tempered_policy(mdp, values, goal_reward, beta);

  Rng rng(derive_seed(seed, 0xde70));
  const int cap = 4 * (gs.rows + gs.cols);
  Trajectory traj;
  Cell cell = start;
  for (int t = 0;; ++t) {
    Action action = Action::End;
    if (t + 1 < cap) {
      const auto actions = mdp.available(cell.row, cell.col);
      const double u = rng.uniform();
      double acc = 0.0;
      action = actions.back();
      for (Action a : actions) {
        acc += policy.prob(cell.row, cell.col, a);
        if (u < acc) {
          action = a;
          break;
        }
      }
    }
    traj.steps.push_back({cell, action});
    if (action == Action::End) break;
    const StateId next = mdp.transition({StateKind::Path, cell.row, cell.col}, action);
    cell = {next.row, next.col};
  }
  traj.terminal = cell;
  return traj;
}

Trajectory gen_demo(const WorldSpec& spec, const World& world, const Cell& start, double beta,
                    std::uint64_t seed) {
  return gen_demo(spec, world, start, goal_bonus_field(spec, start, seed), beta, seed);
}

ImuWindow gen_imu(const WorldSpec& spec, const World& world, const Trajectory& traj, int length,
                  std::uint64_t seed) {
  if (length < ImuWindow::kMinLength) throw ConfigError("IMU window shorter than 8 samples");
  if (traj.steps.empty()) throw DomainError("IMU synthesis needs a non-empty trajectory");
  double mean_variance = 0.0;
  for (const Step& s : traj.steps) {
    mean_variance += world.features.at(FeatureStack::Variance, s.cell.row, s.cell.col);
  }
  mean_variance /= static_cast<double>(traj.steps.size());
  const SynthConstants& k = spec.constants;
  const double stddev = k.imu_base_std + k.imu_variance_gain * mean_variance;

  Rng rng(derive_seed(seed, 0x1e0));
  ImuWindow imu(length);
  for (int t = 0; t < length; ++t) {
    for (int ch = 0; ch < ImuWindow::kChannels; ++ch) {
      imu.at(t, ch) = rng.normal(ch == 2 ? k.gravity : 0.0, stddev);
    }
  }
  return imu;
}

EnergyLabel gen_energy(const WorldSpec& spec, const World& world, const Trajectory& traj,
                       double noise_std, std::uint64_t seed) {
  if (traj.steps.empty()) throw DomainError("energy synthesis needs a non-empty trajectory");
  const SynthConstants& k = spec.constants;
  const int m = k.joints;
  Rng rng(derive_seed(seed, 0xe4e));

  // fixed displacement pattern; torques are scaled to hit each step's target
  std::vector<double> dq(m), u_shape(m);
  double unit = 0.0;
  for (int j = 0; j < m; ++j) {
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    dq[j] = sign * 0.01 * (1.0 + 0.1 * j);
    u_shape[j] = -sign * (1.0 + 0.05 * j);
    unit += std::abs(u_shape[j]) * std::abs(dq[j]);
  }

  EnergyLabel out;
  JointLog& log = out.log;
  log.stamps = static_cast<int>(traj.steps.size());
  log.joints = m;
  log.torques.reserve(static_cast<std::size_t>(log.stamps) * m);
  log.displacements.reserve(log.torques.capacity());
  for (const Step& s : traj.steps) {
    double target = k.energy_per_cost * world.gt_cost(s.cell.row, s.cell.col);
    if (noise_std > 0.0) target = std::max(0.0, target + rng.normal(0.0, noise_std));
    const double scale = target / unit;
    for (int j = 0; j < m; ++j) {
      log.torques.push_back(scale * u_shape[j]);
      log.displacements.push_back(dq[j]);
    }
  }
  out.aec = aec(trajectory_energy(log), traj.steps.size());
  return out;
}

void paint_goal_marker(FeatureStack& features, const Cell& target) {
  features.at(FeatureStack::Red, target.row, target.col) = 1.0;
  features.at(FeatureStack::Green, target.row, target.col) = 1.0;
  features.at(FeatureStack::Blue, target.row, target.col) = 0.0;
}

double synthetic_aec(const Field& gt_cost, const Trajectory& traj, const SynthConstants& k) {
  WorldSpec spec;
  spec.rows = gt_cost.rows();
  spec.cols = gt_cost.cols();
  spec.constants = k;
  World world;
  world.gt_cost = gt_cost;
  return gen_energy(spec, world, traj, 0.0, 0).aec;
}

std::vector<Sample> gen_dataset(const WorldSpec& spec, int count, double train_ratio) {
  if (count < 2) throw ConfigError("a dataset needs at least two samples");
  if (train_ratio < 0.0 || train_ratio > 1.0) throw ConfigError("split ratio outside [0,1]");
  const int n_train = static_cast<int>(std::lround(count * train_ratio));
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    WorldSpec ws = spec;
    ws.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
    World world = gen_world(ws);
    const Cell start = default_start(ws);
    const std::uint64_t demo_seed = derive_seed(ws.seed, 1);
    Cell target;
    const Field goal = goal_bonus_field(ws, start, demo_seed, &target);
    if (ws.constants.goal_marker) paint_goal_marker(world.features, target);
    Trajectory traj = gen_demo(ws, world, start, goal, ws.beta, demo_seed);
    const EnergyLabel energy = gen_energy(ws, world, traj, ws.energy_noise, derive_seed(ws.seed, 2));
    traj.aec = energy.aec;

    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "s%05d", i);
    s.id = id;
    s.imu = gen_imu(ws, world, traj, ws.imu_length, derive_seed(ws.seed, 3));
    s.features = std::move(world.features);
    s.trajectory = std::move(traj);
    s.gt_cost = std::move(world.gt_cost);
    s.split = i < n_train ? Split::Train : Split::Test;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace trav
