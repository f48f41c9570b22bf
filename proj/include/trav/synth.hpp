#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trav/grid_mdp.hpp"
#include "trav/ranking.hpp"
#include "trav/reward_model.hpp"
#include "trav/sample.hpp"

namespace trav {

/// Generator constants. gt_cost = c0 + c1 * variance + c2 * slope + c_obs * obstacle.
struct SynthConstants {
  double c0 = 0.2;
  double c1 = 5.0;
  double c2 = 2.0;
  double c_obs = 10.0;
  double energy_per_cost = 0.05;    // k: per-step energy = k * gt_cost
  double elevation_amplitude = 2.0;  // metres at roughness 1
  int noise_lattice = 2;             // value-noise lattice spacing in cells
  double obstacle_variance = 0.05;   // variance bump on obstacle cells
  double goal_bonus = 100.0;
  // target Manhattan distance from the start, as fractions of rows + cols
  double goal_min_distance = 0.25;
  double goal_max_distance = 1.0;
  double imu_base_std = 0.05;
  double imu_variance_gain = 0.5;
  double gravity = 9.81;
  int joints = 12;
  // terrain class colours, jittered by +-0.05 per channel
  std::array<double, 3> smooth_rgb{0.15, 0.75, 0.15};
  std::array<double, 3> rough_rgb{0.60, 0.40, 0.15};
  std::array<double, 3> obstacle_rgb{0.30, 0.30, 0.90};
  bool goal_marker = true;  // paint the demonstrator's target cell yellow
};

struct WorldSpec {
  int rows = 16;
  int cols = 16;
  std::uint64_t seed = 0;
  double obstacle_density = 0.3;
  double roughness = 1.0;
  double beta = 0.0;  // demonstrator temperature, 0 = greedy optimal
  double energy_noise = 0.0;
  int imu_length = 100;
  double gamma = 0.95;
  SynthConstants constants;
};

struct World {
  FeatureStack features;
  Field gt_cost;
  Field obstacle;  // 1 on obstacle cells, else 0
  Field slope;
};

World gen_world(const WorldSpec& spec);

/// Demonstrator goal field: goal_bonus at one seeded target cell, 0 elsewhere.
Field goal_bonus_field(const WorldSpec& spec, const Cell& start, std::uint64_t seed,
                       Cell* target = nullptr);

/// Boltzmann demonstrator on reward -gt_cost (path) and `goal_reward`,
/// with action scores gamma * V*(T(s, a)) from discounted value iteration.
/// beta = 0 plays the argmax (ties by action code order). Forced End at
/// the 4 * (rows + cols) horizon cap.
Trajectory gen_demo(const WorldSpec& spec, const World& world, const Cell& start,
                    const Field& goal_reward, double beta, std::uint64_t seed);

/// Convenience overload drawing the goal field from `seed`.
Trajectory gen_demo(const WorldSpec& spec, const World& world, const Cell& start, double beta,
                    std::uint64_t seed);

ImuWindow gen_imu(const WorldSpec& spec, const World& world, const Trajectory& traj, int length,
                  std::uint64_t seed);

struct EnergyLabel {
  JointLog log;
  double aec = 0.0;
};

EnergyLabel gen_energy(const WorldSpec& spec, const World& world, const Trajectory& traj,
                       double noise_std, std::uint64_t seed);

/// Pure yellow (1, 1, 0) in the colour channels at `target`.
void paint_goal_marker(FeatureStack& features, const Cell& target);

/// Noise-free synthetic AEC of a trajectory over a ground-truth cost field.
double synthetic_aec(const Field& gt_cost, const Trajectory& traj, const SynthConstants& k = {});

/// Map centre, where every synthetic demonstration starts.
Cell default_start(const WorldSpec& spec);

/// `count` samples from distinct world seeds; the first round(count * ratio)
/// are train, the rest test.
std::vector<Sample> gen_dataset(const WorldSpec& spec, int count, double train_ratio = 0.7);

}  // namespace trav
