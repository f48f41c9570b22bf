#include <gtest/gtest.h>

#include <cmath>

#include "trav/ranking.hpp"
#include "trav/synth.hpp"

using namespace trav;

namespace {

WorldSpec spec(int rows, int cols, std::uint64_t seed) {
  WorldSpec s;
  s.rows = rows;
  s.cols = cols;
  s.seed = seed;
  return s;
}

GridMdp grid_for(const WorldSpec& s) {
  GridSpec g;
  g.rows = s.rows;
  g.cols = s.cols;
  g.gamma = s.gamma;
  return GridMdp(g);
}

Trajectory straight(Cell start, Action a, int moves) {
  Trajectory t;
  Cell cur = start;
  for (int i = 0; i < moves; ++i) {
    t.steps.push_back({cur, a});
    const auto [dr, dc] = action_delta(a);
    cur = {cur.row + dr, cur.col + dc};
  }
  t.steps.push_back({cur, Action::End});
  t.terminal = cur;
  return t;
}

}  // namespace

TEST(GenWorld, FlatWorldHasBaseCost) {
  WorldSpec s = spec(8, 9, 3);
  s.roughness = 0.0;
  s.obstacle_density = 0.0;
  const World w = gen_world(s);
  for (double v : w.gt_cost.values()) EXPECT_DOUBLE_EQ(v, 0.2);
  for (double v : w.features.plane(FeatureStack::Variance)) EXPECT_EQ(v, 0.0);
}

TEST(GenWorld, ObstaclesDominate) {
  const World w = gen_world(spec(16, 16, 4));
  double max_free = -INFINITY;
  double min_obstacle = INFINITY;
  for (std::size_t i = 0; i < w.gt_cost.size(); ++i) {
    if (w.obstacle[i] > 0.0) {
      min_obstacle = std::min(min_obstacle, w.gt_cost[i]);
    } else {
      max_free = std::max(max_free, w.gt_cost[i]);
    }
  }
  ASSERT_TRUE(std::isfinite(min_obstacle));
  ASSERT_TRUE(std::isfinite(max_free));
  EXPECT_GT(min_obstacle, max_free);
}

TEST(GenWorld, Deterministic) {
  const World a = gen_world(spec(10, 7, 5));
  const World b = gen_world(spec(10, 7, 5));
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.gt_cost, b.gt_cost);
  EXPECT_NE(a.gt_cost, gen_world(spec(10, 7, 6)).gt_cost);
}

TEST(GenWorld, Errors) {
  EXPECT_THROW(gen_world(spec(0, 4, 1)), ConfigError);
  WorldSpec s = spec(4, 4, 1);
  s.obstacle_density = 1.5;
  EXPECT_THROW(gen_world(s), ConfigError);
}

TEST(GenDemo, FollowsCheapCorridor) {
  const WorldSpec s = spec(5, 5, 1);
  World w;
  w.gt_cost = Field(5, 5, 5.0);
  for (int c = 0; c < 5; ++c) w.gt_cost(4, c) = 0.0;
  for (int r = 0; r < 5; ++r) w.gt_cost(r, 0) = 0.0;
  Field goal(5, 5);
  goal(4, 4) = 100.0;
  const Trajectory t = gen_demo(s, w, {0, 0}, goal, 0.0, 1);
  const Trajectory expected = [] {
    Trajectory e;
    for (int r = 0; r < 4; ++r) e.steps.push_back({{r, 0}, Action::Down});
    for (int c = 0; c < 4; ++c) e.steps.push_back({{4, c}, Action::Right});
    e.steps.push_back({{4, 4}, Action::End});
    e.terminal = {4, 4};
    return e;
  }();
  EXPECT_EQ(t, expected);
}

TEST(GenDemo, HighTemperatureIsNearUniform) {
  const WorldSpec s = spec(9, 9, 2);
  const World w = gen_world(s);
  const Field goal = goal_bonus_field(s, {4, 4}, 2);
  int counts[5] = {0, 0, 0, 0, 0};
  const int n = 4000;
  for (int k = 0; k < n; ++k) {
    const Trajectory t = gen_demo(s, w, {4, 4}, goal, 1e6, static_cast<std::uint64_t>(k));
    ++counts[action_code(t.steps.front().action)];
  }
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 0.2, 0.03);
}

TEST(GenDemo, AlwaysValid) {
  for (double beta : {0.0, 0.5, 2.0}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const WorldSpec s = spec(12, 10, seed);
      const World w = gen_world(s);
      const Trajectory t = gen_demo(s, w, default_start(s), beta, seed);
      EXPECT_FALSE(validate_trajectory(grid_for(s), t).has_value());
      EXPECT_LE(t.length(), static_cast<std::size_t>(4 * (s.rows + s.cols)));
    }
  }
  const WorldSpec s = spec(4, 4, 0);
  EXPECT_THROW(gen_demo(s, gen_world(s), {0, 0}, -1.0, 0), ConfigError);
  EXPECT_THROW(gen_demo(s, gen_world(s), {4, 0}, 0.0, 0), DomainError);
}

TEST(GoalBonus, SingleTargetWithinDistanceBand) {
  const WorldSpec s = spec(16, 16, 0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Cell target;
    const Field g = goal_bonus_field(s, {8, 8}, seed, &target);
    EXPECT_DOUBLE_EQ(g.sum(), s.constants.goal_bonus);
    EXPECT_DOUBLE_EQ(g(target.row, target.col), s.constants.goal_bonus);
    const int d = std::abs(target.row - 8) + std::abs(target.col - 8);
    EXPECT_GE(d, 8);
  }
}

TEST(GenImu, FlatWorldStatistics) {
  WorldSpec s = spec(6, 6, 3);
  s.roughness = 0.0;
  s.obstacle_density = 0.0;
  const World w = gen_world(s);
  const Trajectory t = straight({0, 0}, Action::Right, 3);
  const int n = 100;
  const ImuWindow imu = gen_imu(s, w, t, n, 11);
  for (int ch = 0; ch < ImuWindow::kChannels; ++ch) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += imu.at(i, ch) / n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (imu.at(i, ch) - mean) * (imu.at(i, ch) - mean) / (n - 1);
    const double sd = std::sqrt(var);
    EXPECT_NEAR(sd, 0.05, 0.2 * 0.05);
    if (ch == 2) EXPECT_NEAR(mean, 9.81, 3.0 * sd / std::sqrt(n));
  }
  EXPECT_EQ(imu, gen_imu(s, w, t, n, 11));
  EXPECT_THROW(gen_imu(s, w, t, 7, 11), ConfigError);
}

TEST(GenEnergy, MonotoneAndConsistent) {
  const WorldSpec s = spec(6, 6, 8);
  World w = gen_world(s);
  w.gt_cost = Field(6, 6, 1.0);
  for (int c = 0; c < 6; ++c) w.gt_cost(5, c) = 3.0;
  const Trajectory cheap = straight({0, 0}, Action::Right, 4);
  const Trajectory dear = straight({5, 0}, Action::Right, 4);
  const EnergyLabel a = gen_energy(s, w, cheap, 0.0, 1);
  const EnergyLabel b = gen_energy(s, w, dear, 0.0, 1);
  EXPECT_LT(a.aec, b.aec);
  EXPECT_NEAR(a.aec, s.constants.energy_per_cost * 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(trajectory_energy(b.log) / static_cast<double>(dear.length()), b.aec);
  EXPECT_EQ(b.log.joints, 12);
  EXPECT_DOUBLE_EQ(synthetic_aec(w.gt_cost, dear), b.aec);

  const EnergyLabel noisy = gen_energy(s, w, cheap, 0.5, 2);
  EXPECT_GE(noisy.aec, 0.0);
  EXPECT_EQ(noisy.aec, gen_energy(s, w, cheap, 0.5, 2).aec);
}

TEST(GenEnergy, UniformWorldGivesBaseAec) {
  WorldSpec s = spec(6, 6, 8);
  s.roughness = 0.0;
  s.obstacle_density = 0.0;
  const World w = gen_world(s);
  for (int moves : {0, 2, 5}) {
    EXPECT_NEAR(gen_energy(s, w, straight({0, 0}, Action::Right, moves), 0.0, 1).aec,
                s.constants.energy_per_cost * s.constants.c0, 1e-12);
  }
}

TEST(GenDataset, SplitAndDeterminism) {
  const WorldSpec s = spec(10, 10, 21);
  const auto a = gen_dataset(s, 10, 0.7);
  ASSERT_EQ(a.size(), 10u);
  EXPECT_EQ(select_split(a, Split::Train).size(), 7u);
  EXPECT_EQ(select_split(a, Split::Test).size(), 3u);
  const auto b = gen_dataset(s, 10, 0.7);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].trajectory, b[i].trajectory);
    EXPECT_EQ(a[i].imu, b[i].imu);
    ASSERT_TRUE(a[i].trajectory.aec.has_value());
    EXPECT_TRUE(std::isfinite(*a[i].trajectory.aec));
    EXPECT_FALSE(validate_trajectory(grid_for(s), a[i].trajectory).has_value());
    // the demonstrator's target is painted yellow; at beta 0 the demo ends there
    const Cell g = a[i].trajectory.terminal;
    EXPECT_EQ(a[i].features.at(FeatureStack::Red, g.row, g.col), 1.0);
    EXPECT_EQ(a[i].features.at(FeatureStack::Blue, g.row, g.col), 0.0);
  }
  EXPECT_THROW(gen_dataset(s, 1, 0.7), ConfigError);
  EXPECT_THROW(gen_dataset(s, 5, 1.2), ConfigError);
}
