#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "trav/ranking.hpp"

using namespace trav;

namespace {

JointLog random_log(int stamps, int joints, Rng& rng) {
  JointLog log;
  log.stamps = stamps;
  log.joints = joints;
  for (int i = 0; i < stamps * joints; ++i) {
    log.torques.push_back(rng.uniform(-20.0, 20.0));
    log.displacements.push_back(rng.uniform(-0.5, 0.5));
  }
  return log;
}

}  // namespace

TEST(Energy, HandCase) {
  JointLog log;
  log.stamps = 1;
  log.joints = 2;
  log.torques = {2.0, -3.0};
  log.displacements = {0.1, -0.2};
  EXPECT_NEAR(trajectory_energy(log), 0.8, 1e-15);
}

TEST(Energy, ZeroTorques) {
  JointLog log;
  log.stamps = 3;
  log.joints = 2;
  log.torques.assign(6, 0.0);
  log.displacements = {1, -2, 3, -4, 5, -6};
  EXPECT_EQ(trajectory_energy(log), 0.0);
}

TEST(Energy, NonnegativeAndInvariant) {
  Rng rng(31);
  for (int k = 0; k < 200; ++k) {
    JointLog log = random_log(1 + static_cast<int>(rng.index(10)), 12, rng);
    const double e = trajectory_energy(log);
    EXPECT_GE(e, 0.0);

    JointLog flipped = log;
    for (double& u : flipped.torques) u = -u;
    for (double& q : flipped.displacements) q = -q;
    EXPECT_EQ(trajectory_energy(flipped), e);

    // reverse the joint order in both arrays
    JointLog perm = log;
    for (int s = 0; s < log.stamps; ++s) {
      for (int j = 0; j < log.joints; ++j) {
        perm.torques[s * 12 + j] = log.torques[s * 12 + (11 - j)];
        perm.displacements[s * 12 + j] = log.displacements[s * 12 + (11 - j)];
      }
    }
    EXPECT_NEAR(trajectory_energy(perm), e, 1e-12 * std::max(1.0, e));
  }
}

TEST(Energy, Errors) {
  JointLog log;
  log.stamps = 2;
  log.joints = 2;
  log.torques = {1, 2, 3};
  log.displacements = {1, 2, 3, 4};
  EXPECT_THROW(trajectory_energy(log), DimensionError);
  log.torques.push_back(NAN);
  EXPECT_THROW(trajectory_energy(log), DomainError);
}

TEST(Aec, Examples) {
  EXPECT_DOUBLE_EQ(aec(0.8, 4), 0.2);
  EXPECT_EQ(aec(0.0, 7), 0.0);
  EXPECT_DOUBLE_EQ(aec(1.6, 8), aec(0.8, 4));
  EXPECT_THROW(aec(1.0, 0), DomainError);
}

TEST(RankingLoss, SymmetricCase) {
  const RankingLoss l = ranking_loss(3.0, 3.0);
  EXPECT_NEAR(l.loss, std::log(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(l.d_low, 0.5);
  EXPECT_DOUBLE_EQ(l.d_high, -0.5);
}

TEST(RankingLoss, ClosedForm) {
  EXPECT_NEAR(ranking_loss(0.0, 20.0).loss, 2.0611536203143807e-9, 1e-23);
  EXPECT_NEAR(ranking_loss(800.0, 0.0).loss, 800.0, 1e-12);
  EXPECT_TRUE(std::isfinite(ranking_loss(-800.0, 800.0).loss));
  EXPECT_THROW(ranking_loss(NAN, 0.0), NumericError);
  EXPECT_THROW(ranking_loss(0.0, INFINITY), NumericError);
}

TEST(RankingLoss, GradientsSumToZeroAndMatchDifferences) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const double gi = rng.uniform(-10, 10);
    const double gj = rng.uniform(-10, 10);
    const RankingLoss l = ranking_loss(gi, gj);
    EXPECT_EQ(l.d_low + l.d_high, 0.0);
    const double x[2] = {gi, gj};
    const auto fd = oracle::central_difference(
        [](std::span<const double> g) { return ranking_loss(g[0], g[1]).loss; }, x, 1e-6);
    EXPECT_NEAR(l.d_low, fd[0], 1e-8);
    EXPECT_NEAR(l.d_high, fd[1], 1e-8);
  }
}

TEST(RankingLoss, ShiftInvariantAndMonotone) {
  double prev = INFINITY;
  for (int k = 0; k < 100; ++k) {
    const double gap = -10.0 + 0.2 * k;  // G_j - G_i
    const RankingLoss l = ranking_loss(0.0, gap);
    EXPECT_LT(l.loss, prev);
    prev = l.loss;
    for (double c : {-7.5, 3.25}) {
      const RankingLoss s = ranking_loss(c, gap + c);
      EXPECT_NEAR(s.loss, l.loss, 1e-12);
      EXPECT_NEAR(s.d_low, l.d_low, 1e-12);
    }
  }
}

TEST(PathReturn, Multiplicity) {
  Field r(1, 3);
  r(0, 0) = 1.0;
  r(0, 1) = 10.0;
  Trajectory t;
  t.steps = {{{0, 0}, Action::Right}, {{0, 1}, Action::Left}, {{0, 0}, Action::End}};
  t.terminal = {0, 0};
  EXPECT_DOUBLE_EQ(path_return(t, r), 12.0);
  const Field g = path_return_grad(t, 1, 3, -0.5);
  EXPECT_DOUBLE_EQ(g(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(g(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(g(0, 2), 0.0);
  EXPECT_THROW(path_return(t, Field(1, 1)), DimensionError);
}

TEST(RankPairs, ForcedOrientation) {
  const double aecs[] = {0.3, 0.1};
  for (const RankPair& p : rank_pairs(aecs, 20, 1)) EXPECT_EQ(p, (RankPair{0, 1}));
}

TEST(RankPairs, SkipsTiesAndIsDeterministic) {
  const double aecs[] = {0.2, 0.2, 0.5, 0.2, 0.1};
  const auto a = rank_pairs(aecs, 200, 9);
  EXPECT_EQ(a, rank_pairs(aecs, 200, 9));
  EXPECT_NE(a, rank_pairs(aecs, 200, 10));
  for (const RankPair& p : a) EXPECT_GT(aecs[p.low], aecs[p.high]);
}

TEST(RankPairs, Errors) {
  const double one[] = {0.3};
  const double tied[] = {0.3, 0.3, 0.3};
  EXPECT_THROW(rank_pairs(one, 1, 0), DomainError);
  EXPECT_THROW(rank_pairs(tied, 1, 0), DomainError);
  EXPECT_THROW(rank_pairs(tied, 0, 0), DomainError);
}
