#include <random>

#include <gtest/gtest.h>

#include "swarm/trajectory.hpp"

namespace swarm {
namespace {

TEST(PropagateTest, ConstantVelocity) {
  AgentState x{Vec3::Zero(), Vec3(1, 0, 0), Vec3::Zero()};
  AgentState y = propagate(x, Vec3::Zero(), 0.1);
  EXPECT_TRUE(y.position.isApprox(Vec3(0.1, 0, 0)));
  EXPECT_EQ(y.velocity, x.velocity);
}

TEST(PropagateTest, UnitJerkFromRest) {
  AgentState y = propagate(AgentState{}, Vec3(6, 0, 0), 1.0);
  EXPECT_EQ(y.position, Vec3(1, 0, 0));
  EXPECT_EQ(y.velocity, Vec3(3, 0, 0));
  EXPECT_EQ(y.acceleration, Vec3(6, 0, 0));
}

TEST(PropagateTest, HalfStepsCompose) {
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  auto rv = [&] { return Vec3(nd(rng), nd(rng), nd(rng)); };
  for (int i = 0; i < 200; ++i) {
    AgentState x{rv(), rv(), rv()};
    Vec3 j = rv();
    double h = 0.05 + std::abs(nd(rng));
    AgentState full = propagate(x, j, h);
    AgentState half = propagate(propagate(x, j, h / 2), j, h / 2);
    EXPECT_LE((full.position - half.position).norm(), 1e-12 * (1 + full.position.norm()));
    EXPECT_LE((full.velocity - half.velocity).norm(), 1e-12 * (1 + full.velocity.norm()));
    EXPECT_LE((full.acceleration - half.acceleration).norm(), 1e-12 * (1 + full.acceleration.norm()));
  }
  EXPECT_THROW(propagate(AgentState{}, Vec3::Zero(), 0.0), ContractError);
}

DiscreteTrajectory ramp(int N, long iteration) {
  DiscreteTrajectory t = rest_trajectory(Vec3::Zero(), N, 0.1, iteration);
  for (int i = 0; i < N; ++i) {
    t.jerks[i] = Vec3(i < N / 2 ? 3.0 : -3.0, 1.0, 0.0);
    t.states[i + 1] = propagate(t.states[i], t.jerks[i], 0.1);
  }
  return t;
}

TEST(TrajectoryTest, ShiftDropsAndPads) {
  DiscreteTrajectory t = ramp(9, 4);
  DiscreteTrajectory s = shift_trajectory(t, 6);
  EXPECT_EQ(s.iteration, 6);
  ASSERT_EQ(s.states.size(), 10u);
  ASSERT_EQ(s.jerks.size(), 9u);
  for (long step = 7; step <= 14; ++step) EXPECT_EQ(s.state_at_step(step).position, t.state_at_step(step).position);
  EXPECT_EQ(s.jerks[7], Vec3::Zero());
  EXPECT_LE(dynamics_residual(s), 1e-12);
  DiscreteTrajectory far = shift_trajectory(t, 40);
  EXPECT_EQ(far.states.front().position, t.states.back().position);
  EXPECT_THROW(shift_trajectory(t, 3), ContractError);
}

TEST(TrajectoryTest, StateLookupHoldsEnd) {
  DiscreteTrajectory t = ramp(5, 0);
  EXPECT_EQ(t.state_at_step(1).position, t.states[0].position);
  EXPECT_EQ(t.state_at_step(100).position, t.states.back().position);
  EXPECT_EQ(t.jerk_at_step(100), Vec3::Zero());
  EXPECT_THROW(t.state_at_step(0), ContractError);
}

}  // namespace
}  // namespace swarm
