#include <gtest/gtest.h>

#include <random>

#include "swarm/metrics.hpp"
#include "swarm/trajectory.hpp"

namespace swarm {
namespace {

TEST(CheckCollisions, PairDistanceThreshold) {
  WorldModel world;
  EXPECT_TRUE(check_collisions({Vec3(0, 0, 0), Vec3(0.26, 0, 0)}, world, 0.125).empty());
  const auto v = check_collisions({Vec3(0, 0, 0), Vec3(0.24, 0, 0)}, world, 0.125);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::AgentAgent);
  EXPECT_NEAR(v[0].distance, 0.24, 1e-12);
}

TEST(CheckCollisions, CenterInsideObstacle) {
  WorldModel world;
  world.obstacles.push_back({Vec3(0, 0, 0), Vec3(0.2, 0.2, 1.5)});
  EXPECT_EQ(check_collisions({Vec3(0.1, 0.1, 0.5)}, world, 0.15).size(), 1u);
  EXPECT_TRUE(check_collisions({Vec3(0.25, 0.1, 0.5)}, world, 0.15).empty());
}

// Two agents on straight crossing lines; the closest approach of the
// h/10 samples lands within one sub-step of the analytic minimum.
TEST(CheckCollisions, SampledClosestApproachMatchesAnalytic) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  const double dt = 0.01;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p1(u(rng), u(rng), u(rng)), p2(u(rng), u(rng), u(rng));
    const Vec3 v1(2 * u(rng), 2 * u(rng), 2 * u(rng)), v2(2 * u(rng), 2 * u(rng), 2 * u(rng));
    const Vec3 dp = p1 - p2, dv = v1 - v2;
    const double T = 2.0;
    const double t_star = std::clamp(-dp.dot(dv) / std::max(dv.squaredNorm(), 1e-300), 0.0, T);
    const double d_star = (dp + dv * t_star).norm();

    double best = 1e9, best_t = 0;
    for (int k = 0; k * dt <= T + 1e-12; ++k) {
      const double t = k * dt;
      const double d = (dp + dv * t).norm();
      if (d < best) {
        best = d;
        best_t = t;
      }
    }
    EXPECT_LE(std::abs(best_t - t_star), dt + 1e-12);
    EXPECT_LE(best - d_star, dv.norm() * dt + 1e-12);
    // The threshold test at the sampled minimum flags exactly what a radius
    // just above it would.
    WorldModel world;
    const Vec3 a = p1 + v1 * best_t, b = p2 + v2 * best_t;
    EXPECT_EQ(check_collisions({a, b}, world, best / 2 + 1e-9).size(), 1u);
    EXPECT_TRUE(check_collisions({a, b}, world, best / 2 - 1e-9).empty());
  }
}

TEST(AccumulateCosts, ZeroJerkFromRest) {
  const auto c = accumulate_costs(std::vector<Vec3>(10, Vec3::Zero()), 0.1);
  EXPECT_EQ(c.accel, 0.0);
  EXPECT_EQ(c.jerk, 0.0);
}

TEST(AccumulateCosts, UnitJerkOneStep) {
  const auto c = accumulate_costs({Vec3(1, 0, 0)}, 1.0);
  EXPECT_NEAR(c.jerk, 1.0, 1e-15);
  EXPECT_NEAR(c.accel, 1.0 / 3.0, 1e-15);
}

TEST(AccumulateCosts, MatchesFineQuadratureAndIsAdditive) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-30, 30);
  std::vector<Vec3> jerks;
  for (int i = 0; i < 20; ++i) jerks.emplace_back(u(rng), u(rng), u(rng));
  const double h = 0.1;
  const auto c = accumulate_costs(jerks, h);

  // Midpoint rule at h/1000 on the simulated acceleration.
  double accel = 0, jerk = 0;
  AgentState s;
  const int sub = 1000;
  for (const auto& j : jerks) {
    for (int k = 0; k < sub; ++k) {
      const double t = (k + 0.5) * h / sub;
      accel += (s.acceleration + j * t).squaredNorm() * h / sub;
      jerk += j.squaredNorm() * h / sub;
    }
    s = propagate(s, j, h);
  }
  EXPECT_NEAR(c.accel, accel, 1e-6 * accel);
  EXPECT_NEAR(c.jerk, jerk, 1e-6 * jerk);

  const std::vector<Vec3> first(jerks.begin(), jerks.begin() + 7), second(jerks.begin() + 7, jerks.end());
  Vec3 a_mid = Vec3::Zero();
  for (const auto& j : first) a_mid += j * h;
  const auto c1 = accumulate_costs(first, h), c2 = accumulate_costs(second, h, a_mid);
  EXPECT_NEAR(c1.accel + c2.accel, c.accel, 1e-9 * c.accel);
  EXPECT_NEAR(c1.jerk + c2.jerk, c.jerk, 1e-9 * c.jerk);
}

TEST(CountStops, CruiseThenArrival) {
  std::vector<double> v = {0, 0, 0.5, 1, 1, 1, 0.5, 0.2, 0.01, 0, 0, 0, 0};
  EXPECT_EQ(count_stops(v, 0.05, 3), 0);
}

TEST(CountStops, MidFlightDip) {
  std::vector<double> v = {0, 1, 1, 0.01, 0.0, 0.02, 1, 1, 0.0, 0.0};
  EXPECT_EQ(count_stops(v, 0.05, 3), 1);
  EXPECT_EQ(count_stops(v, 0.05, 4), 0);  // dwell too short
  EXPECT_EQ(count_stops(v, 0.05, 3, 5), 0);  // arrival cuts the dip off
}

TEST(CountStops, HoveringJustAboveThreshold) {
  std::vector<double> v = {0, 1, 0.051, 0.06, 0.051, 0.052, 1, 0};
  EXPECT_EQ(count_stops(v, 0.05, 3), 0);
}

}  // namespace
}  // namespace swarm
