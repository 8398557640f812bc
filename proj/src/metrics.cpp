#include "swarm/metrics.hpp"

#include <algorithm>

namespace swarm {

std::vector<Violation> check_collisions(const std::vector<Vec3>& positions, const WorldModel& world,
                                        double d_rad) {
  std::vector<Violation> out;
  const double limit = 2.0 * d_rad;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const double d = (positions[i] - positions[j]).norm();
      if (d < limit) out.push_back({Violation::Kind::AgentAgent, AgentId(i), AgentId(j), -1, d});
    }
    for (std::size_t o = 0; o < world.obstacles.size(); ++o) {
      const auto& box = world.obstacles[o];
      if ((positions[i].array() > box.min.array()).all() && (positions[i].array() < box.max.array()).all())
        out.push_back({Violation::Kind::AgentObstacle, AgentId(i), -1, int(o), 0.0});
    }
  }
  return out;
}

Costs accumulate_costs(const std::vector<Vec3>& jerks, double h, const Vec3& a0) {
  Costs c;
  Vec3 a = a0;
  for (const auto& j : jerks) {
    // |a + j t|^2 integrated over [0, h].
    c.accel += a.squaredNorm() * h + a.dot(j) * h * h + j.squaredNorm() * h * h * h / 3.0;
    c.jerk += j.squaredNorm() * h;
    a += j * h;
  }
  return c;
}

int count_stops(const std::vector<double>& speeds, double v_stop, int min_dwell,
                std::optional<std::size_t> arrival) {
  const std::size_t end = std::min(speeds.size(), arrival.value_or(speeds.size()));
  std::size_t i = 0;
  while (i < end && speeds[i] < v_stop) ++i;  // not yet departed
  int stops = 0;
  while (i < end) {
    if (speeds[i] >= v_stop) {
      ++i;
      continue;
    }
    std::size_t run = i;
    while (run < end && speeds[run] < v_stop) ++run;
    if (run < end && static_cast<int>(run - i) >= min_dwell) ++stops;
    i = run;
  }
  return stops;
}

}  // namespace swarm
