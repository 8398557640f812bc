#pragma once

#include <random>

#include "swarm/mpc.hpp"

namespace swarm::testing {

struct MpcInstance {
  TimeAwareSafeCorridor tasc;
  AgentState x0;
  LocalReference ref;
  Limits limits;
  MpcWeights weights;
  double h = 0.1;
};

// A chain of up to max_cells overlapping boxes, a start inside the first
// one with a small initial velocity, an occasional peer hyperplane and a
// reference drifting along the chain.
inline MpcInstance random_mpc_instance(std::mt19937_64& rng, int max_horizon, int max_cells) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };
  MpcInstance inst;
  const int N = 1 + static_cast<int>(rng() % max_horizon);
  const int P = 1 + static_cast<int>(rng() % max_cells);

  std::vector<Polyhedron> cells;
  Vec3 lo(uni(-0.5, 0), uni(-0.5, 0), uni(-0.5, 0));
  for (int c = 0; c < P; ++c) {
    const Vec3 size(uni(0.2, 1.0), uni(0.2, 1.0), uni(0.2, 1.0));
    AlignedBox b{lo, lo + size};
    cells.push_back(Polyhedron::from_box(b, b.center()));
    // Next box starts somewhere inside this one so the chain stays connected.
    for (int ax = 0; ax < 3; ++ax) lo[ax] = uni(b.min[ax], b.max[ax] - 0.05);
  }
  const AlignedBox& first = *cells.front().box;
  for (int ax = 0; ax < 3; ++ax) inst.x0.position[ax] = uni(first.min[ax], first.max[ax]);
  inst.x0.velocity = Vec3(uni(-0.2, 0.2), uni(-0.2, 0.2), uni(-0.2, 0.2));
  inst.x0.acceleration = Vec3(uni(-0.5, 0.5), uni(-0.5, 0.5), uni(-0.5, 0.5));

  inst.tasc.slices.assign(N, TascSlice{cells, {}});
  if (rng() % 3 == 0) {
    Vec3 n(uni(-1, 1), uni(-1, 1), uni(-1, 1));
    if (n.norm() < 1e-3) n = Vec3::UnitX();
    n.normalize();
    const double offset = n.dot(inst.x0.position) + uni(0.0, 0.3);
    for (int s = 0; s < N; ++s) inst.tasc.slices[s].hyperplanes.push_back({{n, offset}, s, 1});
  }
  const Vec3 target = cells.back().box->center();
  for (int i = 0; i < N; ++i) {
    const double t = double(i + 1) / N;
    inst.ref.points.push_back(inst.x0.position + t * (target - inst.x0.position) +
                              Vec3(uni(-0.1, 0.1), uni(-0.1, 0.1), uni(-0.1, 0.1)));
  }
  return inst;
}

// Largest constraint violation of a solution under a full assignment.
inline double corridor_violation(const MpcInstance& inst, const Assignment& a, const QpOutcome& sol) {
  double worst = 0.0;
  const int N = static_cast<int>(inst.tasc.slices.size());
  for (int s = 0; s < N; ++s) {
    const auto& slice = inst.tasc.slices[s];
    for (int t : {s, s + 1}) {
      const Vec3& p = sol.states[t].position;
      for (const auto& hs : slice.polyhedra[a[s]].halfspaces) worst = std::max(worst, hs.signed_distance(p));
      for (const auto& hp : slice.hyperplanes) worst = std::max(worst, hp.plane.signed_distance(p));
    }
  }
  return worst;
}

}  // namespace swarm::testing
