#include "swarm/tasc.hpp"

#include <algorithm>
#include <cmath>

namespace swarm {

std::optional<std::vector<std::pair<int, int>>> align(long own_iter, const DiscreteTrajectory& own,
                                                      long peer_iter, const DiscreteTrajectory& peer) {
  const long offset = own_iter - peer_iter;
  std::vector<std::pair<int, int>> pairs;
  const long n_own = static_cast<long>(own.states.size());
  const long n_peer = static_cast<long>(peer.states.size());
  for (long i = std::max(0L, -offset); i < n_own; ++i) {
    const long j = i + offset;
    if (j >= n_peer) break;
    pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  if (pairs.empty()) return std::nullopt;
  return pairs;
}

namespace {

// The vector added to the unit normal n before renormalizing. Both terms
// are cross products with n, so the result is orthogonal to n.
Vec3 perturbation(const Vec3& n, double c, double m) {
  Vec3 r = n.cross(Vec3::UnitZ()) + n.cross(Vec3::UnitY());
  if (r.norm() < 1e-12) r = n.cross(Vec3::UnitX());
  return (c + m) * (r / r.norm()) + c * Vec3::UnitZ().cross(n);
}

}  // namespace

Vec3 perturb_normal(const Vec3& n_hyp, double c, double m) {
  const double len = n_hyp.norm();
  if (len == 0.0) throw ContractError("perturb_normal: zero normal");
  const Vec3 n = n_hyp / len;
  const Vec3 out = n + perturbation(n, c, m);
  return out / out.norm();
}

SeparatingHyperplane separating_hyperplane(const Vec3& p_own, const Vec3& p_peer,
                                           const HyperplaneParams& params, double m) {
  const Vec3 diff = p_peer - p_own;
  const double dist = diff.norm();
  if (dist == 0.0) throw CoincidentAgentsError("separating_hyperplane: agents coincide");
  const Vec3 n = diff / dist;
  const Vec3 p = perturbation(n, params.c, m);
  // A pair already inside the margin keeps what it has rather than making
  // both owners infeasible; separation can then only grow.
  const double keep = std::min(params.d_rad + params.margin, dist / 2.0);

  // The owner sits dist/2 behind the midpoint along n, so it stays feasible
  // iff cos(tilt) >= 2 keep / dist. Since p is orthogonal to n, scaling p
  // by a gives cos = 1/sqrt(1 + a^2 |p|^2).
  const double need = 2.0 * keep / dist;
  const double pp = p.squaredNorm();
  double a = 1.0;
  if (need >= 1.0) a = 0.0;
  else if (pp > 0.0) a = std::min(1.0, std::sqrt((1.0 / (need * need) - 1.0) / pp));
  const Vec3 w = n + a * p;
  const Vec3 normal = w / w.norm();

  const Vec3 mid = 0.5 * (p_own + p_peer);
  SeparatingHyperplane out;
  out.plane = {normal, normal.dot(mid) - keep};
  return out;
}

double perturbation_offset(long key, double m_amp, int K) {
  if (K <= 0) return 0.0;
  const long j = ((key % K) + K) % K;
  return m_amp * 2.0 * static_cast<double>(std::min(j, K - j)) / K;
}

TimeAwareSafeCorridor build_tasc(const std::vector<Polyhedron>& corridor, const DiscreteTrajectory& own,
                                 long own_source_iteration, const std::vector<PeerPlan>& peers,
                                 const TascParams& params) {
  const int N = own.horizon();
  if (static_cast<int>(own.states.size()) != N + 1 || N < 1)
    throw ContractError("build_tasc: own trajectory must have N+1 states");
  TimeAwareSafeCorridor tasc;
  tasc.slices.assign(N, TascSlice{corridor, {}});
  for (const auto& peer : peers) {
    const double m =
        perturbation_offset(std::max(own_source_iteration, peer.traj.iteration), params.m_amp, params.K);
    auto pairs = align(own.iteration, own, peer.traj.iteration, peer.traj);
    std::vector<SeparatingHyperplane> planes;
    if (pairs) {
      for (int s = 0; s < N && s < static_cast<int>(pairs->size()); ++s) {
        const auto [i, j] = (*pairs)[s];
        planes.push_back(separating_hyperplane(own.states[i].position, peer.traj.states[j].position,
                                               params.plane, m));
      }
    } else {
      const Vec3 held = peer.traj.states.back().position;
      for (int s = 0; s < N; ++s)
        planes.push_back(separating_hyperplane(own.states[s].position, held, params.plane, m));
    }
    for (int s = 0; s < N; ++s) {
      SeparatingHyperplane h = planes[std::min<std::size_t>(s, planes.size() - 1)];
      h.step = s;
      h.peer = peer.id;
      tasc.slices[s].hyperplanes.push_back(h);
    }
  }
  return tasc;
}

}  // namespace swarm
