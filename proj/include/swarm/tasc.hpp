#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swarm/safe_corridor.hpp"
#include "swarm/trajectory.hpp"

namespace swarm {

// Two agents planned from the same position; a safety violation already
// happened upstream.
class CoincidentAgentsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeparatingHyperplane {
  Halfspace plane;  // the owner must satisfy it
  int step = 0;
  AgentId peer = -1;
};

struct TascSlice {
  std::vector<Polyhedron> polyhedra;
  std::vector<SeparatingHyperplane> hyperplanes;
};

struct TimeAwareSafeCorridor {
  std::vector<TascSlice> slices;  // one per MPC segment
};

// (own index, peer index) pairs of states at the same absolute step, own
// index starting at 0. nullopt when the horizons do not overlap.
std::optional<std::vector<std::pair<int, int>>> align(long own_iter, const DiscreteTrajectory& own,
                                                      long peer_iter, const DiscreteTrajectory& peer);

// normalize(n + (c+m) r/|r| + c (z x n)) with n = n_hyp/|n_hyp| and
// r = n x z + n x y. When r vanishes, r = n x x is used instead; it is odd
// in n, so flipping n still flips the result exactly.
Vec3 perturb_normal(const Vec3& n_hyp, double c, double m);

struct HyperplaneParams {
  double d_rad = 0.125;
  double c = 0.1;
  double margin = 0.0;  // extra clearance each agent keeps from the plane
};

// Plane between p_own and p_peer with the owner's side
//   n . x <= n . (p_own + p_peer)/2 - keep,  keep = min(d_rad + margin, |p_peer - p_own|/2).
// The perturbation is scaled back just enough that p_own stays feasible
// when the two points are at least 2 (d_rad + margin) apart. The scaling
// depends only on quantities that are even in the pair order, so the two
// agents still build mirror-image planes.
SeparatingHyperplane separating_hyperplane(const Vec3& p_own, const Vec3& p_peer,
                                           const HyperplaneParams& params, double m);

// Triangular wave in the iteration index: 0 at multiples of K, m_amp at K/2.
double perturbation_offset(long key, double m_amp, int K);

struct PeerPlan {
  AgentId id = -1;
  DiscreteTrajectory traj;  // traj.iteration is the peer's planning iteration
};

struct TascParams {
  HyperplaneParams plane;
  double m_amp = 0.05;
  int K = 20;
};

// One slice per segment of `own` (already expressed at the current
// iteration). `own_source_iteration` is the iteration own was generated at;
// the perturbation phase uses the newer of it and the peer's iteration so
// both sides of a pair agree. Peers with no overlapping steps are held at
// their final state.
TimeAwareSafeCorridor build_tasc(const std::vector<Polyhedron>& corridor, const DiscreteTrajectory& own,
                                 long own_source_iteration, const std::vector<PeerPlan>& peers,
                                 const TascParams& params);

}  // namespace swarm
