#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "swarm/global_path.hpp"
#include "swarm/qp_solver.hpp"
#include "swarm/tasc.hpp"
#include "swarm/trajectory.hpp"

namespace swarm {

struct LocalReference {
  std::vector<Vec3> points;  // N targets; points[i] is for state i+1
};

// Point at arc length s along the path, clamped to its ends.
Vec3 point_at_arclength(const Path& path, double s);

// Keeps prev_ref when the end of the last plan is more than d_thresh from
// prev_ref's end; otherwise samples the path at arc lengths
// (i+1) v_samp h, i = 0..N-1, repeating the final point past the end.
LocalReference sample_reference(const Path& global_path, double v_samp, int N, double h,
                                const LocalReference* prev_ref, const DiscreteTrajectory* last_mpc,
                                double d_thresh);

// Like sample_reference without the gate, but the sampling speed drops to
// sqrt(2 a_brake d) within stopping distance d of the path end, so a
// reference that ends at the final goal slows into it. a_brake <= 0 keeps
// the constant spacing.
LocalReference sample_reference_braking(const Path& global_path, double v_samp, int N, double h, double a_brake);

struct MpcWeights {
  double q_ref = 1.0;
  double r_jerk = 0.01;
};

using Assignment = std::vector<int>;  // polyhedron index per segment

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct QpOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<AgentState> states;  // N + 1, states[0] = x0
  std::vector<Vec3> jerks;         // N
  double cost = 0.0;               // sum q |p - ref|^2 + r |j|^2
  QpCertificate certificate;
};

struct MiqpOptions {
  bool exhaustive = false;  // enumerate every assignment instead of branching
  int max_qp_solves = 20000;
  std::optional<Assignment> warm_start;
  std::ostream* dump = nullptr;  // receives every node QP when set
};

struct MiqpOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  Assignment assignment;
  QpOutcome solution;
  int qp_solves = 0;
};

// Condensed MPC over one TASC: the decision variables are the N jerks per
// axis, states are affine in them. The objective is factored once and
// shared by every assignment tried.
class MpcProblem {
 public:
  MpcProblem(const TimeAwareSafeCorridor& tasc, const AgentState& x0, const LocalReference& ref,
             const Limits& limits, const MpcWeights& weights, double h);

  int horizon() const { return N_; }
  QpOutcome solve(const Assignment& assignment);
  MiqpOutcome solve_miqp(const MiqpOptions& options = {});

  // The QP for a partial assignment; segments past the prefix are bounded
  // by the hull of their slice's cells (or left free if a cell is not a box).
  QpProblem build(const Assignment& prefix) const;

 private:
  QpOutcome solve_prefix(const Assignment& prefix, std::ostream* dump);
  std::optional<Assignment> complete(const Assignment& prefix, const QpOutcome& relaxed) const;
  std::vector<Halfspace> segment_cells(int segment, const Assignment& prefix, bool& unbounded) const;

  const TimeAwareSafeCorridor& tasc_;
  AgentState x0_;
  LocalReference ref_;
  Limits limits_;
  MpcWeights weights_;
  double h_;
  int N_;

  // Per axis: state value = free response + coefficient row . u_axis.
  Eigen::MatrixXd Cp_, Cv_, Ca_;  // (N+1) x N
  Eigen::Matrix3Xd fp_, fv_, fa_;  // 3 x (N+1)
  Eigen::MatrixXd G_;
  Eigen::VectorXd g_;
  double constant_ = 0.0;
  Eigen::MatrixXd base_A_;
  Eigen::VectorXd base_b_;
  Eigen::MatrixXd A_eq_;
  Eigen::VectorXd b_eq_;
  bool x0_blocked_ = false;  // x0 already violates a slice-0 hyperplane
  DenseQpSolver solver_;
  long dump_counter_ = 0;
};

QpOutcome solve_qp(const Assignment& assignment, const TimeAwareSafeCorridor& tasc, const AgentState& x0,
                   const LocalReference& ref, const Limits& limits, const MpcWeights& weights, double h);

MiqpOutcome solve_miqp(const TimeAwareSafeCorridor& tasc, const AgentState& x0, const LocalReference& ref,
                       const Limits& limits, const MpcWeights& weights, double h,
                       const MiqpOptions& options = {});

}  // namespace swarm
