#include "swarm/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace swarm {

Vec3 point_at_arclength(const Path& path, double s) {
  if (path.waypoints.empty()) throw ContractError("point_at_arclength: empty path");
  if (s <= 0.0) return path.waypoints.front();
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    const Vec3& a = path.waypoints[i];
    const Vec3& b = path.waypoints[i + 1];
    const double len = (b - a).norm();
    if (s <= len) return len > 0.0 ? Vec3(a + (b - a) * (s / len)) : b;
    s -= len;
  }
  return path.waypoints.back();
}

LocalReference sample_reference(const Path& global_path, double v_samp, int N, double h,
                                const LocalReference* prev_ref, const DiscreteTrajectory* last_mpc,
                                double d_thresh) {
  if (N < 1 || h <= 0.0 || v_samp < 0.0) throw ContractError("sample_reference: bad parameters");
  if (prev_ref && last_mpc && !prev_ref->points.empty() && !last_mpc->states.empty()) {
    const double gap = (last_mpc->states.back().position - prev_ref->points.back()).norm();
    if (gap > d_thresh) return *prev_ref;
  }
  LocalReference ref;
  ref.points.reserve(N);
  for (int i = 0; i < N; ++i) ref.points.push_back(point_at_arclength(global_path, (i + 1) * v_samp * h));
  return ref;
}

LocalReference sample_reference_braking(const Path& global_path, double v_samp, int N, double h, double a_brake) {
  if (N < 1 || h <= 0.0 || v_samp < 0.0) throw ContractError("sample_reference_braking: bad parameters");
  const double L = global_path.length();
  LocalReference ref;
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    double v = v_samp;
    if (a_brake > 0.0) v = std::min(v, std::sqrt(2.0 * a_brake * std::max(0.0, L - s)));
    s = std::min(L, s + v * h);
    ref.points.push_back(point_at_arclength(global_path, s));
  }
  return ref;
}

namespace {

constexpr double kMemberTol = 1e-9;

bool same_halfspace(const Halfspace& a, const Halfspace& b) {
  return a.offset == b.offset && a.normal == b.normal;
}

void push_unique(std::vector<Halfspace>& list, const Halfspace& h) {
  for (const auto& e : list)
    if (same_halfspace(e, h)) return;
  list.push_back(h);
}

}  // namespace

MpcProblem::MpcProblem(const TimeAwareSafeCorridor& tasc, const AgentState& x0, const LocalReference& ref,
                       const Limits& limits, const MpcWeights& weights, double h)
    : tasc_(tasc), x0_(x0), ref_(ref), limits_(limits), weights_(weights), h_(h),
      N_(static_cast<int>(tasc.slices.size())) {
  if (N_ < 1) throw ContractError("MpcProblem: empty corridor");
  if (static_cast<int>(ref.points.size()) != N_)
    throw ContractError("MpcProblem: reference length differs from the horizon");
  if (h <= 0.0) throw ContractError("MpcProblem: step must be positive");
  for (const auto& slice : tasc.slices)
    if (slice.polyhedra.empty()) throw ContractError("MpcProblem: slice without polyhedra");

  // Scalar triple integrator driven by a unit jerk at step k, zero elsewhere.
  Cp_.setZero(N_ + 1, N_);
  Cv_.setZero(N_ + 1, N_);
  Ca_.setZero(N_ + 1, N_);
  for (int k = 0; k < N_; ++k) {
    double p = 0, v = 0, a = 0;
    for (int t = 0; t < N_; ++t) {
      const double j = t == k ? 1.0 : 0.0;
      p += v * h + a * h * h / 2.0 + j * h * h * h / 6.0;
      v += a * h + j * h * h / 2.0;
      a += j * h;
      Cp_(t + 1, k) = p;
      Cv_(t + 1, k) = v;
      Ca_(t + 1, k) = a;
    }
  }
  fp_.resize(3, N_ + 1);
  fv_.resize(3, N_ + 1);
  fa_.resize(3, N_ + 1);
  AgentState s = x0;
  for (int t = 0; t <= N_; ++t) {
    fp_.col(t) = s.position;
    fv_.col(t) = s.velocity;
    fa_.col(t) = s.acceleration;
    s = propagate(s, Vec3::Zero(), h);
  }

  const int n = 3 * N_;
  const double q = weights.q_ref, r = weights.r_jerk;
  const Eigen::MatrixXd Sp = Cp_.bottomRows(N_);
  const Eigen::MatrixXd block = 2.0 * (q * Sp.transpose() * Sp + r * Eigen::MatrixXd::Identity(N_, N_));
  G_.setZero(n, n);
  g_.setZero(n);
  constant_ = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    G_.block(ax * N_, ax * N_, N_, N_) = block;
    Eigen::VectorXd resid(N_);
    for (int t = 0; t < N_; ++t) resid[t] = fp_(ax, t + 1) - ref.points[t][ax];
    g_.segment(ax * N_, N_) = 2.0 * q * Sp.transpose() * resid;
    constant_ += q * resid.squaredNorm();
  }
  solver_.set_objective(G_, g_);

  // Rows shared by every node: jerk, velocity and acceleration bounds, and
  // the separating hyperplanes.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add_row = [&](const Eigen::VectorXd& row, double b) {
    rows.push_back(row);
    rhs.push_back(b);
  };
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    add_row(e, limits.j_max);
    add_row(-e, limits.j_max);
  }
  for (int t = 1; t < N_; ++t)
    for (int ax = 0; ax < 3; ++ax) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row.segment(ax * N_, N_) = Cv_.row(t).transpose();
      add_row(row, limits.v_max - fv_(ax, t));
      add_row(-row, limits.v_max + fv_(ax, t));
      row.segment(ax * N_, N_) = Ca_.row(t).transpose();
      add_row(row, limits.a_max - fa_(ax, t));
      add_row(-row, limits.a_max + fa_(ax, t));
    }
  for (const auto& hp : tasc.slices[0].hyperplanes)
    if (!hp.plane.contains(x0.position, kMemberTol)) x0_blocked_ = true;
  for (int t = 1; t <= N_; ++t) {
    std::vector<Halfspace> planes;
    for (int s : {t - 1, t})
      if (s < N_)
        for (const auto& hp : tasc.slices[s].hyperplanes) push_unique(planes, hp.plane);
    for (const auto& hs : planes) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      for (int ax = 0; ax < 3; ++ax) row.segment(ax * N_, N_) = hs.normal[ax] * Cp_.row(t).transpose();
      add_row(row, hs.offset - hs.normal.dot(fp_.col(t)));
    }
  }
  base_A_.resize(static_cast<int>(rows.size()), n);
  base_b_.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    base_A_.row(i) = rows[i].transpose();
    base_b_[i] = rhs[i];
  }

  // Terminal rest.
  A_eq_.setZero(6, n);
  b_eq_.resize(6);
  for (int ax = 0; ax < 3; ++ax) {
    A_eq_.row(ax).segment(ax * N_, N_) = Cv_.row(N_);
    b_eq_[ax] = -fv_(ax, N_);
    A_eq_.row(3 + ax).segment(ax * N_, N_) = Ca_.row(N_);
    b_eq_[3 + ax] = -fa_(ax, N_);
  }
}

std::vector<Halfspace> MpcProblem::segment_cells(int segment, const Assignment& prefix, bool& unbounded) const {
  unbounded = false;
  const auto& polys = tasc_.slices[segment].polyhedra;
  if (segment < static_cast<int>(prefix.size())) return polys.at(prefix[segment]).halfspaces;
  if (polys.size() == 1) return polys[0].halfspaces;
  AlignedBox hull;
  bool first = true;
  for (const auto& p : polys) {
    if (!p.box) {
      unbounded = true;
      return {};
    }
    if (first) {
      hull = *p.box;
      first = false;
    } else {
      hull.min = hull.min.cwiseMin(p.box->min);
      hull.max = hull.max.cwiseMax(p.box->max);
    }
  }
  return Polyhedron::from_box(hull, hull.center()).halfspaces;
}

QpProblem MpcProblem::build(const Assignment& prefix) const {
  const int n = 3 * N_;
  std::vector<std::vector<Halfspace>> per_state(N_ + 1);
  for (int s = 0; s < N_; ++s) {
    bool unbounded = false;
    const auto cells = segment_cells(s, prefix, unbounded);
    for (int t : {s, s + 1})
      for (const auto& hs : cells) push_unique(per_state[t], hs);
  }
  int extra = 0;
  for (int t = 1; t <= N_; ++t) extra += static_cast<int>(per_state[t].size());

  QpProblem qp;
  qp.G = G_;
  qp.g = g_;
  qp.A_eq = A_eq_;
  qp.b_eq = b_eq_;
  qp.A_in.setZero(base_A_.rows() + extra, n);
  qp.b_in.resize(base_b_.size() + extra);
  qp.A_in.topRows(base_A_.rows()) = base_A_;
  qp.b_in.head(base_b_.size()) = base_b_;
  int row = static_cast<int>(base_A_.rows());
  for (int t = 1; t <= N_; ++t)
    for (const auto& hs : per_state[t]) {
      for (int ax = 0; ax < 3; ++ax) qp.A_in.row(row).segment(ax * N_, N_) = hs.normal[ax] * Cp_.row(t);
      qp.b_in[row] = hs.offset - hs.normal.dot(fp_.col(t));
      ++row;
    }
  return qp;
}

QpOutcome MpcProblem::solve_prefix(const Assignment& prefix, std::ostream* dump) {
  QpOutcome out;
  out.status = SolveStatus::Infeasible;
  if (x0_blocked_) return out;
  for (int s = 0; s < static_cast<int>(prefix.size()); ++s) {
    const int idx = prefix[s];
    if (idx < 0 || idx >= static_cast<int>(tasc_.slices[s].polyhedra.size()))
      throw ContractError("MpcProblem: assignment index out of range");
  }
  {
    bool unbounded = false;
    const auto cells = segment_cells(0, prefix, unbounded);
    for (const auto& hs : cells)
      if (!hs.contains(x0_.position, kMemberTol)) return out;
  }

  const QpProblem qp = build(prefix);
  if (dump) {
    *dump << "node " << dump_counter_++ << " assignment";
    for (int idx : prefix) *dump << ' ' << idx;
    *dump << '\n';
    write_qp(*dump, qp);
  }
  const QpResult res = solver_.solve(qp.A_eq, qp.b_eq, qp.A_in, qp.b_in);
  out.certificate = res.certificate;
  if (res.status != QpStatus::Optimal) {
    out.status = res.status == QpStatus::MaxIter ? SolveStatus::MaxIter : SolveStatus::Infeasible;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.cost = res.cost + constant_;
  out.states.reserve(N_ + 1);
  out.jerks.reserve(N_);
  out.states.push_back(x0_);
  for (int t = 0; t < N_; ++t) {
    const Vec3 j(res.x[t], res.x[N_ + t], res.x[2 * N_ + t]);
    out.jerks.push_back(j);
    out.states.push_back(propagate(out.states.back(), j, h_));
  }
  // The equality rows hold these to rounding; make the rest exact.
  out.states.back().velocity.setZero();
  out.states.back().acceleration.setZero();
  return out;
}

QpOutcome MpcProblem::solve(const Assignment& assignment) {
  if (static_cast<int>(assignment.size()) != N_)
    throw ContractError("MpcProblem::solve: assignment must cover every segment");
  return solve_prefix(assignment, nullptr);
}

std::optional<Assignment> MpcProblem::complete(const Assignment& prefix, const QpOutcome& relaxed) const {
  Assignment full = prefix;
  for (int s = static_cast<int>(prefix.size()); s < N_; ++s) {
    const auto& polys = tasc_.slices[s].polyhedra;
    int found = -1;
    for (int j = 0; j < static_cast<int>(polys.size()) && found < 0; ++j)
      if (polys[j].contains(relaxed.states[s].position, kMemberTol) &&
          polys[j].contains(relaxed.states[s + 1].position, kMemberTol))
        found = j;
    if (found < 0) return std::nullopt;
    full.push_back(found);
  }
  return full;
}

MiqpOutcome MpcProblem::solve_miqp(const MiqpOptions& options) {
  MiqpOutcome best;
  best.status = SolveStatus::Infeasible;
  double best_cost = std::numeric_limits<double>::infinity();
  bool hit_limit = false;

  auto budget_left = [&] {
    if (best.qp_solves < options.max_qp_solves) return true;
    hit_limit = true;
    return false;
  };
  auto offer = [&](const Assignment& a, const QpOutcome& sol) {
    if (sol.cost < best_cost) {
      best_cost = sol.cost;
      best.status = SolveStatus::Optimal;
      best.assignment = a;
      best.solution = sol;
    }
  };

  if (options.exhaustive) {
    Assignment a(N_, 0);
    while (true) {
      if (!budget_left()) break;
      ++best.qp_solves;
      const QpOutcome sol = solve_prefix(a, options.dump);
      if (sol.status == SolveStatus::Optimal) offer(a, sol);
      int s = N_ - 1;
      while (s >= 0 && ++a[s] == static_cast<int>(tasc_.slices[s].polyhedra.size())) a[s--] = 0;
      if (s < 0) break;
    }
  } else {
    // A relative slack so ties between equal-cost nodes do not get expanded.
    auto prunable = [&](double bound) { return bound >= best_cost - 1e-9 * std::max(1.0, std::abs(best_cost)); };

    if (options.warm_start && static_cast<int>(options.warm_start->size()) == N_) {
      bool valid = true;
      for (int s = 0; s < N_; ++s) {
        const int idx = (*options.warm_start)[s];
        if (idx < 0 || idx >= static_cast<int>(tasc_.slices[s].polyhedra.size())) valid = false;
      }
      if (valid) {
        ++best.qp_solves;
        const QpOutcome sol = solve_prefix(*options.warm_start, options.dump);
        if (sol.status == SolveStatus::Optimal) offer(*options.warm_start, sol);
      }
    }

    struct Node {
      double bound;
      long seq;
      Assignment prefix;
    };
    auto worse = [](const Node& a, const Node& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.seq > b.seq;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    long seq = 0;

    // Returns true when the node needs no further branching.
    auto settle = [&](const Assignment& prefix, const QpOutcome& sol) {
      if (static_cast<int>(prefix.size()) == N_) {
        offer(prefix, sol);
        return true;
      }
      if (auto full = complete(prefix, sol)) {
        offer(*full, sol);
        return true;
      }
      return false;
    };

    if (budget_left()) {
      ++best.qp_solves;
      const QpOutcome root = solve_prefix({}, options.dump);
      if (root.status == SolveStatus::Optimal && !prunable(root.cost) && !settle({}, root))
        open.push({root.cost, seq++, {}});
    }
    while (!open.empty()) {
      Node node = open.top();
      open.pop();
      if (prunable(node.bound)) break;
      const int s = static_cast<int>(node.prefix.size());
      for (int j = 0; j < static_cast<int>(tasc_.slices[s].polyhedra.size()); ++j) {
        if (!budget_left()) break;
        Assignment child = node.prefix;
        child.push_back(j);
        ++best.qp_solves;
        const QpOutcome sol = solve_prefix(child, options.dump);
        if (sol.status != SolveStatus::Optimal || prunable(sol.cost)) continue;
        if (!settle(child, sol)) open.push({sol.cost, seq++, std::move(child)});
      }
      if (hit_limit) break;
    }
  }
  if (hit_limit && best.status != SolveStatus::Optimal) best.status = SolveStatus::MaxIter;
  return best;
}

QpOutcome solve_qp(const Assignment& assignment, const TimeAwareSafeCorridor& tasc, const AgentState& x0,
                   const LocalReference& ref, const Limits& limits, const MpcWeights& weights, double h) {
  MpcProblem problem(tasc, x0, ref, limits, weights, h);
  return problem.solve(assignment);
}

MiqpOutcome solve_miqp(const TimeAwareSafeCorridor& tasc, const AgentState& x0, const LocalReference& ref,
                       const Limits& limits, const MpcWeights& weights, double h, const MiqpOptions& options) {
  MpcProblem problem(tasc, x0, ref, limits, weights, h);
  return problem.solve_miqp(options);
}

}  // namespace swarm
