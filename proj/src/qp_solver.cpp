#include "swarm/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "swarm/geometry.hpp"

namespace swarm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

void write_block(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace

double QpCertificate::worst_kkt() const {
  return std::max({stationarity, primal, dual, complementarity});
}

QpCertificate certify(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                      const Eigen::VectorXd& mu) {
  QpCertificate c;
  Eigen::VectorXd grad = qp.G * x + qp.g;
  if (qp.A_eq.rows()) grad += qp.A_eq.transpose() * lambda;
  if (qp.A_in.rows()) grad += qp.A_in.transpose() * mu;
  c.stationarity = grad.lpNorm<Eigen::Infinity>();
  if (qp.A_eq.rows()) c.primal = (qp.A_eq * x - qp.b_eq).lpNorm<Eigen::Infinity>();
  if (qp.A_in.rows()) {
    Eigen::VectorXd slack = qp.A_in * x - qp.b_in;
    c.primal = std::max(c.primal, std::max(0.0, slack.maxCoeff()));
    c.dual = std::max(0.0, -mu.minCoeff());
    c.complementarity = (mu.array() * slack.array()).abs().maxCoeff();
  }
  // Dual function: min over x of the Lagrangian, attained at
  // x* = -G^{-1}(g + A'y).
  Eigen::VectorXd lin = qp.g;
  double constant = 0.0;
  if (qp.A_eq.rows()) {
    lin += qp.A_eq.transpose() * lambda;
    constant -= lambda.dot(qp.b_eq);
  }
  if (qp.A_in.rows()) {
    lin += qp.A_in.transpose() * mu;
    constant -= mu.dot(qp.b_in);
  }
  Eigen::VectorXd xs = -qp.G.llt().solve(lin);
  double dual_value = 0.5 * xs.dot(qp.G * xs) + lin.dot(xs) + constant;
  c.gap = qp.objective(x) - dual_value;
  return c;
}

void DenseQpSolver::set_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& g) {
  G_ = G;
  g_ = g;
  llt_.compute(G);
  if (llt_.info() != Eigen::Success) throw ContractError("DenseQpSolver: Hessian is not positive definite");
  const Eigen::Index n = G.rows();
  Eigen::MatrixXd L = llt_.matrixL();
  J0_ = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)).transpose();
}

QpResult DenseQpSolver::solve(const QpProblem& qp) {
  set_objective(qp.G, qp.g);
  return solve(qp.A_eq, qp.b_eq, qp.A_in, qp.b_in);
}

// Zeroes d below position iq with Givens rotations, carrying J along, then
// appends d's head as the next column of R.
bool DenseQpSolver::add_constraint() {
  const int n = static_cast<int>(J_.rows());
  for (int j = n - 1; j >= iq_ + 1; --j) {
    double cc = d_[j - 1], ss = d_[j];
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d_[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d_[j - 1] = -h;
    } else {
      d_[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J_(k, j - 1), t2 = J_(k, j);
      J_(k, j - 1) = t1 * cc + t2 * ss;
      J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
    }
  }
  ++iq_;
  for (int i = 0; i < iq_; ++i) R_(i, iq_ - 1) = d_[i];
  if (std::abs(d_[iq_ - 1]) <= kEps * r_norm_) return false;
  r_norm_ = std::max(r_norm_, std::abs(d_[iq_ - 1]));
  return true;
}

void DenseQpSolver::delete_constraint(int qq) {
  const int n = static_cast<int>(J_.rows());
  for (int i = qq; i < iq_ - 1; ++i) {
    active_[i] = active_[i + 1];
    u_[i] = u_[i + 1];
    R_.col(i) = R_.col(i + 1);
  }
  active_.pop_back();
  R_.col(iq_ - 1).setZero();
  u_[iq_ - 1] = 0.0;
  --iq_;
  // R lost a column and is now upper Hessenberg from qq on; rotate it back.
  for (int j = qq; j < iq_; ++j) {
    double cc = R_(j, j), ss = R_(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R_(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R_(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R_(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq_; ++k) {
      const double t1 = R_(j, k), t2 = R_(j + 1, k);
      R_(j, k) = t1 * cc + t2 * ss;
      R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J_(k, j), t2 = J_(k, j + 1);
      J_(k, j) = t1 * cc + t2 * ss;
      J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
    }
  }
}

QpResult DenseQpSolver::solve(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                              const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in) {
  const int n = static_cast<int>(G_.rows());
  const int me = static_cast<int>(A_eq.rows());
  const int mi = static_cast<int>(A_in.rows());
  if (n == 0) throw ContractError("DenseQpSolver: objective not set");

  // Internally constraints read n_i' x >= c_i with unit-norm n_i.
  Eigen::MatrixXd N(n, me + mi);
  Eigen::VectorXd c(me + mi), scale(me + mi);
  for (int i = 0; i < me + mi; ++i) {
    Eigen::VectorXd a = i < me ? Eigen::VectorXd(A_eq.row(i).transpose())
                               : Eigen::VectorXd(A_in.row(i - me).transpose());
    const double b = i < me ? b_eq[i] : b_in[i - me];
    double norm = a.norm();
    if (norm == 0.0) norm = 1.0;
    scale[i] = norm;
    N.col(i) = -a / norm;
    c[i] = -b / norm;
  }

  QpResult res;
  J_ = J0_;
  R_.setZero(n, n);
  d_.setZero(n);
  z_.setZero(n);
  r_.setZero(n);
  u_.setZero(n + 1);
  active_.clear();
  iq_ = 0;
  r_norm_ = 1.0;

  Eigen::VectorXd x = -llt_.solve(g_);
  double f = 0.5 * g_.dot(x);

  auto step_direction = [&](const Eigen::VectorXd& np) {
    d_.noalias() = J_.transpose() * np;
    z_.setZero();
    for (int j = iq_; j < n; ++j) z_ += J_.col(j) * d_[j];
    for (int i = iq_ - 1; i >= 0; --i) {
      double sum = d_[i];
      for (int j = i + 1; j < iq_; ++j) sum -= R_(i, j) * r_[j];
      r_[i] = sum / R_(i, i);
    }
  };
  // z'np equals the squared tail of d; compare it to the whole of d so the
  // test does not depend on constraint scaling.
  auto z_is_zero = [&]() {
    double tail = d_.tail(n - iq_).squaredNorm();
    return tail <= 1e-14 * std::max(d_.squaredNorm(), 1e-300);
  };

  for (int i = 0; i < me; ++i) {
    const Eigen::VectorXd np = N.col(i);
    step_direction(np);
    if (z_is_zero()) {
      // Dependent on the rows already active: redundant if consistent.
      if (std::abs(c[i] - np.dot(x)) <= 1e-9 * std::max(1.0, std::abs(c[i]))) {
        continue;
      }
      res.status = QpStatus::Infeasible;
      return res;
    }
    const double t2 = (c[i] - np.dot(x)) / z_.dot(np);
    x += t2 * z_;
    for (int k = 0; k < iq_; ++k) u_[k] -= t2 * r_[k];
    u_[iq_] = t2;
    f += 0.5 * t2 * t2 * z_.dot(np);
    active_.push_back(i);
    if (!add_constraint()) {
      res.status = QpStatus::Infeasible;  // dependent equality rows
      return res;
    }
  }

  const int budget = max_iterations > 0 ? max_iterations : 20 * (n + me + mi) + 100;
  std::vector<char> is_active(me + mi, 0), excluded(me + mi, 0);
  for (int i = 0; i < me; ++i) is_active[i] = 1;
  const int me_active = iq_;
  Eigen::VectorXd s(mi);
  bool done = false;
  int iter = 0;
  while (!done) {
    if (++iter > budget) {
      res.status = QpStatus::MaxIter;
      res.iterations = iter;
      return res;
    }
    // Most violated inactive inequality.
    s.noalias() = N.rightCols(mi).transpose() * x - c.tail(mi);
    int p = -1;
    double worst = -1e-10;
    for (int i = 0; i < mi; ++i) {
      if (is_active[me + i] || excluded[me + i]) continue;
      if (s[i] < worst) {
        worst = s[i];
        p = me + i;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd np = N.col(p);
    double sp = s[p - me];
    double u_plus = 0.0;
    while (true) {
      step_direction(np);
      double t1 = kInf;
      int drop = -1;
      for (int k = me_active; k < iq_; ++k) {
        if (r_[k] > 0.0 && u_[k] / r_[k] < t1) {
          t1 = u_[k] / r_[k];
          drop = k;
        }
      }
      const bool z_zero = z_is_zero();
      const double zn = z_.dot(np);
      const double t2 = z_zero ? kInf : -sp / zn;
      const double t = std::min(t1, t2);
      if (t == kInf) {
        res.status = QpStatus::Infeasible;
        res.iterations = iter;
        return res;
      }
      if (t2 == kInf) {
        // Dual-only step; the blocking constraint leaves the active set.
        for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
        u_plus += t;
        is_active[active_[drop]] = 0;
        delete_constraint(drop);
        continue;
      }
      x += t * z_;
      f += t * zn * (0.5 * t + u_plus);
      for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
      u_plus += t;
      if (t2 <= t1) {
        active_.push_back(p);
        u_[iq_] = u_plus;
        if (add_constraint()) {
          is_active[p] = 1;
        } else {
          // Numerically dependent on the active set; it is satisfied at
          // equality now, so leave it out and carry on.
          active_.pop_back();
          --iq_;
          R_.col(iq_).setZero();
          u_[iq_] = 0.0;
          excluded[p] = 1;
        }
        break;
      }
      is_active[active_[drop]] = 0;
      delete_constraint(drop);
      sp = np.dot(x) - c[p];
      if (++iter > budget) {
        res.status = QpStatus::MaxIter;
        res.iterations = iter;
        return res;
      }
    }
  }

  res.status = QpStatus::Optimal;
  res.iterations = iter;
  res.x = x;
  res.lambda.setZero(me);
  res.mu.setZero(mi);
  for (int k = 0; k < iq_; ++k) {
    const int id = active_[k];
    if (id < me) res.lambda[id] = u_[k] / scale[id];
    else res.mu[id - me] = u_[k] / scale[id];
  }
  res.cost = 0.5 * x.dot(G_ * x) + g_.dot(x);
  (void)f;
  QpProblem view{G_, g_, A_eq, b_eq, A_in, b_in};
  res.certificate = certify(view, x, res.lambda, res.mu);
  return res;
}

void write_qp(std::ostream& out, const QpProblem& qp) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "qp n=" << qp.G.rows() << " meq=" << qp.A_eq.rows() << " min=" << qp.A_in.rows() << '\n';
  write_block(out, "G", qp.G);
  write_block(out, "g", qp.g.transpose());
  write_block(out, "A_eq", qp.A_eq);
  write_block(out, "b_eq", qp.b_eq.transpose());
  write_block(out, "A_in", qp.A_in);
  write_block(out, "b_in", qp.b_in.transpose());
  out.flags(flags);
  out.precision(prec);
}

}  // namespace swarm
