#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace swarm {

// minimize 0.5 x'Gx + g'x  subject to  A_eq x = b_eq,  A_in x <= b_in.
struct QpProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;

  double objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(G * x) + g.dot(x); }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

// Residuals of the KKT conditions with Lagrangian
//   f(x) + lambda'(A_eq x - b_eq) + mu'(A_in x - b_in),  mu >= 0.
struct QpCertificate {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double gap = 0.0;  // f(x) minus the dual function at (lambda, mu)

  double worst_kkt() const;
};

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd x;
  double cost = 0.0;
  Eigen::VectorXd lambda;  // equality multipliers
  Eigen::VectorXd mu;      // inequality multipliers
  QpCertificate certificate;
  int iterations = 0;
};

QpCertificate certify(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                      const Eigen::VectorXd& mu);

// Goldfarb-Idnani dual active-set method. The Hessian factorization is
// kept between solves, so many constraint sets can share one objective.
// Holds scratch buffers: one instance per thread.
class DenseQpSolver {
 public:
  void set_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& g);
  QpResult solve(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                 const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in);
  QpResult solve(const QpProblem& qp);

  int max_iterations = 0;  // 0 picks a budget from the problem size

 private:
  bool add_constraint();
  void delete_constraint(int position);

  Eigen::MatrixXd G_;
  Eigen::VectorXd g_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd J0_;  // inverse transpose of the Cholesky factor

  Eigen::MatrixXd J_, R_;
  Eigen::VectorXd d_, z_, r_, u_;
  std::vector<int> active_;
  int iq_ = 0;
  double r_norm_ = 1.0;
};

// Plain-text dump of one QP for offline inspection. Format: a header line
// "qp n=<vars> meq=<rows> min=<rows>", then blocks "G", "g", "A_eq",
// "b_eq", "A_in", "b_in", each name on its own line followed by one
// matrix row per line, entries space-separated with 17 significant digits.
void write_qp(std::ostream& out, const QpProblem& qp);

}  // namespace swarm
