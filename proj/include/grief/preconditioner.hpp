#ifndef GRIEF_PRECONDITIONER_HPP
#define GRIEF_PRECONDITIONER_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace grief {

// Applies (phi diag(w) phi^T + sigma2 I)^{-1} through the inversion lemma:
// O(p^3) setup, O(np + p^2) per apply.
class WoodburyApplier {
 public:
  WoodburyApplier(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w, double sigma2);

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  Eigen::Index rows() const { return phi_.rows(); }

 private:
  Eigen::MatrixXd phi_;
  Eigen::LLT<Eigen::MatrixXd> p_llt_;
  double sigma2_;
};

inline Eigen::VectorXd woodbury_apply(const WoodburyApplier& applier, const Eigen::VectorXd& v) {
  return applier.apply(v);
}

struct PcgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> rel_residuals;      // ||r|| / ||b|| after each iteration
  std::vector<double> precond_sq_norms;   // r^T M^{-1} r after each iteration
};

// Preconditioned conjugate gradient for (K + sigma2 I) x = b where K is given
// as an apply operator. Pass precond = nullptr for plain CG. Stops when the
// relative residual falls to tol; if max_iters is exceeded the best iterate
// is returned with converged = false.
PcgResult pcg_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& k_apply,
                    double sigma2, const WoodburyApplier* precond, const Eigen::VectorXd& b,
                    double tol, int max_iters);

}  // namespace grief

#endif
