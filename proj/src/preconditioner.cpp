#include "grief/preconditioner.hpp"

#include <stdexcept>

#include "grief/detail/spd.hpp"

namespace grief {

WoodburyApplier::WoodburyApplier(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w,
                                 double sigma2)
    : phi_(phi), sigma2_(sigma2) {
  if (w.size() != phi.cols()) throw std::invalid_argument("WoodburyApplier: weight length mismatch");
  if (!(w.array() > 0.0).all() || !(sigma2 > 0.0))
    throw std::invalid_argument("WoodburyApplier: weights and noise must be positive");
  Eigen::MatrixXd p = phi.transpose() * phi;
  p.diagonal() += (sigma2 / w.array()).matrix();
  p_llt_ = detail::factor_spd(p, "WoodburyApplier");
}

Eigen::VectorXd WoodburyApplier::apply(const Eigen::VectorXd& v) const {
  if (v.size() != phi_.rows()) throw std::invalid_argument("WoodburyApplier: vector length mismatch");
  return (v - phi_ * p_llt_.solve(phi_.transpose() * v)) / sigma2_;
}

PcgResult pcg_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& k_apply,
                    double sigma2, const WoodburyApplier* precond, const Eigen::VectorXd& b,
                    double tol, int max_iters) {
  PcgResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = precond ? precond->apply(r) : r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  res.precond_sq_norms.push_back(rz);

  for (int k = 1; k <= max_iters; ++k) {
    const Eigen::VectorXd ap = k_apply(p) + sigma2 * p;
    const double alpha = rz / p.dot(ap);
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = k;
    const double rel = r.norm() / bnorm;
    res.rel_residuals.push_back(rel);
    z = precond ? precond->apply(r) : r;
    const double rz_next = r.dot(z);
    res.precond_sq_norms.push_back(rz_next);
    if (rel <= tol) {
      res.converged = true;
      break;
    }
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return res;
}

}  // namespace grief
