#include "grief/detail/spd.hpp"

#include <cmath>
#include <iostream>

#include "grief/errors.hpp"

namespace grief::detail {

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m, const std::string& context) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * m.trace() / static_cast<double>(m.rows());
  std::cerr << "warning: " << context << ": factorization failed, retrying with jitter " << jitter
            << "\n";
  Eigen::MatrixXd mj = m;
  mj.diagonal().array() += jitter;
  llt.compute(mj);
  if (llt.info() == Eigen::Success) return llt;
  throw NumericalError(context +
                       ": matrix not positive definite; consider jitter or smaller weights");
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace grief::detail
