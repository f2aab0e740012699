#ifndef GRIEF_DETAIL_SPD_HPP
#define GRIEF_DETAIL_SPD_HPP

#include <Eigen/Dense>
#include <string>

namespace grief::detail {

// Cholesky factorization with one retry under a relative jitter of
// 1e-10 * trace / p; the retry is reported on stderr and a persistent
// failure raises NumericalError.
Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m, const std::string& context);

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt);

}  // namespace grief::detail

#endif
