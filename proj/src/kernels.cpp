#include "grief/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace grief {

double eval_1d(const BaseKernel1D& kern, double a, double b) {
  const double d = a - b;
  return kern.amplitude * std::exp(-d * d / (2.0 * kern.lengthscale * kern.lengthscale));
}

Eigen::MatrixXd cross_cov_1d(const BaseKernel1D& kern, const Eigen::VectorXd& xs,
                             const Eigen::VectorXd& us) {
  Eigen::MatrixXd out(xs.size(), us.size());
  for (Eigen::Index l = 0; l < us.size(); ++l)
    for (Eigen::Index j = 0; j < xs.size(); ++j) out(j, l) = eval_1d(kern, xs[j], us[l]);
  return out;
}

double eval_product(const ProductKernel& kern, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& z) {
  if (x.size() != kern.dim() || z.size() != kern.dim())
    throw std::invalid_argument("eval_product: point dimension mismatch");
  double v = 1.0;
  for (int i = 0; i < kern.dim(); ++i) v *= eval_1d(kern.dims[static_cast<size_t>(i)], x[i], z[i]);
  return v;
}

ProductKernel make_se_ard(const Eigen::VectorXd& lengthscales, double total_variance) {
  if (lengthscales.size() == 0) throw std::invalid_argument("make_se_ard: empty lengthscales");
  if (total_variance <= 0.0) throw std::invalid_argument("make_se_ard: non-positive variance");
  const double amp = std::pow(total_variance, 1.0 / static_cast<double>(lengthscales.size()));
  ProductKernel kern;
  kern.dims.reserve(static_cast<size_t>(lengthscales.size()));
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (lengthscales[i] <= 0.0) throw std::invalid_argument("make_se_ard: non-positive lengthscale");
    kern.dims.push_back({KernelFamily::squared_exponential, lengthscales[i], amp});
  }
  return kern;
}

Eigen::MatrixXd gram(const ProductKernel& kern, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& z) {
  if (x.cols() != kern.dim() || z.cols() != kern.dim())
    throw std::invalid_argument("gram: input dimension mismatch");
  Eigen::MatrixXd out(x.rows(), z.rows());
  for (Eigen::Index j = 0; j < z.rows(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out(i, j) = eval_product(kern, x.row(i), z.row(j));
  return out;
}

}  // namespace grief
