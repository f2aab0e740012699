#ifndef GRIEF_KERNELS_HPP
#define GRIEF_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

namespace grief {

enum class KernelFamily { squared_exponential };

// One-dimensional base kernel; a d-dimensional kernel is the product of
// these over the input coordinates.
struct BaseKernel1D {
  KernelFamily family = KernelFamily::squared_exponential;
  double lengthscale = 1.0;
  double amplitude = 1.0;
};

struct ProductKernel {
  std::vector<BaseKernel1D> dims;

  int dim() const { return static_cast<int>(dims.size()); }
};

double eval_1d(const BaseKernel1D& kern, double a, double b);

// Cross-covariance matrix with entry (j, l) = k(xs[j], us[l]).
Eigen::MatrixXd cross_cov_1d(const BaseKernel1D& kern, const Eigen::VectorXd& xs,
                             const Eigen::VectorXd& us);

double eval_product(const ProductKernel& kern, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& z);

// SE-ARD product kernel with per-dimension lengthscales; the total signal
// variance is split evenly over dimensions so the product amplitude is
// total_variance.
ProductKernel make_se_ard(const Eigen::VectorXd& lengthscales, double total_variance);

// Dense gram matrix of a product kernel, entry (i, j) = k(X.row(i), Z.row(j)).
Eigen::MatrixXd gram(const ProductKernel& kern, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& z);

}  // namespace grief

#endif
