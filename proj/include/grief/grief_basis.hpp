#ifndef GRIEF_GRIEF_BASIS_HPP
#define GRIEF_GRIEF_BASIS_HPP

#include <Eigen/Dense>
#include <vector>

#include "grief/kernels.hpp"
#include "grief/tensor_algebra.hpp"

namespace grief {

// Cartesian grid of inducing points, stored as one strictly increasing
// coordinate vector per dimension; the full grid of prod mbar_i points is
// implied, never expanded.
struct GridInducing {
  std::vector<Eigen::VectorXd> axes;
  std::vector<bool> degenerate;  // per-dimension zero-range warning

  int dims() const { return static_cast<int>(axes.size()); }
  // log of the implied number of grid points (the count itself can exceed
  // any integer type)
  double log_num_points() const;
};

// Per-dimension symmetric eigendecompositions of the grid covariance
// factors: K_i = Q_i diag(lambda_i) Q_i^T.
struct KronEig {
  std::vector<Eigen::MatrixXd> q_factors;
  std::vector<Eigen::VectorXd> lambda_factors;
};

// The eigenvector columns of one dimension referenced by a Selection,
// stored deduplicated so prediction needs at most p columns per dimension.
struct DimBasis {
  Eigen::VectorXi ref_cols;    // distinct referenced column indices, ascending
  Eigen::MatrixXd q_cols;      // mbar_i x |ref_cols|
  Eigen::VectorXi col_of_row;  // selection row -> column of q_cols
};

// Scaled eigenfunction basis: column j of phi is the j-th selected
// eigenfunction lambda_j^{-1/2} k(., U) q_j evaluated on the training inputs.
// Immutable after construction; concurrent phi_at calls are safe.
struct GriefBasis {
  GridInducing grid;
  ProductKernel kernel;
  Selection selection;
  std::vector<DimBasis> dims;
  Eigen::MatrixXd phi;  // n x p

  int p() const { return selection.count(); }
};

// Places axis i on mbar_i equally spaced empirical quantiles of column i,
// pushing the two end points outward by 5% of the column range. A constant
// column falls back to [c-1, c+1] and sets the degenerate flag; duplicate
// quantiles are perturbed to keep the axis strictly increasing.
GridInducing build_grid(const Eigen::MatrixXd& x, const std::vector<int>& mbar);

// Eigendecomposition of each one-dimensional grid covariance. Eigenvalues
// are clamped below at 1e-12 times the per-dimension maximum so later
// inverse-root scalings stay finite.
KronEig decompose(const GridInducing& grid, const ProductKernel& kernel);

GriefBasis build_phi(const Eigen::MatrixXd& x, const GridInducing& grid,
                     const ProductKernel& kernel, const KronEig& eig, int p);

// Evaluates the stored basis at new points; selection and eigenvectors are
// reused, so rows reproduce build_phi bitwise on the training inputs.
Eigen::MatrixXd phi_at(const GriefBasis& basis, const Eigen::MatrixXd& xstar);

// For a 1D dataset and a schedule of axis sizes, returns the angle between
// the grid-approximated top eigenfunction evaluated on x and the top
// eigenvector of the dense covariance on x. The training coordinates are
// inserted into every axis so the grid always contains them.
std::vector<double> convergence_probe(const Eigen::VectorXd& x, const BaseKernel1D& kern,
                                      const std::vector<int>& mbar_schedule);

}  // namespace grief

#endif
