#include "grief/grief_basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "grief/errors.hpp"

namespace grief {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Linear-interpolation empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double level) {
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Shared evaluation path for build_phi and phi_at: per-dimension
// cross-covariances against the stored eigenvector columns, combined in
// sign/log form and rescaled by the inverse root eigenvalues.
Eigen::MatrixXd eval_basis(const GridInducing& grid, const ProductKernel& kernel,
                           const Selection& selection, const std::vector<DimBasis>& dims,
                           const Eigen::MatrixXd& pts) {
  const int d = grid.dims();
  require(pts.cols() == d, "phi: point dimension mismatch");
  HadamardLogAccumulator acc(pts.rows(), selection.count());
  for (int i = 0; i < d; ++i) {
    const auto& db = dims[static_cast<size_t>(i)];
    const Eigen::MatrixXd kxu =
        cross_cov_1d(kernel.dims[static_cast<size_t>(i)], pts.col(i), grid.axes[static_cast<size_t>(i)]);
    const Eigen::MatrixXd g = kxu * db.q_cols;  // n x c_i
    Eigen::MatrixXd b(pts.rows(), selection.count());
    for (int j = 0; j < selection.count(); ++j) b.col(j) = g.col(db.col_of_row[j]);
    acc.multiply(b);
  }
  return acc.finish(-0.5 * selection.log_values);
}

}  // namespace

double GridInducing::log_num_points() const {
  double s = 0.0;
  for (const auto& a : axes) s += std::log(static_cast<double>(a.size()));
  return s;
}

GridInducing build_grid(const Eigen::MatrixXd& x, const std::vector<int>& mbar) {
  const int d = static_cast<int>(x.cols());
  require(x.rows() >= 2, "build_grid: need at least two points");
  require(static_cast<int>(mbar.size()) == d, "build_grid: mbar length mismatch");
  for (int m : mbar) require(m >= 2, "build_grid: mbar entries must be at least 2");

  GridInducing grid;
  grid.axes.resize(static_cast<size_t>(d));
  grid.degenerate.assign(static_cast<size_t>(d), false);
  for (int i = 0; i < d; ++i) {
    const int m = mbar[static_cast<size_t>(i)];
    std::vector<double> col(x.col(i).data(), x.col(i).data() + x.rows());
    std::sort(col.begin(), col.end());
    const double lo = col.front(), hi = col.back();
    const double range = hi - lo;
    Eigen::VectorXd axis(m);
    if (range <= 0.0) {
      grid.degenerate[static_cast<size_t>(i)] = true;
      for (int j = 0; j < m; ++j)
        axis[j] = lo - 1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(m - 1);
    } else {
      for (int j = 0; j < m; ++j)
        axis[j] = quantile_sorted(col, static_cast<double>(j) / static_cast<double>(m - 1));
      axis[0] = lo - 0.05 * range;
      axis[m - 1] = hi + 0.05 * range;
      for (int j = 1; j < m; ++j)
        if (axis[j] <= axis[j - 1]) axis[j] = axis[j - 1] + 1e-8 * range;
    }
    grid.axes[static_cast<size_t>(i)] = axis;
  }
  return grid;
}

KronEig decompose(const GridInducing& grid, const ProductKernel& kernel) {
  require(grid.dims() == kernel.dim(), "decompose: kernel dimension mismatch");
  KronEig eig;
  eig.q_factors.resize(static_cast<size_t>(grid.dims()));
  eig.lambda_factors.resize(static_cast<size_t>(grid.dims()));
  for (int i = 0; i < grid.dims(); ++i) {
    const Eigen::VectorXd& axis = grid.axes[static_cast<size_t>(i)];
    const Eigen::MatrixXd kuu = cross_cov_1d(kernel.dims[static_cast<size_t>(i)], axis, axis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kuu);
    if (solver.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "decompose: eigensolver failed in dimension " << i;
      throw NumericalError(msg.str());
    }
    Eigen::VectorXd lambda = solver.eigenvalues();
    const double floor = 1e-12 * lambda.maxCoeff();
    lambda = lambda.cwiseMax(floor);
    eig.q_factors[static_cast<size_t>(i)] = solver.eigenvectors();
    eig.lambda_factors[static_cast<size_t>(i)] = lambda;
  }
  return eig;
}

GriefBasis build_phi(const Eigen::MatrixXd& x, const GridInducing& grid,
                     const ProductKernel& kernel, const KronEig& eig, int p) {
  const int d = grid.dims();
  require(kernel.dim() == d, "build_phi: kernel dimension mismatch");
  require(x.cols() == d, "build_phi: input dimension mismatch");
  require(static_cast<int>(eig.q_factors.size()) == d, "build_phi: eigendecomposition mismatch");

  GriefBasis basis;
  basis.grid = grid;
  basis.kernel = kernel;
  basis.selection = top_p_kron_eigs(eig.lambda_factors, p);
  basis.dims.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXi sel = basis.selection.index_table.col(i);
    std::set<int> uniq(sel.data(), sel.data() + sel.size());
    DimBasis db;
    db.ref_cols.resize(static_cast<Eigen::Index>(uniq.size()));
    std::vector<int> local(static_cast<size_t>(eig.q_factors[static_cast<size_t>(i)].cols()), -1);
    int c = 0;
    for (int idx : uniq) {
      db.ref_cols[c] = idx;
      local[static_cast<size_t>(idx)] = c;
      ++c;
    }
    db.q_cols.resize(eig.q_factors[static_cast<size_t>(i)].rows(), db.ref_cols.size());
    for (Eigen::Index j = 0; j < db.ref_cols.size(); ++j)
      db.q_cols.col(j) = eig.q_factors[static_cast<size_t>(i)].col(db.ref_cols[j]);
    db.col_of_row.resize(sel.size());
    for (Eigen::Index j = 0; j < sel.size(); ++j)
      db.col_of_row[j] = local[static_cast<size_t>(sel[j])];
    basis.dims[static_cast<size_t>(i)] = std::move(db);
  }
  basis.phi = eval_basis(grid, kernel, basis.selection, basis.dims, x);
  return basis;
}

Eigen::MatrixXd phi_at(const GriefBasis& basis, const Eigen::MatrixXd& xstar) {
  return eval_basis(basis.grid, basis.kernel, basis.selection, basis.dims, xstar);
}

std::vector<double> convergence_probe(const Eigen::VectorXd& x, const BaseKernel1D& kern,
                                      const std::vector<int>& mbar_schedule) {
  require(x.size() >= 2, "convergence_probe: need at least two points");
  const auto n = x.size();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(cross_cov_1d(kern, x, x));
  const Eigen::VectorXd top_ref = ref.eigenvectors().col(n - 1);

  const double lo = x.minCoeff(), hi = x.maxCoeff();
  const double range = hi - lo;
  require(range > 0.0, "convergence_probe: degenerate inputs");

  std::vector<double> angles;
  angles.reserve(mbar_schedule.size());
  for (int mbar : mbar_schedule) {
    require(mbar >= 2, "convergence_probe: schedule entries must be at least 2");
    // mbar evenly spaced grid points; training coordinates are inserted and
    // colliding grid points dropped so U contains X exactly.
    std::vector<double> pts(x.data(), x.data() + n);
    for (int j = 0; j < mbar; ++j) {
      const double u = lo + range * static_cast<double>(j) / static_cast<double>(mbar - 1);
      bool collides = false;
      for (Eigen::Index k = 0; k < n; ++k)
        if (std::abs(u - x[k]) < 1e-12 * range) {
          collides = true;
          break;
        }
      if (!collides) pts.push_back(u);
    }
    std::sort(pts.begin(), pts.end());
    Eigen::VectorXd u = Eigen::Map<Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> grid_eig(cross_cov_1d(kern, u, u));
    const Eigen::Index m = u.size();
    const double lambda_top = grid_eig.eigenvalues()[m - 1];
    const Eigen::VectorXd q_top = grid_eig.eigenvectors().col(m - 1);

    const Eigen::VectorXd f = std::sqrt(static_cast<double>(m) / static_cast<double>(n)) /
                              lambda_top * (cross_cov_1d(kern, x, u) * q_top);
    const double cosang =
        std::min(1.0, std::abs(f.dot(top_ref)) / (f.norm() * top_ref.norm()));
    angles.push_back(std::acos(cosang));
  }
  return angles;
}

}  // namespace grief
