#ifndef GRIEF_TEST_HELPERS_HPP
#define GRIEF_TEST_HELPERS_HPP

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "grief/tensor_algebra.hpp"

namespace grief::testing {

// Dense oracles for the structured products; deliberately the naive
// constructions so they share nothing with the library implementations.

inline Eigen::MatrixXd kron_dense(const std::vector<Eigen::MatrixXd>& factors) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (const auto& f : factors) {
    Eigen::MatrixXd next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = next;
  }
  return out;
}

inline Eigen::MatrixXd khatri_rao_dense(const std::vector<Eigen::MatrixXd>& factors) {
  const Eigen::Index n = factors.front().rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(n, 1);
  for (const auto& f : factors) {
    Eigen::MatrixXd next(n, out.cols() * f.cols());
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index k = 0; k < f.cols(); ++k) next(r, j * f.cols() + k) = out(r, j) * f(r, k);
    out = next;
  }
  return out;
}

// Dense p x m selection matrix from per-dimension index tuples under the
// row-major tuple ordering.
inline Eigen::MatrixXd selection_dense(const Selection& sel, const std::vector<int>& mbar) {
  Eigen::Index m = 1;
  for (int mm : mbar) m *= mm;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sel.count(), m);
  for (int j = 0; j < sel.count(); ++j) {
    Eigen::Index flat = 0;
    for (size_t i = 0; i < mbar.size(); ++i)
      flat = flat * mbar[i] + sel.index_table(j, static_cast<Eigen::Index>(i));
    s(j, flat) = 1.0;
  }
  return s;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = unif(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double lo = -1.0,
                                     double hi = 1.0) {
  return random_matrix(n, 1, rng, lo, hi).col(0);
}

// Distinct random index tuples for a selection over the given axis sizes.
inline Selection random_selection(const std::vector<int>& mbar, int p, std::mt19937_64& rng) {
  Selection sel;
  sel.index_table.resize(p, static_cast<Eigen::Index>(mbar.size()));
  std::vector<std::vector<int>> used;
  for (int j = 0; j < p; ++j) {
    std::vector<int> tuple(mbar.size());
    do {
      for (size_t i = 0; i < mbar.size(); ++i)
        tuple[i] = std::uniform_int_distribution<int>(0, mbar[i] - 1)(rng);
    } while (std::find(used.begin(), used.end(), tuple) != used.end());
    used.push_back(tuple);
    for (size_t i = 0; i < mbar.size(); ++i)
      sel.index_table(j, static_cast<Eigen::Index>(i)) = tuple[i];
  }
  sel.log_values = Eigen::VectorXd::LinSpaced(p, 1.0, 0.0);  // descending placeholder
  return sel;
}

}  // namespace grief::testing

#endif
