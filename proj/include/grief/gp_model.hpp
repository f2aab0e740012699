#ifndef GRIEF_GP_MODEL_HPP
#define GRIEF_GP_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "grief/grief_basis.hpp"

// Likelihood, derivatives and prediction for the weighted eigenfunction
// kernel. SuffStats and Transform are immutable after construction; the
// evaluation functions are pure, so different ModelState values may be
// scored concurrently over shared statistics.

namespace grief {

// Sufficient statistics of the training data under a fixed basis. Once
// computed, every likelihood evaluation is independent of n.
struct SuffStats {
  double yty = 0.0;
  Eigen::VectorXd r;   // phi^T y
  Eigen::MatrixXd a;   // phi^T phi; identity (and may be left empty) when orthogonal
  bool orthogonal = false;
  int effective_p = 0;

  int p() const { return static_cast<int>(r.size()); }
};

// Kernel hyperparameters of the re-weighted basis expansion: per-function
// weights and noise variance, optionally a non-zero prior weight mean and a
// dense SPD weight covariance.
struct ModelState {
  Eigen::VectorXd w;
  double sigma2 = 1.0;
  std::optional<Eigen::VectorXd> mu;
  std::optional<Eigen::MatrixXd> w_dense;
};

// Basis orthogonalization: right singular vectors and non-zero singular
// values of phi, with phi * v * diag(1/sigma) orthonormal on the training
// inputs.
struct Transform {
  Eigen::MatrixXd v;      // p x p_tilde
  Eigen::VectorXd sigma;  // p_tilde

  int p_tilde() const { return static_cast<int>(sigma.size()); }
};

struct Grads {
  Eigen::VectorXd dw;
  double dsigma2 = 0.0;
};

struct FastEval {
  double lml = 0.0;
  Eigen::VectorXd dw;
  double dsigma2 = 0.0;
};

SuffStats precompute(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y);

// Log marginal likelihood of n targets under the weighted basis kernel with
// noise, evaluated through the p x p system P = sigma2 W^{-1} + A.
double lml(const SuffStats& stats, const ModelState& state, int n);

// Analytic derivatives of lml with respect to every weight and the noise
// variance, O(p^3) per call.
Grads lml_grads(const SuffStats& stats, const ModelState& state, int n);

// SVD-based basis orthogonalization. Singular values below 1e-10 times the
// largest are dropped, defining the effective basis size.
std::pair<Transform, SuffStats> orthogonalize(const Eigen::MatrixXd& phi,
                                              const Eigen::VectorXd& y);

// O(p) likelihood and derivatives for orthogonalized statistics, where both
// A and P are diagonal.
FastEval lml_fast(const SuffStats& stats, const ModelState& state, int n);

// Pointwise posterior prediction through p-dimensional solves; no n x n
// matrix is formed. transform must be supplied for orthogonalized stats so
// the new-point basis can be mapped into the transformed coordinates.
std::pair<Eigen::VectorXd, Eigen::VectorXd> predict(const GriefBasis& basis,
                                                    const SuffStats& stats,
                                                    const ModelState& state,
                                                    const Eigen::VectorXd& y,
                                                    const Eigen::MatrixXd& xstar,
                                                    const Transform* transform = nullptr);

// Likelihood with a dense SPD weight matrix; reduces to lml when w_dense is
// diagonal.
double lml_dense_w(const SuffStats& stats, const Eigen::MatrixXd& w_dense, double sigma2,
                   int n);

// Likelihood with a non-zero prior weight mean: r and y^T y absorb the mean
// and the zero-mean formulas apply unchanged.
double lml_with_mean(const SuffStats& stats, const ModelState& state, int n);

}  // namespace grief

#endif
