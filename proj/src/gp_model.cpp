#include "grief/gp_model.hpp"

#include <cmath>
#include <numbers>

#include "grief/detail/spd.hpp"
#include "grief/errors.hpp"

namespace grief {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_state(const SuffStats& stats, const ModelState& state) {
  if (state.w_dense) {
    require(state.w_dense->rows() == stats.r.size() && state.w_dense->cols() == stats.r.size(),
            "model state: dense weight matrix shape mismatch");
  } else {
    require(state.w.size() == stats.r.size(), "model state: weight length mismatch");
    require((state.w.array() > 0.0).all(), "model state: weights must be positive");
  }
  require(state.sigma2 > 0.0, "model state: noise variance must be positive");
}

// A as a concrete matrix; orthogonal stats may carry an empty A meaning the
// identity.
Eigen::MatrixXd materialize_a(const SuffStats& stats) {
  if (stats.orthogonal && stats.a.size() == 0)
    return Eigen::MatrixXd::Identity(stats.p(), stats.p());
  return stats.a;
}

Eigen::MatrixXd build_p(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, double sigma2) {
  Eigen::MatrixXd p = a;
  p.diagonal() += (sigma2 / w.array()).matrix();
  return p;
}

}  // namespace

SuffStats precompute(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y) {
  require(phi.rows() == y.size(), "precompute: row count mismatch");
  SuffStats stats;
  stats.yty = y.squaredNorm();
  stats.r = phi.transpose() * y;
  stats.a = phi.transpose() * phi;
  stats.orthogonal = false;
  stats.effective_p = static_cast<int>(phi.cols());
  return stats;
}

double lml(const SuffStats& stats, const ModelState& state, int n) {
  check_state(stats, state);
  if (state.w_dense) return lml_dense_w(stats, *state.w_dense, state.sigma2, n);
  const int p = stats.p();
  const Eigen::MatrixXd a = materialize_a(stats);
  const Eigen::MatrixXd pmat = build_p(a, state.w, state.sigma2);
  const auto llt = detail::factor_spd(pmat, "lml");
  const double r_pinv_r = stats.r.dot(llt.solve(stats.r));
  const double log_det_p = detail::log_det_from_llt(llt);
  const double sum_log_w = state.w.array().log().sum();
  const double value =
      -0.5 * (log_det_p + sum_log_w + static_cast<double>(n - p) * std::log(state.sigma2) +
              (stats.yty - r_pinv_r) / state.sigma2 +
              static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
  if (!std::isfinite(value)) throw NumericalError("lml: evaluation is not finite");
  return value;
}

Grads lml_grads(const SuffStats& stats, const ModelState& state, int n) {
  check_state(stats, state);
  require(!state.w_dense, "lml_grads: dense weight matrices are not supported");
  const double s2 = state.sigma2;
  const Eigen::MatrixXd a = materialize_a(stats);
  const Eigen::MatrixXd pmat = build_p(a, state.w, s2);
  const auto llt = detail::factor_spd(pmat, "lml_grads");

  const Eigen::VectorXd u = llt.solve(stats.r);   // P^{-1} r
  const Eigen::MatrixXd m = llt.solve(a);         // P^{-1} A

  Grads g;
  const Eigen::ArrayXd fit = (stats.r - a * u).array().square() / (2.0 * s2 * s2);
  const Eigen::ArrayXd complexity =
      (a.diagonal().array() - (a.array() * m.array()).colwise().sum().transpose()) / (2.0 * s2);
  g.dw = (fit - complexity).matrix();
  g.dsigma2 = (stats.yty - 2.0 * stats.r.dot(u) + u.dot(a * u)) / (2.0 * s2 * s2) -
              (static_cast<double>(n) - m.trace()) / (2.0 * s2);
  return g;
}

std::pair<Transform, SuffStats> orthogonalize(const Eigen::MatrixXd& phi,
                                              const Eigen::VectorXd& y) {
  require(phi.rows() == y.size(), "orthogonalize: row count mismatch");
  require(phi.size() > 0, "orthogonalize: empty basis");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (!(smax > 0.0)) throw NumericalError("orthogonalize: basis has rank zero");
  int p_tilde = 0;
  while (p_tilde < sv.size() && sv[p_tilde] > 1e-10 * smax) ++p_tilde;

  Transform tf;
  tf.v = svd.matrixV().leftCols(p_tilde);
  tf.sigma = sv.head(p_tilde);

  SuffStats stats;
  stats.yty = y.squaredNorm();
  stats.r = (tf.v.transpose() * (phi.transpose() * y)).cwiseQuotient(tf.sigma);
  stats.a = Eigen::MatrixXd::Identity(p_tilde, p_tilde);
  stats.orthogonal = true;
  stats.effective_p = p_tilde;
  return {std::move(tf), std::move(stats)};
}

FastEval lml_fast(const SuffStats& stats, const ModelState& state, int n) {
  require(stats.orthogonal, "lml_fast: stats are not orthogonalized");
  check_state(stats, state);
  const int p = stats.p();
  const double s2 = state.sigma2;

  // With A = I both P and every solve is diagonal; everything below is a
  // single pass over the p coefficients.
  const Eigen::ArrayXd pd = s2 / state.w.array() + 1.0;
  const Eigen::ArrayXd r = stats.r.array();
  const Eigen::ArrayXd z = r / pd;

  const double log_det_p = pd.log().sum();
  const double sum_log_w = state.w.array().log().sum();
  const double r_pinv_r = (r * z).sum();

  FastEval out;
  out.lml = -0.5 * (log_det_p + sum_log_w + static_cast<double>(n - p) * std::log(s2) +
                    (stats.yty - r_pinv_r) / s2 +
                    static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
  out.dw = ((r - z).square() / (2.0 * s2 * s2) - (1.0 - 1.0 / pd) / (2.0 * s2)).matrix();
  out.dsigma2 = (stats.yty - 2.0 * r_pinv_r + (z * z).sum()) / (2.0 * s2 * s2) -
                (static_cast<double>(n) - (1.0 / pd).sum()) / (2.0 * s2);
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> predict(const GriefBasis& basis,
                                                    const SuffStats& stats,
                                                    const ModelState& state,
                                                    const Eigen::VectorXd& y,
                                                    const Eigen::MatrixXd& xstar,
                                                    const Transform* transform) {
  check_state(stats, state);
  // y only cross-checks the stats; an empty vector skips the check (the
  // stats already carry the data contribution).
  require(y.size() == 0 || std::abs(y.squaredNorm() - stats.yty) <= 1e-6 * (1.0 + stats.yty),
          "predict: targets do not match the precomputed statistics");

  Eigen::MatrixXd phi_star = phi_at(basis, xstar);
  if (stats.orthogonal) {
    require(transform != nullptr, "predict: orthogonalized stats need the transform");
    phi_star = phi_star * (transform->v * transform->sigma.cwiseInverse().asDiagonal());
  }

  Eigen::MatrixXd pmat;
  const Eigen::MatrixXd a = materialize_a(stats);
  if (state.w_dense) {
    const auto lw = detail::factor_spd(*state.w_dense, "predict: W");
    pmat = state.sigma2 *
               lw.solve(Eigen::MatrixXd::Identity(stats.p(), stats.p())) +
           a;
  } else {
    pmat = build_p(a, state.w, state.sigma2);
  }
  const auto llt = detail::factor_spd(pmat, "predict");

  // Posterior weight mean mu + P^{-1}(r - A mu); the quadratic form in
  // P^{-1} gives the latent variance sigma2 * phi^T P^{-1} phi.
  Eigen::VectorXd rhat = stats.r;
  if (state.mu) {
    require(state.mu->size() == stats.r.size(), "predict: mu length mismatch");
    rhat -= a * (*state.mu);
  }
  Eigen::VectorXd coeff = llt.solve(rhat);
  if (state.mu) coeff += *state.mu;

  const Eigen::VectorXd mean = phi_star * coeff;
  const Eigen::MatrixXd solved = llt.solve(phi_star.transpose());
  const Eigen::VectorXd quad =
      (phi_star.transpose().array() * solved.array()).colwise().sum().transpose();
  const Eigen::VectorXd var =
      (state.sigma2 * (1.0 + quad.array())).matrix();
  return {mean, var};
}

double lml_dense_w(const SuffStats& stats, const Eigen::MatrixXd& w_dense, double sigma2,
                   int n) {
  const int p = stats.p();
  require(w_dense.rows() == p && w_dense.cols() == p, "lml_dense_w: W shape mismatch");
  require(sigma2 > 0.0, "lml_dense_w: noise variance must be positive");

  Eigen::LLT<Eigen::MatrixXd> lw(w_dense);
  if (lw.info() != Eigen::Success)
    throw NumericalError("lml_dense_w: W is not symmetric positive definite");
  const double log_det_w = detail::log_det_from_llt(lw);

  const Eigen::MatrixXd pmat =
      sigma2 * lw.solve(Eigen::MatrixXd::Identity(p, p)) + materialize_a(stats);
  const auto llt = detail::factor_spd(pmat, "lml_dense_w");
  const double r_pinv_r = stats.r.dot(llt.solve(stats.r));
  return -0.5 * (detail::log_det_from_llt(llt) + log_det_w +
                 static_cast<double>(n - p) * std::log(sigma2) +
                 (stats.yty - r_pinv_r) / sigma2 +
                 static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

double lml_with_mean(const SuffStats& stats, const ModelState& state, int n) {
  require(state.mu.has_value(), "lml_with_mean: state has no prior mean");
  require(state.mu->size() == stats.r.size(), "lml_with_mean: mu length mismatch");
  const Eigen::VectorXd& mu = *state.mu;
  const Eigen::MatrixXd a = materialize_a(stats);

  SuffStats shifted = stats;
  shifted.a = a;
  shifted.r = stats.r - a * mu;
  shifted.yty = stats.yty - 2.0 * stats.r.dot(mu) + mu.dot(a * mu);
  if (state.w_dense) return lml_dense_w(shifted, *state.w_dense, state.sigma2, n);
  ModelState zero_mean = state;
  zero_mean.mu.reset();
  return lml(shifted, zero_mean, n);
}

}  // namespace grief
