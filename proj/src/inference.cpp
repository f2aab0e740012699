#include "grief/inference.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>

#include "grief/detail/spd.hpp"
#include "grief/errors.hpp"
#include "grief/optim.hpp"

namespace grief {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Hyperparameter optimizers work in log space; beyond e^±20 the likelihood
// surface is numerically meaningless for standardized data.
constexpr double kLogParamBound = 20.0;

void check_chain_config(const ChainConfig& c) {
  require(c.total_iters > 0, "chain config: total_iters must be positive");
  require(c.burn_in >= 0 && c.burn_in < c.total_iters, "chain config: burn_in must be below total_iters");
  require(c.thin >= 1, "chain config: thin must be at least 1");
  require(c.step_size > 0.0, "chain config: step_size must be positive");
  require(c.adapt_target > 0.0 && c.adapt_target < 1.0, "chain config: adapt_target must lie in (0,1)");
}

double gaussian_log_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

// Posterior over v = (log w, log sigma2); gradients arrive by chain rule
// from the w/sigma2 derivatives of the likelihood.
class WeightPosterior final : public MalaTarget {
 public:
  WeightPosterior(const SuffStats& stats, int n, const Prior& w_prior, const Prior& s2_prior)
      : stats_(stats), n_(n), w_prior_(w_prior), s2_prior_(s2_prior) {}

  double log_density(const Eigen::VectorXd& v, Eigen::VectorXd& grad) const override {
    const int p = stats_.p();
    ModelState state;
    state.w = v.head(p).array().exp().matrix();
    state.sigma2 = std::exp(v[p]);
    grad.resize(p + 1);

    double lp;
    Eigen::VectorXd dw;
    double ds2;
    try {
      if (stats_.orthogonal) {
        const FastEval e = lml_fast(stats_, state, n_);
        lp = e.lml;
        dw = e.dw;
        ds2 = e.dsigma2;
      } else {
        lp = lml(stats_, state, n_);
        const Grads g = lml_grads(stats_, state, n_);
        dw = g.dw;
        ds2 = g.dsigma2;
      }
    } catch (const NumericalError&) {
      grad.setConstant(std::numeric_limits<double>::quiet_NaN());
      return -std::numeric_limits<double>::infinity();
    }

    for (int j = 0; j < p; ++j) {
      lp += w_prior_.log_pdf_log_coord(v[j]);
      grad[j] = dw[j] * state.w[j] + w_prior_.grad_log_coord(v[j]);
    }
    lp += s2_prior_.log_pdf_log_coord(v[p]);
    grad[p] = ds2 * state.sigma2 + s2_prior_.grad_log_coord(v[p]);
    return lp;
  }

 private:
  const SuffStats& stats_;
  int n_;
  Prior w_prior_;
  Prior s2_prior_;
};

Eigen::VectorXd median_lengthscales(const Eigen::MatrixXd& x, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  const int pairs = static_cast<int>(std::min<Eigen::Index>(500, n * (n - 1) / 2));
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Eigen::VectorXd ls(x.cols());
  std::vector<double> dist(static_cast<size_t>(pairs));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (int k = 0; k < pairs; ++k) {
      const Eigen::Index a = pick(rng), b = pick(rng);
      dist[static_cast<size_t>(k)] = std::abs(x(a, i) - x(b, i));
    }
    std::nth_element(dist.begin(), dist.begin() + pairs / 2, dist.end());
    ls[i] = std::max(dist[static_cast<size_t>(pairs / 2)], 1e-3);
  }
  return ls;
}

}  // namespace

Prior Prior::log_normal(double mode, double variance) {
  require(mode > 0.0 && variance > 0.0, "Prior: mode and variance must be positive");
  // Solve variance = (exp(s) - 1) * mode^2 * exp(3 s) for s = s2_log; the
  // left side is strictly increasing from 0, so a root always exists.
  const double target = std::log(variance) - 2.0 * std::log(mode);
  const auto g = [&](double s) { return 3.0 * s + std::log(std::expm1(s)) - target; };
  double lo = 1e-12, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  while (g(lo) > 0.0) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  Prior prior;
  prior.mode = mode;
  prior.variance = variance;
  prior.s2_log = 0.5 * (lo + hi);
  prior.mu_log = std::log(mode) + prior.s2_log;
  return prior;
}

double Prior::log_pdf_log_coord(double v) const { return gaussian_log_pdf(v, mu_log, s2_log); }

double Prior::grad_log_coord(double v) const { return -(v - mu_log) / s2_log; }

MalaRunResult mala_run(const MalaTarget& target, const Eigen::VectorXd& v0,
                       const ChainConfig& config, std::uint64_t seed) {
  check_chain_config(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd v = v0;
  Eigen::VectorXd grad(v.size());
  double lp = target.log_density(v, grad);
  require(std::isfinite(lp), "mala_run: initial state has non-finite log-density");

  double log_eps = std::log(config.step_size);
  MalaRunResult res;
  res.log_density_trace.reserve(static_cast<size_t>(config.total_iters));
  long accepts = 0;

  for (int t = 1; t <= config.total_iters; ++t) {
    const double eps = std::exp(log_eps);
    if (!grad.array().isFinite().all()) {
      // Cannot form a Langevin proposal here; treat as a rejection and back
      // off the step size.
      log_eps -= std::numbers::ln2;
      ++res.gradient_shrink_events;
      std::cerr << "warning: mala_run: non-finite gradient at iteration " << t
                << ", halving step size\n";
    } else {
      const double half = 0.5 * eps * eps;
      Eigen::VectorXd mean_fwd = v + half * grad;
      Eigen::VectorXd prop(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) prop[i] = mean_fwd[i] + eps * normal(rng);

      Eigen::VectorXd grad_prop(v.size());
      const double lp_prop = target.log_density(prop, grad_prop);

      double alpha = 0.0;
      if (std::isfinite(lp_prop) && grad_prop.array().isFinite().all()) {
        const Eigen::VectorXd mean_rev = prop + half * grad_prop;
        const double log_q_fwd = -(prop - mean_fwd).squaredNorm() / (2.0 * eps * eps);
        const double log_q_rev = -(v - mean_rev).squaredNorm() / (2.0 * eps * eps);
        alpha = std::min(1.0, std::exp(lp_prop - lp + log_q_rev - log_q_fwd));
      }
      if (unif(rng) < alpha) {
        v = prop;
        lp = lp_prop;
        grad = grad_prop;
        ++accepts;
      }
      if (t <= config.burn_in)
        log_eps += std::pow(static_cast<double>(t), -0.6) * (alpha - config.adapt_target);
    }

    res.log_density_trace.push_back(lp);
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) res.draws.push_back(v);
  }
  res.acceptance_rate = static_cast<double>(accepts) / static_cast<double>(config.total_iters);
  res.final_step_size = std::exp(log_eps);
  return res;
}

double exact_gp_lml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const ProductKernel& kern, double sigma2) {
  require(sigma2 > 0.0, "exact_gp_lml: noise variance must be positive");
  Eigen::MatrixXd k = gram(kern, x, x);
  k.diagonal().array() += sigma2;
  const auto llt = detail::factor_spd(k, "exact_gp_lml");
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (detail::log_det_from_llt(llt) + quad +
                 static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));
}

Eigen::VectorXd exact_gp_predict_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const ProductKernel& kern, double sigma2,
                                      const Eigen::MatrixXd& xstar) {
  Eigen::MatrixXd k = gram(kern, x, x);
  k.diagonal().array() += sigma2;
  const auto llt = detail::factor_spd(k, "exact_gp_predict");
  return gram(kern, xstar, x) * llt.solve(y);
}

InitHypers init_hypers(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  require(n >= 2, "init_hypers: need at least two points");
  require(y.size() == n, "init_hypers: target length mismatch");

  std::mt19937_64 rng(seed);
  const Eigen::Index n_used = std::min<Eigen::Index>(n, 1000);
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  Eigen::MatrixXd xs(n_used, x.cols());
  Eigen::VectorXd ys(n_used);
  for (Eigen::Index i = 0; i < n_used; ++i) {
    xs.row(i) = x.row(idx[static_cast<size_t>(i)]);
    ys[i] = y[idx[static_cast<size_t>(i)]];
  }

  const double y_var = (ys.array() - ys.mean()).square().mean();
  const double noise_floor = 1e-8 * y_var + 1e-12;
  const Eigen::VectorXd ls0 = median_lengthscales(xs, rng);
  const double gamma0 = std::max(y_var, 1e-8);
  const double sigma2_0 = std::max(0.1 * y_var, noise_floor);

  const Eigen::Index d = x.cols();
  const auto objective = [&](const Eigen::VectorXd& q) -> double {
    if (q.lpNorm<Eigen::Infinity>() > kLogParamBound)
      return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd ls = q.head(d).array().exp().matrix();
    const double gamma = std::exp(q[d]);
    const double sigma2 = std::exp(q[d + 1]);
    try {
      return -exact_gp_lml(xs, ys, make_se_ard(ls, gamma), sigma2);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const std::invalid_argument&) {  // exp underflow of a log parameter
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd q0(d + 2);
  q0 << ls0.array().log().matrix(), std::log(gamma0), std::log(sigma2_0);

  std::normal_distribution<double> jitter(0.0, 0.5);
  BfgsOptions opts;
  opts.max_iters = 80;
  bool any_finite = false;
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_q = q0;
  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd q = q0;
    if (s > 0)
      for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += jitter(rng);
    const BfgsResult r = bfgs_minimize(objective, q, opts);
    if (std::isfinite(r.f)) {
      any_finite = true;
      if (r.f < best_f) {
        best_f = r.f;
        best_q = r.x;
      }
    }
  }

  InitHypers out;
  out.n_used = static_cast<int>(n_used);
  if (!any_finite) {
    std::cerr << "warning: init_hypers: likelihood non-finite everywhere, "
                 "falling back to median-distance lengthscales\n";
    out.lengthscales = ls0;
    out.gamma = gamma0;
    out.sigma2 = sigma2_0;
    out.median_fallback = true;
  } else {
    out.lengthscales = best_q.head(d).array().exp().matrix();
    out.gamma = std::exp(best_q[d]);
    out.sigma2 = std::exp(best_q[d + 1]);
  }
  out.sigma2 = std::max(out.sigma2, noise_floor);
  return out;
}

Type2Result optimize_type2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const InitHypers& init, const Type2Config& config) {
  const Eigen::Index d = x.cols();
  const int n = static_cast<int>(x.rows());
  require(config.p >= 1, "optimize_type2: p must be positive");
  require(static_cast<Eigen::Index>(config.mbar.size()) == d, "optimize_type2: mbar length mismatch");
  require(init.lengthscales.size() == d, "optimize_type2: init lengthscale mismatch");

  const GridInducing grid = build_grid(x, config.mbar);
  const Eigen::Index n_ls = config.tie_lengthscales ? 1 : d;

  const auto unpack = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd ls(d);
    if (config.tie_lengthscales)
      ls.setConstant(std::exp(q[0]));
    else
      ls = q.head(d).array().exp().matrix();
    return std::make_tuple(ls, std::exp(q[n_ls]), std::exp(q[n_ls + 1]));
  };

  // Each evaluation rebuilds the per-dimension eigendecompositions and the
  // basis, then scores the unit-weight model.
  const auto objective = [&](const Eigen::VectorXd& q) -> double {
    if (q.lpNorm<Eigen::Infinity>() > kLogParamBound)
      return std::numeric_limits<double>::infinity();
    const auto [ls, gamma, sigma2] = unpack(q);
    try {
      const ProductKernel kern = make_se_ard(ls, gamma);
      const KronEig eig = decompose(grid, kern);
      const GriefBasis basis = build_phi(x, grid, kern, eig, config.p);
      const SuffStats stats = precompute(basis.phi, y);
      ModelState state;
      state.w = Eigen::VectorXd::Ones(config.p);
      state.sigma2 = sigma2;
      return -lml(stats, state, n);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const std::invalid_argument&) {  // exp underflow of a log parameter
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd q0(n_ls + 2);
  if (config.tie_lengthscales)
    q0[0] = std::log(init.lengthscales.mean());
  else
    q0.head(d) = init.lengthscales.array().log().matrix();
  q0[n_ls] = std::log(init.gamma);
  q0[n_ls + 1] = std::log(init.sigma2);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> jitter(0.0, 0.3);
  BfgsOptions opts;
  opts.max_iters = config.max_iters;

  Type2Result out;
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_q = q0;
  bool any_converged = false;
  for (int s = 0; s < std::max(1, config.restarts); ++s) {
    Eigen::VectorXd q = q0;
    if (s > 0)
      for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += jitter(rng);
    const BfgsResult r = bfgs_minimize(objective, q, opts);
    out.report.iterations += r.iterations;
    any_converged = any_converged || r.converged;
    if (r.iterations >= opts.max_iters && !r.converged) out.report.budget_exhausted = true;
    for (double fv : r.f_trace) {
      const double cand = -fv;
      const double prev = out.report.lml_trace.empty()
                              ? -std::numeric_limits<double>::infinity()
                              : out.report.lml_trace.back();
      out.report.lml_trace.push_back(std::max(prev, cand));  // best-so-far
    }
    if (std::isfinite(r.f) && r.f < best_f) {
      best_f = r.f;
      best_q = r.x;
    }
  }
  out.report.converged = any_converged;

  const auto [ls, gamma, sigma2] = unpack(best_q);
  out.lengthscales = ls;
  out.gamma = gamma;
  out.sigma2 = sigma2;
  out.lml = -best_f;
  return out;
}

SampleSet mala_sample(const SuffStats& stats, int n, const Prior& w_prior,
                      const Prior& sigma2_prior, const ChainConfig& config, std::uint64_t seed) {
  const int p = stats.p();
  const WeightPosterior target(stats, n, w_prior, sigma2_prior);

  Eigen::VectorXd v0(p + 1);
  v0.head(p).setConstant(std::log(w_prior.mode));  // chain starts at the prior mode
  v0[p] = std::log(sigma2_prior.mode);

  const MalaRunResult run = mala_run(target, v0, config, seed);

  SampleSet out;
  out.acceptance_rate = run.acceptance_rate;
  out.log_posterior_trace = run.log_density_trace;
  out.w_draws.reserve(run.draws.size());
  out.sigma2_draws.reserve(run.draws.size());
  for (const auto& v : run.draws) {
    out.w_draws.push_back(v.head(p).array().exp().matrix());
    out.sigma2_draws.push_back(std::exp(v[p]));
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_type1(const GriefBasis& basis,
                                                          const SuffStats& stats,
                                                          const SampleSet& samples,
                                                          const Eigen::VectorXd& y,
                                                          const Eigen::MatrixXd& xstar,
                                                          const Transform* transform) {
  require(samples.size() > 0, "predict_type1: empty sample set");
  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(xstar.rows());
  Eigen::VectorXd second_acc = Eigen::VectorXd::Zero(xstar.rows());
  for (int k = 0; k < samples.size(); ++k) {
    ModelState state;
    state.w = samples.w_draws[static_cast<size_t>(k)];
    state.sigma2 = samples.sigma2_draws[static_cast<size_t>(k)];
    const auto [mean, var] = predict(basis, stats, state, y, xstar, transform);
    mean_acc += mean;
    second_acc += var + mean.cwiseProduct(mean);
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  mean_acc *= inv;
  second_acc *= inv;
  return {mean_acc, second_acc - mean_acc.cwiseProduct(mean_acc)};
}

}  // namespace grief
