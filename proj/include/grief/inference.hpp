#ifndef GRIEF_INFERENCE_HPP
#define GRIEF_INFERENCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "grief/gp_model.hpp"

namespace grief {

// Log-normal prior on a positive scalar, specified by its mode and variance
// in the original (not log) scale. In the log coordinate the density is an
// exact Gaussian N(mu_log, s2_log), Jacobian included.
struct Prior {
  double mode = 1.0;
  double variance = 1.0;
  double mu_log = 0.0;
  double s2_log = 1.0;

  static Prior log_normal(double mode, double variance);

  double log_pdf_log_coord(double v) const;
  double grad_log_coord(double v) const;
};

struct ChainConfig {
  int total_iters = 10000;
  int burn_in = 1000;
  int thin = 50;
  double step_size = 0.1;
  double adapt_target = 0.574;
};

struct SampleSet {
  std::vector<Eigen::VectorXd> w_draws;
  std::vector<double> sigma2_draws;
  double acceptance_rate = 0.0;
  std::vector<double> log_posterior_trace;

  int size() const { return static_cast<int>(sigma2_draws.size()); }
};

// Unnormalized log-density with gradient, e.g. the weight posterior in log
// coordinates; also the seam where tests substitute stub targets.
class MalaTarget {
 public:
  virtual ~MalaTarget() = default;
  virtual double log_density(const Eigen::VectorXd& v, Eigen::VectorXd& grad) const = 0;
};

struct MalaRunResult {
  std::vector<Eigen::VectorXd> draws;  // retained states after burn-in and thinning
  double acceptance_rate = 0.0;
  std::vector<double> log_density_trace;
  double final_step_size = 0.0;
  int gradient_shrink_events = 0;
};

// Metropolis-adjusted Langevin chain with asymmetric-proposal correction.
// The step size adapts during burn-in toward adapt_target and is frozen
// afterwards; a non-finite gradient at the current state rejects the step
// and halves the step size. A chain is strictly sequential with its own RNG
// state; independent chains may run concurrently over shared statistics.
MalaRunResult mala_run(const MalaTarget& target, const Eigen::VectorXd& v0,
                       const ChainConfig& config, std::uint64_t seed);

struct InitHypers {
  Eigen::VectorXd lengthscales;
  double gamma = 1.0;
  double sigma2 = 1.0;
  int n_used = 0;
  bool median_fallback = false;
};

// Dense-GP log marginal likelihood and pointwise posterior mean; also serves
// as the exact baseline in the experiment harnesses.
double exact_gp_lml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const ProductKernel& kern, double sigma2);
Eigen::VectorXd exact_gp_predict_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const ProductKernel& kern, double sigma2,
                                      const Eigen::MatrixXd& xstar);

// Initializes base kernel hyperparameters by maximizing the dense-GP
// likelihood on a random subsample of at most 1000 points, multi-start from
// a median-distance heuristic. Falls back to the heuristic itself if the
// objective is non-finite everywhere.
InitHypers init_hypers(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed);

struct Type2Config {
  std::vector<int> mbar;
  int p = 0;
  bool tie_lengthscales = false;
  int max_iters = 60;
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct Type2Report {
  std::vector<double> lml_trace;  // best-so-far, non-decreasing
  int iterations = 0;
  bool converged = false;
  bool budget_exhausted = false;
};

struct Type2Result {
  Eigen::VectorXd lengthscales;
  double gamma = 1.0;
  double sigma2 = 1.0;
  double lml = 0.0;
  Type2Report report;
};

// Maximizes the basis-kernel likelihood over log hyperparameters with unit
// weights; every objective evaluation rebuilds the eigendecomposition and
// the basis from scratch.
Type2Result optimize_type2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const InitHypers& init, const Type2Config& config);

// Samples {w, sigma2} from the weight posterior in log coordinates, starting
// at the prior mode.
SampleSet mala_sample(const SuffStats& stats, int n, const Prior& w_prior,
                      const Prior& sigma2_prior, const ChainConfig& config, std::uint64_t seed);

// Monte-Carlo mixture of the per-draw posteriors: mean of means, and the
// law-of-total-variance combination for the variance.
std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_type1(const GriefBasis& basis,
                                                          const SuffStats& stats,
                                                          const SampleSet& samples,
                                                          const Eigen::VectorXd& y,
                                                          const Eigen::MatrixXd& xstar,
                                                          const Transform* transform = nullptr);

}  // namespace grief

#endif
