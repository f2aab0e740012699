#ifndef GRIEF_STUDY_HPP
#define GRIEF_STUDY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace grief {

// Covariance reconstruction study: uniformly sampled points split into
// train/test halves, grid-basis reconstruction versus a randomized
// subset-of-training Nystrom baseline (averaged over seeds) and the
// truncated-eigendecomposition optimum, measured in relative Frobenius error
// on the train-train and joint blocks.
struct ReconstructConfig {
  int n_total = 1000;
  int d = 10;
  int mbar = 20;
  std::vector<int> p_sweep = {8, 32, 128, 512};
  int nystrom_seeds = 10;
  double lengthscale = 0.0;  // 0 -> sqrt(d)
  double gamma = 1.0;
  std::uint64_t seed = 0;
};

struct ReconstructRow {
  int p = 0;
  double grief_train = 0.0;
  double grief_joint = 0.0;
  double nystrom_train = 0.0;  // mean over seeds
  double nystrom_joint = 0.0;
  double eig_train = 0.0;  // optimal rank-p error
  double eig_joint = 0.0;
};

std::vector<ReconstructRow> reconstruct_study(const ReconstructConfig& config);

// Paired solves of (K + sigma2 I) x = b with plain CG and with the
// grid-basis preconditioner, repeated over seeds.
struct PrecondConfig {
  int n = 1000;
  int d = 5;
  int p = 200;
  int mbar = 10;
  double tol = 1e-8;
  int max_iters = 5000;
  int seeds = 5;
  double lengthscale = 0.0;  // 0 -> sqrt(d)
  double gamma = 1.0;
  double sigma2 = 1e-2;
  std::uint64_t seed = 0;
};

struct PrecondRun {
  std::uint64_t seed = 0;
  int plain_iters = 0;
  int precond_iters = 0;
  bool plain_converged = false;
  bool precond_converged = false;
  std::vector<double> plain_residuals;
  std::vector<double> precond_residuals;
};

std::vector<PrecondRun> precondition_study(const PrecondConfig& config);

}  // namespace grief

#endif
