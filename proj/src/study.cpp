#include "grief/study.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "grief/grief_basis.hpp"
#include "grief/preconditioner.hpp"

namespace grief {

namespace {

Eigen::MatrixXd sample_uniform_cube(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  const double half_width = std::sqrt(3.0);  // unit-variance uniform
  std::uniform_real_distribution<double> unif(-half_width, half_width);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = unif(rng);
  return x;
}

// Subset Nystrom reconstruction K_.S pinv(K_SS) K_S. restricted to `pts`.
Eigen::MatrixXd subset_nystrom(const ProductKernel& kern, const Eigen::MatrixXd& pts,
                               const Eigen::MatrixXd& inducing) {
  const Eigen::MatrixXd kps = gram(kern, pts, inducing);
  const Eigen::MatrixXd kss = gram(kern, inducing, inducing);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kss);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = 1e-10 * lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] > cutoff) inv[i] = 1.0 / lam[i];
  const Eigen::MatrixXd proj = kps * eig.eigenvectors();
  return proj * inv.asDiagonal() * proj.transpose();
}

// Optimal rank-p Frobenius error of a symmetric PSD matrix, from its
// eigenvalues (already computed, ascending).
double truncation_error(const Eigen::VectorXd& lam_ascending, int p, double denom) {
  const Eigen::Index m = lam_ascending.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + p < m; ++i) s += lam_ascending[i] * lam_ascending[i];
  return std::sqrt(s) / denom;
}

}  // namespace

std::vector<ReconstructRow> reconstruct_study(const ReconstructConfig& config) {
  std::mt19937_64 rng(config.seed);
  const int n_train = config.n_total / 2;
  const Eigen::MatrixXd pts = sample_uniform_cube(config.n_total, config.d, rng);
  const Eigen::MatrixXd x_train = pts.topRows(n_train);

  const double ls = config.lengthscale > 0.0 ? config.lengthscale
                                             : std::sqrt(static_cast<double>(config.d));
  const ProductKernel kern = make_se_ard(Eigen::VectorXd::Constant(config.d, ls), config.gamma);

  const Eigen::MatrixXd k_train = gram(kern, x_train, x_train);
  const Eigen::MatrixXd k_joint = gram(kern, pts, pts);
  const double train_norm = k_train.norm();
  const double joint_norm = k_joint.norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_train(k_train);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_joint(k_joint);

  const GridInducing grid = build_grid(x_train, std::vector<int>(static_cast<size_t>(config.d), config.mbar));
  const KronEig grid_eig = decompose(grid, kern);

  std::vector<ReconstructRow> rows;
  rows.reserve(config.p_sweep.size());
  for (int p : config.p_sweep) {
    ReconstructRow row;
    row.p = p;

    const GriefBasis basis = build_phi(x_train, grid, kern, grid_eig, p);
    const Eigen::MatrixXd phi_joint = phi_at(basis, pts);
    row.grief_train = (basis.phi * basis.phi.transpose() - k_train).norm() / train_norm;
    row.grief_joint = (phi_joint * phi_joint.transpose() - k_joint).norm() / joint_norm;

    double acc_train = 0.0, acc_joint = 0.0;
    for (int s = 0; s < config.nystrom_seeds; ++s) {
      std::mt19937_64 seed_rng(config.seed + 1000 + static_cast<std::uint64_t>(s));
      // Nested uniform subsets: a fresh permutation per seed, with extra
      // resampled indices when p exceeds the training count.
      std::vector<int> perm(static_cast<size_t>(n_train));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), seed_rng);
      std::vector<int> chosen;
      chosen.reserve(static_cast<size_t>(p));
      for (int i = 0; i < p; ++i) {
        if (i < n_train)
          chosen.push_back(perm[static_cast<size_t>(i)]);
        else
          chosen.push_back(std::uniform_int_distribution<int>(0, n_train - 1)(seed_rng));
      }
      Eigen::MatrixXd inducing(p, config.d);
      for (int i = 0; i < p; ++i) inducing.row(i) = x_train.row(chosen[static_cast<size_t>(i)]);
      acc_train += (subset_nystrom(kern, x_train, inducing) - k_train).norm() / train_norm;
      acc_joint += (subset_nystrom(kern, pts, inducing) - k_joint).norm() / joint_norm;
    }
    row.nystrom_train = acc_train / config.nystrom_seeds;
    row.nystrom_joint = acc_joint / config.nystrom_seeds;

    row.eig_train = truncation_error(eig_train.eigenvalues(), p, train_norm);
    row.eig_joint = truncation_error(eig_joint.eigenvalues(), p, joint_norm);
    rows.push_back(row);
  }
  return rows;
}

std::vector<PrecondRun> precondition_study(const PrecondConfig& config) {
  const double ls = config.lengthscale > 0.0 ? config.lengthscale
                                             : std::sqrt(static_cast<double>(config.d));
  const ProductKernel kern = make_se_ard(Eigen::VectorXd::Constant(config.d, ls), config.gamma);

  std::vector<PrecondRun> runs;
  runs.reserve(static_cast<size_t>(config.seeds));
  for (int s = 0; s < config.seeds; ++s) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd x = sample_uniform_cube(config.n, config.d, rng);
    const Eigen::MatrixXd k = gram(kern, x, x);
    std::normal_distribution<double> normal;
    Eigen::VectorXd b(config.n);
    for (int i = 0; i < config.n; ++i) b[i] = normal(rng);

    const auto k_apply = [&k](const Eigen::VectorXd& v) -> Eigen::VectorXd { return k * v; };

    const GridInducing grid =
        build_grid(x, std::vector<int>(static_cast<size_t>(config.d), config.mbar));
    const KronEig eig = decompose(grid, kern);
    const GriefBasis basis = build_phi(x, grid, kern, eig, config.p);
    const WoodburyApplier precond(basis.phi, Eigen::VectorXd::Ones(config.p), config.sigma2);

    PrecondRun run;
    run.seed = seed;
    const PcgResult plain = pcg_solve(k_apply, config.sigma2, nullptr, b, config.tol, config.max_iters);
    const PcgResult pc = pcg_solve(k_apply, config.sigma2, &precond, b, config.tol, config.max_iters);
    run.plain_iters = plain.iterations;
    run.precond_iters = pc.iterations;
    run.plain_converged = plain.converged;
    run.precond_converged = pc.converged;
    run.plain_residuals = plain.rel_residuals;
    run.precond_residuals = pc.rel_residuals;
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace grief
