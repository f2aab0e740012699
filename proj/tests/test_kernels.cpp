#include <doctest.h>

#include <cmath>
#include <random>

#include "grief/kernels.hpp"
#include "test_helpers.hpp"

using namespace grief;
using namespace grief::testing;

TEST_SUITE_BEGIN("kernels");

TEST_CASE("eval_1d closed forms") {
  BaseKernel1D k{KernelFamily::squared_exponential, 1.0, 1.0};
  CHECK(eval_1d(k, 3.0, 3.0) == 1.0);
  CHECK(eval_1d(k, 0.0, std::sqrt(2.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  BaseKernel1D k2{KernelFamily::squared_exponential, 0.5, 2.0};
  CHECK(eval_1d(k2, 0.0, 1.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("cross_cov_1d gram symmetry and elementwise agreement") {
  std::mt19937_64 rng(3);
  BaseKernel1D k{KernelFamily::squared_exponential, 0.7, 1.3};
  const Eigen::VectorXd xs = random_vector(6, rng, -2.0, 2.0);

  SUBCASE("xs == us gives a symmetric gram with amplitude diagonal") {
    const Eigen::MatrixXd g = cross_cov_1d(k, xs, xs);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((g.diagonal().array() - k.amplitude).abs().maxCoeff() <= 1e-15);
  }
  SUBCASE("1x1 case") {
    Eigen::VectorXd a(1), b(1);
    a << 0.3;
    b << -0.9;
    const Eigen::MatrixXd g = cross_cov_1d(k, a, b);
    CHECK(g(0, 0) == eval_1d(k, 0.3, -0.9));
  }
  SUBCASE("entries match eval_1d") {
    const Eigen::VectorXd us = random_vector(4, rng, -2.0, 2.0);
    const Eigen::MatrixXd g = cross_cov_1d(k, xs, us);
    for (Eigen::Index j = 0; j < us.size(); ++j)
      for (Eigen::Index i = 0; i < xs.size(); ++i) CHECK(g(i, j) == eval_1d(k, xs[i], us[j]));
  }
}

TEST_CASE("eval_product closed forms and factor agreement") {
  SUBCASE("zero distance gives the product of amplitudes") {
    ProductKernel k;
    k.dims = {{KernelFamily::squared_exponential, 1.0, 2.0},
              {KernelFamily::squared_exponential, 0.5, 3.0}};
    Eigen::VectorXd x(2);
    x << 0.4, -1.0;
    CHECK(eval_product(k, x, x) == doctest::Approx(6.0).epsilon(1e-14));
  }
  SUBCASE("unit kernels at distance sqrt(2) per coordinate") {
    ProductKernel k;
    k.dims = {{KernelFamily::squared_exponential, 1.0, 1.0},
              {KernelFamily::squared_exponential, 1.0, 1.0}};
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd z = Eigen::VectorXd::Constant(2, std::sqrt(2.0));
    CHECK(eval_product(k, x, z) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  }
  SUBCASE("random point pair equals the product of 1d evaluations") {
    std::mt19937_64 rng(5);
    ProductKernel k;
    for (int i = 0; i < 5; ++i)
      k.dims.push_back({KernelFamily::squared_exponential, 0.3 + 0.2 * i, 0.8 + 0.1 * i});
    const Eigen::VectorXd x = random_vector(5, rng);
    const Eigen::VectorXd z = random_vector(5, rng);
    double expect = 1.0;
    for (int i = 0; i < 5; ++i) expect *= eval_1d(k.dims[static_cast<size_t>(i)], x[i], z[i]);
    CHECK(eval_product(k, x, z) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch throws") {
    ProductKernel k;
    k.dims = {{KernelFamily::squared_exponential, 1.0, 1.0}};
    CHECK_THROWS_AS(eval_product(k, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("product-kernel grams are positive semidefinite") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = std::uniform_int_distribution<int>(5, 50)(rng);
    const int d = std::uniform_int_distribution<int>(1, 3)(rng);
    const Eigen::MatrixXd x = random_matrix(n, d, rng, -3.0, 3.0);
    Eigen::VectorXd ls = random_vector(d, rng, 0.3, 2.0);
    const ProductKernel k = make_se_ard(ls, 1.5);
    const Eigen::MatrixXd g = gram(k, x, x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * g.trace());
  }
}

TEST_CASE("per-dimension amplitudes reproduce the standard ARD form") {
  std::mt19937_64 rng(15);
  const int d = 4;
  const Eigen::VectorXd ls = random_vector(d, rng, 0.4, 2.0);
  const double total = 2.7;
  const ProductKernel k = make_se_ard(ls, total);
  const Eigen::VectorXd x = random_vector(d, rng);
  const Eigen::VectorXd z = random_vector(d, rng);
  const double expect = total * std::exp(-0.5 * ((x - z).array() / ls.array()).square().sum());
  CHECK(eval_product(k, x, z) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_SUITE_END();
