#ifndef GRIEF_OPTIM_HPP
#define GRIEF_OPTIM_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace grief {

struct BfgsOptions {
  int max_iters = 100;
  double grad_tol = 1e-6;
  double fd_step = 1e-5;  // central-difference step, scaled by 1 + |x_i|
  int max_line_steps = 40;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> f_trace;  // objective after each accepted step
};

// BFGS minimization with central finite-difference gradients and Armijo
// backtracking. Non-finite objective values act as an infinite barrier.
BfgsResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

}  // namespace grief

#endif
