#include "grief/optim.hpp"

#include <cmath>
#include <limits>

namespace grief {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = guarded(f, xp);
    xp[i] = x[i] - h;
    const double fm = guarded(f, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

BfgsResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, const BfgsOptions& opts) {
  const Eigen::Index k = x0.size();
  BfgsResult res;
  res.x = x0;
  res.f = guarded(f, x0);
  if (!std::isfinite(res.f)) return res;  // caller decides what to do with a bad start

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd g = fd_gradient(f, res.x, opts.fd_step);

  for (int it = 1; it <= opts.max_iters; ++it) {
    if (!g.array().isFinite().all()) break;
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd dir = -(h_inv * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // reset a corrupted curvature estimate
      h_inv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }

    double step = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_steps; ++ls) {
      x_new = res.x + step * dir;
      f_new = guarded(f, x_new);
      if (f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd g_new = fd_gradient(f, x_new, opts.fd_step);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const Eigen::VectorXd hy = h_inv * yv;
      const double yhy = yv.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    const double improvement = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    res.iterations = it;
    res.f_trace.push_back(res.f);
    if (s.norm() < 1e-12 * (1.0 + res.x.norm()) ||
        improvement <= 1e-12 * (1.0 + std::abs(f_new))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace grief
