#ifndef RACO_BARRIER_HPP
#define RACO_BARRIER_HPP

// Dense log-barrier interior-point method for
//   minimise f(z)  subject to  g_i(z) < 0
// with f, g_i of ConvexFn shape. Damped Newton on t f - sum log(-g_i),
// backtracking keeps every iterate strictly feasible.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "raco/convex_fn.hpp"

namespace raco {

struct BarrierOptions {
  double t0 = 1.0;
  double mu = 10.0;
  double gap_tol = 1e-9;      // stop once m / t falls below this
  double newton_tol = 1e-10;  // half squared Newton decrement per stage
  int max_newton = 500;
  int max_stage_newton = 80;
};

struct BarrierResult {
  Eigen::VectorXd z;
  double objective = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

namespace detail {

inline bool strictly_feasible(const std::vector<ConvexFn>& g, const Eigen::VectorXd& z) {
  for (const auto& c : g)
    if (!(c.value(z) < 0.0)) return false;
  return true;
}

inline double barrier_value(const ConvexFn& f, const std::vector<ConvexFn>& g, const Eigen::VectorXd& z,
                            double t) {
  double v = t * f.value(z);
  for (const auto& c : g) {
    const double gi = c.value(z);
    if (!(gi < 0.0)) return std::numeric_limits<double>::infinity();
    v -= std::log(-gi);
  }
  return v;
}

} // namespace detail

inline BarrierResult barrier_minimize(const ConvexFn& f, const std::vector<ConvexFn>& g, Eigen::VectorXd z,
                                      const BarrierOptions& opt = {}) {
  if (!detail::strictly_feasible(g, z))
    throw std::invalid_argument("barrier_minimize: start point is not strictly feasible");

  const int n = static_cast<int>(z.size());
  const double m = static_cast<double>(g.size());
  BarrierResult r;
  double t = m > 0 ? opt.t0 : 1.0;

  std::vector<std::vector<int>> support;
  support.reserve(g.size());
  for (const auto& c : g) support.push_back(c.support());

  Eigen::VectorXd grad(n), cg = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd H(n, n);
  bool out_of_steps = false;

  while (true) {
    for (int it = 0; it < opt.max_stage_newton; ++it) {
      if (r.newton_steps >= opt.max_newton) {
        out_of_steps = true;
        break;
      }
      grad.setZero();
      H.setZero();
      f.add_gradient(z, t, grad);
      f.add_hessian(z, t, H);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const auto& c = g[k];
        const auto& idx = support[k];
        const double gi = c.value(z);
        for (int i : idx) cg[i] = 0.0;
        c.add_gradient(z, 1.0, cg);
        const double inv = 1.0 / (gi * gi);
        for (int a : idx) {
          grad[a] -= cg[a] / gi;
          for (int b : idx) H(a, b) += inv * cg[a] * cg[b];
        }
        c.add_hessian(z, -1.0 / gi, H);
      }

      Eigen::VectorXd dz;
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      double jitter = 1e-14 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      while (llt.info() != Eigen::Success) {
        H.diagonal().array() += jitter;
        jitter *= 10.0;
        llt.compute(H);
      }
      dz = -llt.solve(grad);
      const double slope = grad.dot(dz);
      ++r.newton_steps;
      if (-0.5 * slope <= opt.newton_tol) break;

      const double phi0 = detail::barrier_value(f, g, z, t);
      double s = 1.0;
      bool moved = false;
      for (int k = 0; k < 80; ++k, s *= 0.5) {
        const Eigen::VectorXd trial = z + s * dz;
        const double phi = detail::barrier_value(f, g, trial, t);
        if (phi <= phi0 + 0.25 * s * slope) {
          z = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    r.gap = m / t;
    if (m == 0.0 || r.gap <= opt.gap_tol) {
      r.converged = true;
      break;
    }
    if (out_of_steps) break;
    t *= opt.mu;
  }
  r.z = std::move(z);
  r.objective = f.value(r.z);
  return r;
}

} // namespace raco

#endif // RACO_BARRIER_HPP
