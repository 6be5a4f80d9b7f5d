#ifndef RACO_IBCD_HPP
#define RACO_IBCD_HPP

// Inexact block coordinate descent on the smoothed objective
//   f_beta(x) = E_sys(x) + gamma * (1/beta) log sum_k exp(beta * path_k(x)),
// cycling through fl, fr, alpha (bisection on the derivative), nu (grid plus
// golden section) and the four powers (one projected-gradient step).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "raco/cccp.hpp"
#include "raco/model.hpp"
#include "raco/scalar_search.hpp"
#include "raco/solver_result.hpp"

namespace raco {

struct IbcdConfig {
  double beta = 10.0;
  double zeta = 0.0;  // absolute stall tolerance on f_beta; 0 means rel_zeta x current f_beta
  double rel_zeta = 1e-6;
  int n_max = 100;
  double armijo_sigma = 1e-4;
  double armijo_ratio = 0.5;
  int armijo_max_halvings = 30;
  double bisect_tol = 1e-12;     // relative bracket width
  double lambda_tol = 1e-13;     // relative bracket width of the dual bisection
  int lambda_max_doublings = 200;
  double eps_interior = 1e-6;
  double pg_step = 1.0;          // largest power move of a full step, in units of P_A_max
  int nu_grid = 64;
  std::optional<double> fixed_alpha;
  std::optional<double> fixed_nu;

  bool operator==(const IbcdConfig&) const = default;
};

struct PowerBlock {
  double p1a = 0.0, p2a = 0.0, p1r = 0.0, p2r = 0.0;
  bool operator==(const PowerBlock&) const = default;
};

inline PowerBlock power_block(const DecisionVector& x) { return {x.p1a, x.p2a, x.p1r, x.p2r}; }

inline DecisionVector with_powers(DecisionVector x, const PowerBlock& y) {
  x.p1a = y.p1a;
  x.p2a = y.p2a;
  x.p1r = y.p1r;
  x.p2r = y.p2r;
  return x;
}

// ---------------------------------------------------------------------------
// Smoothed objective
// ---------------------------------------------------------------------------

/// (1/beta) log sum exp(beta v_k), shifted by the max so it never overflows.
inline double smooth_max(const double* v, int n, double beta) {
  const double m = *std::max_element(v, v + n);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(beta * (v[k] - m));
  return m + std::log(s) / beta;
}

inline double smooth_max(double a, double b, double beta) {
  const double v[2] = {a, b};
  return smooth_max(v, 2, beta);
}

inline double smooth_tsys(const ProblemInstance& in, const RateDelayEnergy& o, double beta) {
  const auto paths = latency_paths(in.relaying);
  const auto pt = path_times(paths, time_vector(o));
  return smooth_max(pt.data(), paths.count, beta);
}

inline double smooth_tsys(const ProblemInstance& in, const DecisionVector& x, double beta) {
  return smooth_tsys(in, evaluate(in, x), beta);
}

inline double f_beta(const ProblemInstance& in, const DecisionVector& x, double beta) {
  const auto o = evaluate(in, x);
  if (in.gamma == 0.0) return o.e_sys();
  return o.e_sys() + in.gamma * smooth_tsys(in, o, beta);
}

inline Gradient8 f_beta_gradient(const ProblemInstance& in, const DecisionVector& x, double beta) {
  const ModelJacobian j = jacobian(in, x);
  Gradient8 g = j.energy;
  if (in.gamma == 0.0) return g;
  const auto paths = latency_paths(in.relaying);
  const auto pt = path_times(paths, time_vector(j.values));
  const double m = *std::max_element(pt.begin(), pt.begin() + paths.count);
  std::array<double, kMaxPaths> w{};
  double total = 0.0;
  for (int k = 0; k < paths.count; ++k) total += (w[k] = std::exp(beta * (pt[k] - m)));
  for (int k = 0; k < paths.count; ++k) {
    const double wk = in.gamma * w[k] / total;
    for (int c = 0; c < kTimeComponents; ++c)
      if (paths.masks[k][c])
        for (int i = 0; i < DecisionVector::kSize; ++i)
          if (j.time[c][i] != 0.0) g[i] += wk * j.time[c][i];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Scalar blocks
// ---------------------------------------------------------------------------

namespace detail {

inline double minimise_coordinate(const ProblemInstance& in, const DecisionVector& x, int index, double lo,
                                  double hi, const IbcdConfig& cfg) {
  auto at = [&](double v) {
    auto a = x.to_array();
    a[index] = v;
    return DecisionVector::from_array(a);
  };
  auto deriv = [&](double v) { return f_beta_gradient(in, at(v), cfg.beta)[index]; };
  return std::clamp(bisect_stationary(deriv, lo, hi, cfg.bisect_tol), lo, hi);
}

} // namespace detail

inline double update_fl(const ProblemInstance& in, const DecisionVector& x, const IbcdConfig& cfg = {}) {
  return detail::minimise_coordinate(in, x, DecisionVector::kFl, cfg.eps_interior * in.F_l_max, in.F_l_max, cfg);
}

inline double update_fr(const ProblemInstance& in, const DecisionVector& x, const IbcdConfig& cfg = {}) {
  return detail::minimise_coordinate(in, x, DecisionVector::kFr, cfg.eps_interior * in.F_r_max, in.F_r_max, cfg);
}

inline double update_alpha(const ProblemInstance& in, const DecisionVector& x, const IbcdConfig& cfg = {}) {
  if (cfg.fixed_alpha) return *cfg.fixed_alpha;
  return detail::minimise_coordinate(in, x, DecisionVector::kAlpha, cfg.eps_interior, 1.0 - cfg.eps_interior, cfg);
}

inline double update_nu(const ProblemInstance& in, const DecisionVector& x, const IbcdConfig& cfg = {}) {
  if (cfg.fixed_nu) return *cfg.fixed_nu;
  if (in.relaying != Relaying::hybrid) return x.nu;
  auto f = [&](double nu) {
    DecisionVector y = x;
    y.nu = nu;
    return f_beta(in, y, cfg.beta);
  };
  return grid_then_golden(f, cfg.eps_interior, 1.0 - cfg.eps_interior, cfg.nu_grid, cfg.bisect_tol).x;
}

// ---------------------------------------------------------------------------
// Power block: projection onto
//   { y >= 0, p1a + p2a <= P_A, p1r <= P_R, U(y; yt) <= 0 }
// where U is the relay budget with the product p1r p1a replaced by its convex
// upper bound at yt:
//   p1r p1a <= 1/2 (p1r + p1a)^2 + 1/2 (p1r~^2 + p1a~^2) - p1r~ p1r - p1a~ p1a.
// For a fixed multiplier lambda of U the Lagrangian separates into p2r and a
// small quadratic in (p1a, p1r, p2a) that is solved by enumerating whether
// p1r sits inside its box or on one of its ends.
// ---------------------------------------------------------------------------

inline double relay_budget_bound(const ProblemInstance& in, const PowerBlock& y, const PowerBlock& yt) {
  const double prod = 0.5 * (y.p1r + y.p1a) * (y.p1r + y.p1a) + 0.5 * (yt.p1r * yt.p1r + yt.p1a * yt.p1a) -
                      yt.p1r * y.p1r - yt.p1a * y.p1a;
  return y.p1r * in.sig_R1_sq + in.hA1_sq * prod + y.p2r - in.P_R_max;
}

struct ProjectionResult {
  PowerBlock y;
  double lambda = 0.0;
  double budget = 0.0;  // U(y; yt), <= 0
};

namespace detail {

// argmin 1/2 wa (a - ca)^2 + 1/2 wb (b - cb)^2 over a, b >= 0, a + b <= P.
inline std::pair<double, double> weighted_triangle(double wa, double ca, double wb, double cb, double P) {
  const double a0 = std::max(ca, 0.0), b0 = std::max(cb, 0.0);
  if (a0 + b0 <= P) return {a0, b0};
  const double a = std::clamp((wa * ca + wb * (P - cb)) / (wa + wb), 0.0, P);
  return {a, P - a};
}

struct ProjectionProblem {
  const ProblemInstance& in;
  PowerBlock yt;
  PowerBlock c;  // unconstrained target
  bool af_only;

  double lagrangian(const PowerBlock& y, double lambda) const {
    const double d1 = y.p1a - c.p1a, d2 = y.p2a - c.p2a, d3 = y.p1r - c.p1r, d4 = y.p2r - c.p2r;
    return 0.5 * (d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4) + lambda * relay_budget_bound(in, y, yt);
  }

  PowerBlock solve(double lambda) const {
    const double h = in.hA1_sq, s2 = in.sig_R1_sq;
    const double lh = lambda * h;
    const double PA = in.P_A_max, PR = in.P_R_max;
    PowerBlock best;
    double best_val = std::numeric_limits<double>::infinity();

    auto consider = [&](double p1a, double p2a, double p1r) {
      PowerBlock y{p1a, p2a, p1r, af_only ? 0.0 : std::clamp(c.p2r - lambda, 0.0, PR)};
      const double v = lagrangian(y, lambda);
      if (v < best_val) {
        best_val = v;
        best = y;
      }
    };
    auto pair = [&](double w1, double centre) {
      if (af_only) return std::pair<double, double>{std::clamp(centre, 0.0, PA), 0.0};
      return weighted_triangle(w1, centre, 1.0, c.p2a, PA);
    };

    // p1r strictly inside its box: p1r = D1 + D2 p1a.
    const double D1 = (c.p1r - lambda * s2 + lh * yt.p1r) / (1.0 + lh);
    const double D2 = -lh / (1.0 + lh);
    const double A1 = 1.0 + D2 * D2 + lh * (1.0 + D2) * (1.0 + D2);
    const double C1 = (c.p1a + D2 * (c.p1r - D1 - lambda * s2) + lh * (D2 * yt.p1r + yt.p1a - (1.0 + D2) * D1)) / A1;
    {
      const auto [a, b] = pair(A1, C1);
      const double r = D1 + D2 * a;
      if (r >= 0.0 && r <= PR) consider(a, b, r);
    }
    // p1r on either end of its box.
    for (double r : {0.0, PR}) {
      const double centre = (c.p1a - lh * r + lh * yt.p1a) / (1.0 + lh);
      const auto [a, b] = pair(1.0 + lh, centre);
      consider(a, b, r);
    }
    return best;
  }
};

} // namespace detail

/// Projection of yt - step_grad onto the convexified power set, by
/// bisection on the multiplier of the relay budget.
inline ProjectionResult project_power_ex(const ProblemInstance& in, const PowerBlock& yt, const PowerBlock& step_grad,
                                         const IbcdConfig& cfg = {}, bool af_only = false) {
  detail::ProjectionProblem prob{in,
                                 yt,
                                 {yt.p1a - step_grad.p1a, yt.p2a - step_grad.p2a, yt.p1r - step_grad.p1r,
                                  yt.p2r - step_grad.p2r},
                                 af_only};
  auto budget = [&](const PowerBlock& y) { return relay_budget_bound(in, y, yt); };

  ProjectionResult r;
  r.y = prob.solve(0.0);
  r.budget = budget(r.y);
  if (r.budget <= 0.0) return r;

  double lo = 0.0, hi = 1.0;
  PowerBlock y_hi = prob.solve(hi);
  int k = 0;
  while (budget(y_hi) > 0.0 && k++ < cfg.lambda_max_doublings) {
    lo = hi;
    hi *= 2.0;
    y_hi = prob.solve(hi);
  }
  if (budget(y_hi) > 0.0) {
    r.y = yt;
    r.lambda = hi;
    r.budget = budget(yt);
    return r;
  }
  for (int it = 0; it < 300 && hi - lo > cfg.lambda_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const PowerBlock y = prob.solve(mid);
    if (budget(y) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      y_hi = y;
    }
  }
  r.y = y_hi;
  r.lambda = hi;
  r.budget = budget(y_hi);
  return r;
}

inline PowerBlock project_power(const ProblemInstance& in, const PowerBlock& yt, const PowerBlock& grad,
                                const IbcdConfig& cfg = {}) {
  return project_power_ex(in, yt, grad, cfg).y;
}

/// Scaled gradient step length so that the largest coordinate move of a
/// full step is pg_step * P_A_max.
inline double power_step_length(const ProblemInstance& in, const PowerBlock& g, const IbcdConfig& cfg) {
  const double gmax = std::max({std::abs(g.p1a), std::abs(g.p2a), std::abs(g.p1r), std::abs(g.p2r)});
  return gmax > 0.0 && std::isfinite(gmax) ? cfg.pg_step * in.P_A_max / gmax : 0.0;
}

/// One projected-gradient step with Armijo backtracking along the segment
/// to the projected point. Never increases f_beta.
inline PowerBlock update_power(const ProblemInstance& in, const DecisionVector& x, const IbcdConfig& cfg = {},
                               bool af_only = false) {
  const PowerBlock yt = power_block(x);
  const Gradient8 g8 = f_beta_gradient(in, x, cfg.beta);
  PowerBlock g{g8[DecisionVector::kP1a], g8[DecisionVector::kP2a], g8[DecisionVector::kP1r],
               g8[DecisionVector::kP2r]};
  if (af_only) g.p2a = g.p2r = 0.0;
  const double s = power_step_length(in, g, cfg);
  if (s == 0.0) return yt;

  const PowerBlock yb = project_power_ex(in, yt, {s * g.p1a, s * g.p2a, s * g.p1r, s * g.p2r}, cfg, af_only).y;
  const PowerBlock d{yb.p1a - yt.p1a, yb.p2a - yt.p2a, yb.p1r - yt.p1r, yb.p2r - yt.p2r};
  const double slope = g.p1a * d.p1a + g.p2a * d.p2a + g.p1r * d.p1r + g.p2r * d.p2r;
  if (!(slope < 0.0)) return yt;

  const double f0 = f_beta(in, x, cfg.beta);
  double mu = 1.0;
  for (int k = 0; k <= cfg.armijo_max_halvings; ++k, mu *= cfg.armijo_ratio) {
    const PowerBlock y{yt.p1a + mu * d.p1a, yt.p2a + mu * d.p2a, yt.p1r + mu * d.p1r, yt.p2r + mu * d.p2r};
    const double f = f_beta(in, with_powers(x, y), cfg.beta);
    if (f <= f0 + cfg.armijo_sigma * mu * slope) return y;
  }
  return yt;
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

inline DecisionVector ibcd_start(const ProblemInstance& in, const IbcdConfig& cfg) {
  DecisionVector x = initial_decision(in);
  x.p1r = std::min(x.p1r, in.P_R_max);
  if (cfg.fixed_alpha) x.alpha = *cfg.fixed_alpha;
  if (cfg.fixed_nu) x.nu = *cfg.fixed_nu;
  return x;
}

inline SolverResult run_ibcd(const ProblemInstance& in, const IbcdConfig& cfg = {}) {
  in.validate();
  if (!(cfg.beta > 0.0) || cfg.n_max < 1 || !(cfg.armijo_ratio > 0.0 && cfg.armijo_ratio < 1.0))
    throw InvalidInstance("invalid IBCD configuration");

  DecisionVector x = ibcd_start(in, cfg);
  SolverResult r;
  r.solver = "HR-IBCD";
  double fb = f_beta(in, x, cfg.beta);
  r.surrogate_trace.push_back(fb);
  r.objective_trace.push_back(objective_p1(in, x));

  // Accept a block update only if it does not increase f_beta.
  auto accept = [&](DecisionVector cand) {
    const double f = f_beta(in, cand, cfg.beta);
    if (f <= fb) {
      x = cand;
      fb = f;
    }
  };

  r.termination = "max-iterations";
  for (int k = 1; k <= cfg.n_max; ++k) {
    const double before = fb;
    DecisionVector c = x;
    c.fl = update_fl(in, x, cfg);
    accept(c);
    c = x;
    c.fr = update_fr(in, x, cfg);
    accept(c);
    c = x;
    c.alpha = update_alpha(in, x, cfg);
    accept(c);
    c = x;
    c.nu = update_nu(in, x, cfg);
    accept(c);
    accept(with_powers(x, update_power(in, x, cfg)));

    r.surrogate_trace.push_back(fb);
    r.objective_trace.push_back(objective_p1(in, x));
    r.iterations = k;
    const double zeta = cfg.zeta > 0.0 ? cfg.zeta : cfg.rel_zeta * std::abs(fb);
    if (std::abs(before - fb) <= zeta) {
      r.termination = "converged";
      break;
    }
  }
  r.x = x;
  fill_outcome(in, r);
  return r;
}

} // namespace raco

#endif // RACO_IBCD_HPP
