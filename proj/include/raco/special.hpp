#ifndef RACO_SPECIAL_HPP
#define RACO_SPECIAL_HPP

// Pure decode-and-forward (alpha = nu = 1) and pure amplify-and-forward
// (alpha = nu = 0) operation.
//
// With everything offloaded the objective separates into three scalar
// problems: the edge CPU speed, and the two DF powers. Each power problem is
// solved over u = 1/R (seconds per bit), in which it is convex:
//   G u (2^{1/(W u)} - 1) + gamma L' u,   u >= 1/R(P_max).
// With everything local the CPU speed is again closed form and the AF power
// pair is found by projected gradient on the exact objective.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "raco/ibcd.hpp"
#include "raco/model.hpp"
#include "raco/scalar_search.hpp"
#include "raco/solver_result.hpp"

namespace raco {

struct SpecialResult {
  std::string mode;  // "AF" or "DF"
  DecisionVector x;
  double objective = 0.0;
  double e_sys = 0.0;
  double t_sys = 0.0;
  double u = 0.0;  // s/bit on the DF uplink
  double v = 0.0;  // s/bit on the DF downlink
  int iterations = 0;
};

/// Stationary point of L K eta F^2 + gamma K L / F, i.e. (gamma / (2 eta))^(1/3),
/// capped at f_max. gamma = 0 gives the smallest positive double.
inline double cpu_speed(double gamma, double eta, double f_max) {
  if (gamma <= 0.0) return std::numeric_limits<double>::min();
  return std::min(std::cbrt(gamma / (2.0 * eta)), f_max);
}

inline double df_cpu_speed(const ProblemInstance& in) { return cpu_speed(in.gamma, in.eta_r, in.F_r_max); }
inline double af_cpu_speed(const ProblemInstance& in) { return cpu_speed(in.gamma, in.eta_l, in.F_l_max); }

// ---------------------------------------------------------------------------
// Power over one DF hop
// ---------------------------------------------------------------------------

struct HopProblem {
  double W;       // Hz
  double G;       // bits * noise / gain
  double delay;   // gamma * bits
  double noise;   // W
  double gain;

  /// Objective in u.
  double value(double u) const {
    const double x = std::numbers::ln2 / (W * u);
    return G * u * std::expm1(x) + delay * u;
  }

  /// d/du. With x = ln2/(W u) the energy part is -G (x e^x - expm1(x)).
  double derivative(double u) const {
    const double x = std::numbers::ln2 / (W * u);
    double k;
    if (x < 1e-3) {
      k = x * x * (0.5 + x * (1.0 / 3.0 + x * (1.0 / 8.0 + x / 30.0)));
    } else {
      k = x * std::exp(x) - std::expm1(x);
    }
    return delay - G * k;
  }

  double power(double u) const { return noise * std::expm1(std::numbers::ln2 / (W * u)) / gain; }
  double u_at_power(double p) const { return 1.0 / (W * log2_1p(p * gain / noise)); }
};

/// Minimiser in u over [1/R(p_max), inf). Returns u.
inline double solve_hop(const HopProblem& h, double p_max) {
  const double lo = h.u_at_power(p_max);
  double hi = 2.0 * lo;
  for (int k = 0; k < 200 && h.derivative(hi) < 0.0; ++k) hi *= 2.0;
  return bisect_stationary([&](double u) { return h.derivative(u); }, lo, hi, 1e-14);
}

inline HopProblem df_uplink_problem(const ProblemInstance& in) {
  return {in.W, in.L * in.sig_R2_sq / in.hA2_sq, in.gamma * in.L, in.sig_R2_sq, in.hA2_sq};
}

inline HopProblem df_downlink_problem(const ProblemInstance& in) {
  return {in.W, in.rho * in.L * in.sig_B2_sq / in.hB2_sq, in.gamma * in.rho * in.L, in.sig_B2_sq, in.hB2_sq};
}

inline double df_power_a(const ProblemInstance& in) {
  const HopProblem h = df_uplink_problem(in);
  return std::min(h.power(solve_hop(h, in.P_A_max)), in.P_A_max);
}

inline double df_power_r(const ProblemInstance& in) {
  const HopProblem h = df_downlink_problem(in);
  return std::min(h.power(solve_hop(h, in.P_R_max)), in.P_R_max);
}

inline SpecialResult solve_df(const ProblemInstance& in) {
  in.validate();
  SpecialResult r;
  r.mode = "DF";
  const HopProblem up = df_uplink_problem(in), down = df_downlink_problem(in);
  r.u = solve_hop(up, in.P_A_max);
  r.v = solve_hop(down, in.P_R_max);
  r.x.alpha = 1.0;
  r.x.nu = 1.0;
  r.x.p2a = std::min(up.power(r.u), in.P_A_max);
  r.x.p2r = std::min(down.power(r.v), in.P_R_max);
  r.x.fl = in.F_l_max;
  r.x.fr = df_cpu_speed(in);
  const auto o = evaluate(in, r.x);
  r.e_sys = o.e_sys();
  r.t_sys = t_sys(in, o);
  r.objective = weighted_cost(in.gamma, r.e_sys, r.t_sys);
  return r;
}

// ---------------------------------------------------------------------------
// AF only
// ---------------------------------------------------------------------------

/// Exact objective gradient when the local branch is the only one carrying
/// load.
inline Gradient8 af_gradient(const ProblemInstance& in, const DecisionVector& x) {
  const ModelJacobian j = jacobian(in, x);
  Gradient8 g = j.energy;
  for (int i = DecisionVector::kP1a; i <= DecisionVector::kP2r; ++i)
    g[i] += in.gamma * (j.time[kTl][i] + j.time[kTaf][i]);
  return g;
}

struct AfConfig {
  int max_iterations = 2000;
  double rel_tol = 1e-12;
  IbcdConfig step;  // Armijo and projection settings

  bool operator==(const AfConfig&) const = default;
};

inline SpecialResult solve_af(const ProblemInstance& in, const AfConfig& cfg = {}) {
  in.validate();
  SpecialResult r;
  r.mode = "AF";
  DecisionVector x = initial_decision(in);
  x.alpha = 0.0;
  x.nu = 0.0;
  x.p2a = x.p2r = 0.0;
  x.p1r = std::min(x.p1r, in.P_R_max);
  x.fr = in.F_r_max;
  x.fl = af_cpu_speed(in);

  auto f = [&](const DecisionVector& y) { return objective_p1(in, y); };
  double fx = f(x);
  for (int k = 0; k < cfg.max_iterations; ++k) {
    r.iterations = k + 1;
    const Gradient8 g8 = af_gradient(in, x);
    const PowerBlock g{g8[DecisionVector::kP1a], 0.0, g8[DecisionVector::kP1r], 0.0};
    const double s = power_step_length(in, g, cfg.step);
    if (s == 0.0) break;
    const PowerBlock yt = power_block(x);
    const PowerBlock yb = project_power_ex(in, yt, {s * g.p1a, 0.0, s * g.p1r, 0.0}, cfg.step, true).y;
    const double d1 = yb.p1a - yt.p1a, d3 = yb.p1r - yt.p1r;
    const double slope = g.p1a * d1 + g.p1r * d3;
    if (!(slope < 0.0)) break;
    bool moved = false;
    double mu = 1.0;
    for (int h = 0; h <= cfg.step.armijo_max_halvings; ++h, mu *= cfg.step.armijo_ratio) {
      DecisionVector y = x;
      y.p1a = yt.p1a + mu * d1;
      y.p1r = yt.p1r + mu * d3;
      const double fy = f(y);
      if (fy <= fx + cfg.step.armijo_sigma * mu * slope) {
        moved = true;
        const double change = fx - fy;
        x = y;
        fx = fy;
        if (change <= cfg.rel_tol * std::abs(fx)) k = cfg.max_iterations;
        break;
      }
    }
    if (!moved) break;
  }
  r.x = x;
  const auto o = evaluate(in, x);
  r.e_sys = o.e_sys();
  r.t_sys = t_sys(in, o);
  r.objective = weighted_cost(in.gamma, r.e_sys, r.t_sys);
  return r;
}

inline SolverResult to_solver_result(const SpecialResult& s) {
  SolverResult r;
  r.solver = s.mode;
  r.x = s.x;
  r.objective = s.objective;
  r.e_sys = s.e_sys;
  r.t_sys = s.t_sys;
  r.iterations = s.iterations;
  r.termination = s.mode == "DF" ? "closed-form" : "converged";
  r.objective_trace = {s.objective};
  r.surrogate_trace = {s.objective};
  return r;
}

} // namespace raco

#endif // RACO_SPECIAL_HPP
