#ifndef RACO_CCCP_HPP
#define RACO_CCCP_HPP

// Concave-convex procedure on the lifted problem. Each outer iteration
// replaces the concave parts of the objective and of the product and log
// constraints by tangents at the current point and solves the resulting
// convex program with the barrier method. The convex restrictions are inner
// approximations, so every iterate stays feasible for the lifted problem.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <tuple>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raco/barrier.hpp"
#include "raco/convex_fn.hpp"
#include "raco/errors.hpp"
#include "raco/model.hpp"
#include "raco/solver_result.hpp"
#include "raco/transform.hpp"

namespace raco {

struct CccpConfig {
  double delta = 0.0;        // absolute stall tolerance on f3; 0 means rel_delta x current objective
  double rel_delta = 1e-6;
  int n_max = 200;
  double inner_tol = 1e-9;   // barrier gap, relative to the subproblem objective
  double barrier_t0 = 50.0;
  double barrier_mu = 10.0;
  int max_newton = 400;
  double ts_cap_factor = 4.0;  // t_s <= factor * t_s at the expansion point

  bool operator==(const CccpConfig&) const = default;
};

struct ConvexSubproblem {
  ConvexFn objective;                 // in scaled coordinates, normalised
  std::vector<ConvexFn> constraints;  // in scaled coordinates, unit gradient at the expansion point
  std::vector<std::string> names;
  std::vector<double> row_scale;      // scaled row = row_scale * row in the units of the lifted constraint
  Eigen::VectorXd scale;              // lifted = scale .* scaled
  Eigen::VectorXd expansion;          // lifted coordinates
  double objective_scale = 1.0;       // scaled objective = objective_scale * f3

  int variable_count() const { return static_cast<int>(scale.size()); }
  int constraint_count() const { return static_cast<int>(constraints.size()); }

  Eigen::VectorXd to_scaled(const Eigen::VectorXd& z) const { return z.cwiseQuotient(scale); }
  Eigen::VectorXd to_lifted(const Eigen::VectorXd& u) const { return u.cwiseProduct(scale); }

  /// Row i at a lifted point, in the units of the matching lifted constraint.
  double residual(int i, const Eigen::VectorXd& z) const {
    return constraints[i].value(to_scaled(z)) / row_scale[i];
  }
  /// Convex upper bound f3 at a lifted point.
  double f3(const Eigen::VectorXd& z) const { return objective.value(to_scaled(z)) / objective_scale; }
};

// ---------------------------------------------------------------------------
// Starting point
// ---------------------------------------------------------------------------

inline DecisionVector initial_decision(const ProblemInstance& in) {
  DecisionVector x;
  x.alpha = 0.5;
  x.nu = 0.5;
  x.p1a = x.p2a = in.P_A_max / 4.0;
  x.p2r = in.P_R_max / 4.0;
  x.p1r = (in.P_R_max / 4.0) / (in.sig_R1_sq + in.hA1_sq * x.p1a);
  x.fl = in.F_l_max / 2.0;
  x.fr = in.F_r_max / 2.0;
  return x;
}

/// Lifted point around the midpoint decision with every inequality given
/// some slack. Throws InfeasibleInstance when that does not give a strictly
/// feasible point.
inline std::pair<DecisionVector, AuxVector> initial_point(const ProblemInstance& in, double slack = 0.05) {
  in.validate();
  const DecisionVector x = initial_decision(in);
  AuxVector p;
  try {
    p = lift(in, x);
  } catch (const DegenerateInput& e) {
    throw InfeasibleInstance(std::string("no interior starting point: ") + e.what());
  }
  const double up = 1.0 + slack, down = 1.0 - slack;
  p.s1 *= up;
  p.s2 *= down;
  p.phi1 *= up / down;
  p.phi2 *= up;
  p.phi3 *= up;
  p.lam_a = down * log2_1p(1.0 / p.phi1);
  p.lam_d1 = down * log2_1p(1.0 / p.phi2);
  p.lam_d2 = down * log2_1p(1.0 / p.phi3);
  p.r_a = down * 0.5 * (1.0 - x.nu) * in.W * p.lam_a;
  p.r_d1 = down * x.nu * in.W * p.lam_d1;
  p.r_d2 = down * x.nu * in.W * p.lam_d2;
  p.t_a = up * (1.0 - x.alpha) * in.rho * in.L / p.r_a;
  p.t_d1 = up * x.alpha * in.L / p.r_d1;
  p.t_d2 = up * x.alpha * in.rho * in.L / p.r_d2;
  p.t_l = up * in.Kl * (1.0 - x.alpha) * in.L / x.fl;
  p.t_r = up * in.Kr * x.alpha * in.L / x.fr;
  p.t_s = up * std::max(p.t_l + p.t_a, p.t_d1 + p.t_r + p.t_d2);

  for (double g : p2_constraints(in, x, p))
    if (!(g < 0.0)) throw InfeasibleInstance("starting point is not strictly feasible");
  return {x, p};
}

// ---------------------------------------------------------------------------
// Subproblem assembly
// ---------------------------------------------------------------------------

namespace detail {

inline QuadForm affine(double c, std::initializer_list<Coef> terms) {
  QuadForm q;
  q.constant = c;
  for (const auto& t : terms) q.add_linear(t.index, t.value);
  return q;
}

// mult * (c - u v) <= 0 restricted to a convex set at (ut, vt), written in
// U = u/ut, V = v/vt so the coefficients stay O(1).
inline ConvexFn lower_product_row(const QuadForm& c, int u, int v, const Eigen::VectorXd& zt, double mult) {
  const double ut = zt[u], vt = zt[v];
  const double w = mult * ut * vt;
  const BilinearCut cut = linearize_bilinear(1.0, 1.0);
  ConvexFn f;
  f.base = c;
  f.base.scale(mult * cut.c_coef * 0.5);
  f.base.constant += 0.5 * w * cut.constant;
  f.base.add_linear(u, 0.5 * w * cut.x_lin / ut);
  f.base.add_linear(v, 0.5 * w * cut.y_lin / vt);
  f.add_squared(w * cut.x_sq, QuadForm{}.add_linear(u, 1.0 / ut));
  f.add_squared(w * cut.y_sq, QuadForm{}.add_linear(v, 1.0 / vt));
  return f;
}

// mult * (u v - c) <= 0 restricted likewise.
inline ConvexFn upper_product_row(const QuadForm& c, int u, int v, const Eigen::VectorXd& zt, double mult) {
  const double ut = zt[u], vt = zt[v];
  const double w = mult * ut * vt;
  const ProductCut cut = linearize_product_upper(1.0, 1.0);
  ConvexFn f;
  f.base = c;
  f.base.scale(-mult);
  f.base.constant += w * cut.constant;
  f.base.add_linear(u, w * cut.x_lin / ut);
  f.base.add_linear(v, w * cut.y_lin / vt);
  f.add_squared(w, QuadForm{}.add_linear(u, 1.0 / ut).add_linear(v, 1.0 / vt));
  return f;
}

inline ConvexFn log_row(int lam, int phi, const Eigen::VectorXd& zt) {
  const LogCut cut = linearize_log_capacity(zt[phi]);
  ConvexFn f;
  f.base = affine(-cut.intercept, {{lam, 1.0}, {phi, -cut.slope}});
  return f;
}

inline ConvexFn affine_row(double c, std::initializer_list<Coef> terms) {
  ConvexFn f;
  f.base = affine(c, terms);
  return f;
}

} // namespace detail

/// Convex restriction of the lifted problem at (xt, phit).
inline ConvexSubproblem build_subproblem(const ProblemInstance& in, const DecisionVector& xt, const AuxVector& phit,
                                         const CccpConfig& cfg = {}) {
  using detail::affine;
  using detail::affine_row;
  using detail::lower_product_row;
  using detail::upper_product_row;
  const Eigen::VectorXd zt = stack(xt, phit);
  const double L = in.L;

  std::vector<std::pair<std::string, ConvexFn>> rows;
  auto add = [&](const char* name, ConvexFn f) { rows.emplace_back(name, std::move(f)); };

  add("load_af", lower_product_row(affine(in.rho * L, {{var::alpha, -in.rho * L}}), var::t_a, var::r_a, zt, 1.0));
  add("rate_af", upper_product_row(affine(0.0, {{var::lam_a, 1.0}, {var::r_a, -2.0 / in.W}}), var::nu, var::lam_a, zt, in.W));
  add("log_af", detail::log_row(var::lam_a, var::phi1, zt));
  add("load_df1", lower_product_row(affine(0.0, {{var::alpha, L}}), var::t_d1, var::r_d1, zt, 1.0));
  add("rate_df1", lower_product_row(affine(0.0, {{var::r_d1, 1.0 / in.W}}), var::nu, var::lam_d1, zt, in.W));
  add("log_df1", detail::log_row(var::lam_d1, var::phi2, zt));
  add("load_df2", lower_product_row(affine(0.0, {{var::alpha, in.rho * L}}), var::t_d2, var::r_d2, zt, 1.0));
  add("rate_df2", lower_product_row(affine(0.0, {{var::r_d2, 1.0 / in.W}}), var::nu, var::lam_d2, zt, in.W));
  add("log_df2", detail::log_row(var::lam_d2, var::phi3, zt));
  add("snr_df1", lower_product_row(affine(in.sig_R2_sq / in.hA2_sq, {}), var::phi2, var::p2a, zt, in.hA2_sq));
  {
    const double m = in.hA1_sq * in.hB1_sq;
    add("snr_af", lower_product_row(affine(in.sig_B1_sq / m, {{var::p1r, in.hB1_sq * in.sig_R1_sq / m}}), var::phi1,
                                    var::s2, zt, m));
  }
  add("snr_df2", lower_product_row(affine(in.sig_B2_sq / in.hB2_sq, {}), var::phi3, var::p2r, zt, in.hB2_sq));
  add("prod_lower", lower_product_row(affine(0.0, {{var::s2, 1.0}}), var::p1a, var::p1r, zt, 1.0));
  add("prod_upper", upper_product_row(affine(0.0, {{var::s1, 1.0}}), var::p1a, var::p1r, zt, 1.0));
  add("cycles_local", lower_product_row(affine(in.Kl * L, {{var::alpha, -in.Kl * L}}), var::t_l, var::fl, zt, 1.0));
  add("cycles_edge", lower_product_row(affine(0.0, {{var::alpha, in.Kr * L}}), var::t_r, var::fr, zt, 1.0));
  add("branch_local", affine_row(0.0, {{var::t_l, 1.0}, {var::t_a, 1.0}, {var::t_s, -1.0}}));
  add("branch_edge", affine_row(0.0, {{var::t_d1, 1.0}, {var::t_r, 1.0}, {var::t_d2, 1.0}, {var::t_s, -1.0}}));
  add("relay_budget",
      affine_row(-in.P_R_max, {{var::p1r, in.sig_R1_sq}, {var::s1, in.hA1_sq}, {var::p2r, 1.0}}));
  add("user_budget", affine_row(-in.P_A_max, {{var::p1a, 1.0}, {var::p2a, 1.0}}));
  add("local_speed_cap", affine_row(-in.F_l_max, {{var::fl, 1.0}}));
  add("edge_speed_cap", affine_row(-in.F_r_max, {{var::fr, 1.0}}));
  add("alpha_high", affine_row(-1.0, {{var::alpha, 1.0}}));
  add("nu_high", affine_row(-1.0, {{var::nu, 1.0}}));
  add("ts_cap", affine_row(-cfg.ts_cap_factor * zt[var::t_s], {{var::t_s, 1.0}}));
  static const char* sign_names[kLiftedSize] = {
      "alpha_sign", "nu_sign", "p1a_sign", "p2a_sign", "p1r_sign", "p2r_sign", "fl_sign", "fr_sign",
      "t_s_sign", "t_a_sign", "t_d1_sign", "t_d2_sign", "t_l_sign", "t_r_sign", "r_a_sign",
      "r_d1_sign", "r_d2_sign", "lam_a_sign", "lam_d1_sign", "lam_d2_sign", "phi1_sign", "phi2_sign",
      "phi3_sign", "s1_sign", "s2_sign"};
  for (int i = 0; i < kLiftedSize; ++i) add(sign_names[i], affine_row(0.0, {{i, -1.0}}));

  ConvexSubproblem sub;
  sub.expansion = zt;
  sub.scale = zt;
  for (int i = 0; i < kLiftedSize; ++i)
    if (!(std::abs(sub.scale[i]) > 0.0)) sub.scale[i] = 1.0;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(kLiftedSize);

  const DcSplit split = dc_split(in, zt);
  sub.objective = upper_bound_fn(split, zt);
  rescale(sub.objective, sub.scale);
  const double f3t = std::abs(sub.objective.value(ones));
  sub.objective_scale = f3t > 0.0 ? 1.0 / f3t : 1.0;
  sub.objective.scale(sub.objective_scale);

  for (auto& [name, f] : rows) {
    rescale(f, sub.scale);
    const double gn = f.gradient_norm(ones);
    const double s = gn > 0.0 ? 1.0 / gn : 1.0;
    f.scale(s);
    sub.names.push_back(name);
    sub.row_scale.push_back(s);
    sub.constraints.push_back(std::move(f));
  }
  return sub;
}

struct SubproblemSolution {
  Eigen::VectorXd z;  // lifted coordinates
  int newton_steps = 0;
  bool stalled = false;
};

/// Barrier solve from a strictly feasible lifted start. The returned point
/// is never worse than the start in f3.
inline SubproblemSolution solve_subproblem(const ConvexSubproblem& sub, const Eigen::VectorXd& start,
                                           const CccpConfig& cfg = {}) {
  BarrierOptions opt;
  opt.t0 = cfg.barrier_t0;
  opt.mu = cfg.barrier_mu;
  opt.gap_tol = cfg.inner_tol;
  opt.max_newton = cfg.max_newton;
  const Eigen::VectorXd u0 = sub.to_scaled(start);
  const BarrierResult br = barrier_minimize(sub.objective, sub.constraints, u0, opt);
  SubproblemSolution s;
  s.newton_steps = br.newton_steps;
  s.stalled = !br.converged;
  s.z = br.objective <= sub.objective.value(u0) ? sub.to_lifted(br.z) : start;
  return s;
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

inline SolverResult run_cccp(const ProblemInstance& in, const CccpConfig& cfg = {}) {
  in.validate();
  if (in.relaying != Relaying::hybrid) throw InvalidInstance("the lifted problem models hybrid relaying only");
  if (cfg.n_max < 1) throw InvalidInstance("n_max must be >= 1");

  auto [x, p] = initial_point(in);
  Eigen::VectorXd z = stack(x, p);

  SolverResult r;
  r.solver = "HR-CCCP";
  double current = objective_p2(in, x, p);
  r.surrogate_trace.push_back(current);
  r.objective_trace.push_back(objective_p1(in, x));

  int stalls = 0;
  r.termination = "max-iterations";
  for (int k = 1; k <= cfg.n_max; ++k) {
    const ConvexSubproblem sub = build_subproblem(in, x, p, cfg);
    const SubproblemSolution sol = solve_subproblem(sub, z, cfg);
    stalls = sol.stalled ? stalls + 1 : 0;

    const double bound = sub.f3(sol.z);
    z = sol.z;
    std::tie(x, p) = unstack(z);
    const double next = objective_p2(in, x, p);
    r.surrogate_trace.push_back(next);
    r.objective_trace.push_back(objective_p1(in, x));
    r.iterations = k;

    const double decrease = current - bound;
    const double delta = cfg.delta > 0.0 ? cfg.delta : cfg.rel_delta * std::abs(next);
    current = next;
    if (stalls >= 2) {
      r.termination = "inner-stall";
      break;
    }
    if (std::abs(decrease) <= delta) {
      r.termination = "converged";
      break;
    }
  }
  r.x = x;
  r.phi = p;
  fill_outcome(in, r);
  return r;
}

} // namespace raco

#endif // RACO_CCCP_HPP
