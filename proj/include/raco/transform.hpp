#ifndef RACO_TRANSFORM_HPP
#define RACO_TRANSFORM_HPP

// Lifted formulation. Every time, rate, spectral efficiency and reciprocal
// SNR gets its own variable so the latency max and the rate logs turn into
// product, log and affine inequalities. Points of the lifted problem are
// 25-vectors: the eight decision variables followed by the 17 auxiliaries.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raco/convex_fn.hpp"
#include "raco/errors.hpp"
#include "raco/model.hpp"

namespace raco {

struct AuxVector {
  double t_s = 0.0, t_a = 0.0, t_d1 = 0.0, t_d2 = 0.0, t_l = 0.0, t_r = 0.0;
  double r_a = 0.0, r_d1 = 0.0, r_d2 = 0.0;
  double lam_a = 0.0, lam_d1 = 0.0, lam_d2 = 0.0;
  double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0;
  double s1 = 0.0, s2 = 0.0;

  static constexpr int kSize = 17;

  std::array<double, kSize> to_array() const {
    return {t_s, t_a, t_d1, t_d2, t_l, t_r, r_a, r_d1, r_d2, lam_a, lam_d1, lam_d2, phi1, phi2, phi3, s1, s2};
  }
  static AuxVector from_array(const std::array<double, kSize>& a) {
    AuxVector v;
    v.t_s = a[0], v.t_a = a[1], v.t_d1 = a[2], v.t_d2 = a[3], v.t_l = a[4], v.t_r = a[5];
    v.r_a = a[6], v.r_d1 = a[7], v.r_d2 = a[8];
    v.lam_a = a[9], v.lam_d1 = a[10], v.lam_d2 = a[11];
    v.phi1 = a[12], v.phi2 = a[13], v.phi3 = a[14];
    v.s1 = a[15], v.s2 = a[16];
    return v;
  }
  bool operator==(const AuxVector&) const = default;
};

/// Positions inside the stacked (x, phi) vector.
namespace var {
enum : int {
  alpha, nu, p1a, p2a, p1r, p2r, fl, fr,
  t_s, t_a, t_d1, t_d2, t_l, t_r,
  r_a, r_d1, r_d2,
  lam_a, lam_d1, lam_d2,
  phi1, phi2, phi3,
  s1, s2,
  count
};
} // namespace var

inline constexpr int kLiftedSize = var::count;

inline Eigen::VectorXd stack(const DecisionVector& x, const AuxVector& phi) {
  Eigen::VectorXd z(kLiftedSize);
  const auto a = x.to_array();
  const auto b = phi.to_array();
  for (int i = 0; i < DecisionVector::kSize; ++i) z[i] = a[i];
  for (int i = 0; i < AuxVector::kSize; ++i) z[DecisionVector::kSize + i] = b[i];
  return z;
}

inline std::pair<DecisionVector, AuxVector> unstack(const Eigen::VectorXd& z) {
  std::array<double, DecisionVector::kSize> a{};
  std::array<double, AuxVector::kSize> b{};
  for (int i = 0; i < DecisionVector::kSize; ++i) a[i] = z[i];
  for (int i = 0; i < AuxVector::kSize; ++i) b[i] = z[DecisionVector::kSize + i];
  return {DecisionVector::from_array(a), AuxVector::from_array(b)};
}

// ---------------------------------------------------------------------------
// Lifting
// ---------------------------------------------------------------------------

/// Auxiliaries at their defining values, so every lifted constraint holds
/// and the lifted objective equals the original one.
inline AuxVector lift(const ProblemInstance& in, const DecisionVector& x) {
  const auto o = evaluate(in, x);
  auto need = [](double load, double rate, const char* what) {
    if (load > 0.0 && !(rate > 0.0)) throw DegenerateInput(std::string("zero ") + what + " rate with positive load");
  };
  need((1.0 - x.alpha) * in.L, o.r_af, "AF");
  need(x.alpha * in.L, o.r_df1, "DF uplink");
  need(x.alpha * in.L, o.r_df2, "DF downlink");
  if ((1.0 - x.alpha) > 0.0 && !(x.fl > 0.0)) throw DegenerateInput("zero local CPU speed with positive load");
  if (x.alpha > 0.0 && !(x.fr > 0.0)) throw DegenerateInput("zero edge CPU speed with positive load");

  const double snr_a = detail::af_snr(in, x);
  const double snr_d1 = x.p2a * in.hA2_sq / in.sig_R2_sq;
  const double snr_d2 = x.p2r * in.hB2_sq / in.sig_B2_sq;
  if (!(snr_a > 0.0) || !(snr_d1 > 0.0) || !(snr_d2 > 0.0))
    throw DegenerateInput("lifting needs every link SNR to be positive");

  AuxVector p;
  p.t_a = o.t_af;
  p.t_d1 = o.t_df1;
  p.t_d2 = o.t_df2;
  p.t_l = o.t_l;
  p.t_r = o.t_r;
  p.t_s = t_sys(in, o);
  p.r_a = o.r_af;
  p.r_d1 = o.r_df1;
  p.r_d2 = o.r_df2;
  p.lam_a = log2_1p(snr_a);
  p.lam_d1 = log2_1p(snr_d1);
  p.lam_d2 = log2_1p(snr_d2);
  p.phi1 = 1.0 / snr_a;
  p.phi2 = 1.0 / snr_d1;
  p.phi3 = 1.0 / snr_d2;
  p.s1 = p.s2 = x.p1a * x.p1r;
  return p;
}

/// Energy with the auxiliary times and power product substituted, plus
/// gamma t_s.
inline double objective_p2(const ProblemInstance& in, const DecisionVector& x, const AuxVector& p) {
  const double e = (1.0 - x.alpha) * in.L * in.Kl * in.eta_l * x.fl * x.fl +
                   x.alpha * in.L * in.Kr * in.eta_r * x.fr * x.fr +
                   (x.p1a + x.p1r * in.sig_R1_sq + p.s1 * in.hA1_sq) * p.t_a + x.p2a * p.t_d1 + x.p2r * p.t_d2;
  return e + in.gamma * p.t_s;
}

// ---------------------------------------------------------------------------
// Lifted constraints, g <= 0. The order below is fixed.
// ---------------------------------------------------------------------------

enum P2Row : int {
  kLoadAf,        // (1-a) rho L - t_a r_a
  kRateAf,        // 2 r_a - (1-nu) W lam_a
  kLogAf,         // lam_a - log2(1 + 1/phi1)
  kLoadDf1,       // a L - t_d1 r_d1
  kRateDf1,       // r_d1 - nu W lam_d1
  kLogDf1,        // lam_d1 - log2(1 + 1/phi2)
  kLoadDf2,       // a rho L - t_d2 r_d2
  kRateDf2,       // r_d2 - nu W lam_d2
  kLogDf2,        // lam_d2 - log2(1 + 1/phi3)
  kSnrDf1,        // sig_R2 - phi2 p2a hA2
  kSnrAf,         // hB1 sig_R1 p1r + sig_B1 - hA1 hB1 phi1 s2
  kSnrDf2,        // sig_B2 - phi3 p2r hB2
  kProdLower,     // s2 - p1a p1r
  kProdUpper,     // p1a p1r - s1
  kCyclesLocal,   // Kl (1-a) L - t_l fl
  kCyclesEdge,    // Kr a L - t_r fr
  kBranchLocal,   // t_l + t_a - t_s
  kBranchEdge,    // t_d1 + t_r + t_d2 - t_s
  kRelayBudget,   // p1r sig_R1 + hA1 s1 + p2r - P_R
  kUserBudget,    // p1a + p2a - P_A
  kLocalSpeedCap, // fl - F_l
  kEdgeSpeedCap,  // fr - F_r
  kAlphaLow, kAlphaHigh, kNuLow, kNuHigh,
  kP1aSign, kP2aSign, kP1rSign, kP2rSign,
  kLocalSpeedSign, kEdgeSpeedSign,
  kP2Rows
};

inline const std::array<const char*, kP2Rows>& p2_constraint_names() {
  static const std::array<const char*, kP2Rows> names = {
      "load_af", "rate_af", "log_af", "load_df1", "rate_df1", "log_df1", "load_df2", "rate_df2",
      "log_df2", "snr_df1", "snr_af", "snr_df2", "prod_lower", "prod_upper", "cycles_local",
      "cycles_edge", "branch_local", "branch_edge", "relay_budget", "user_budget", "local_speed_cap",
      "edge_speed_cap", "alpha_low", "alpha_high", "nu_low", "nu_high", "p1a_sign", "p2a_sign",
      "p1r_sign", "p2r_sign", "local_speed_sign", "edge_speed_sign"};
  return names;
}

inline std::vector<double> p2_constraints(const ProblemInstance& in, const DecisionVector& x, const AuxVector& p) {
  std::vector<double> g(kP2Rows);
  const double a = x.alpha;
  g[kLoadAf] = (1.0 - a) * in.rho * in.L - p.t_a * p.r_a;
  g[kRateAf] = 2.0 * p.r_a - (1.0 - x.nu) * in.W * p.lam_a;
  g[kLogAf] = p.lam_a - log2_1p(1.0 / p.phi1);
  g[kLoadDf1] = a * in.L - p.t_d1 * p.r_d1;
  g[kRateDf1] = p.r_d1 - x.nu * in.W * p.lam_d1;
  g[kLogDf1] = p.lam_d1 - log2_1p(1.0 / p.phi2);
  g[kLoadDf2] = a * in.rho * in.L - p.t_d2 * p.r_d2;
  g[kRateDf2] = p.r_d2 - x.nu * in.W * p.lam_d2;
  g[kLogDf2] = p.lam_d2 - log2_1p(1.0 / p.phi3);
  g[kSnrDf1] = in.sig_R2_sq - p.phi2 * x.p2a * in.hA2_sq;
  g[kSnrAf] = in.hB1_sq * in.sig_R1_sq * x.p1r + in.sig_B1_sq - in.hA1_sq * in.hB1_sq * p.phi1 * p.s2;
  g[kSnrDf2] = in.sig_B2_sq - p.phi3 * x.p2r * in.hB2_sq;
  g[kProdLower] = p.s2 - x.p1a * x.p1r;
  g[kProdUpper] = x.p1a * x.p1r - p.s1;
  g[kCyclesLocal] = in.Kl * (1.0 - a) * in.L - p.t_l * x.fl;
  g[kCyclesEdge] = in.Kr * a * in.L - p.t_r * x.fr;
  g[kBranchLocal] = p.t_l + p.t_a - p.t_s;
  g[kBranchEdge] = p.t_d1 + p.t_r + p.t_d2 - p.t_s;
  g[kRelayBudget] = x.p1r * in.sig_R1_sq + in.hA1_sq * p.s1 + x.p2r - in.P_R_max;
  g[kUserBudget] = x.p1a + x.p2a - in.P_A_max;
  g[kLocalSpeedCap] = x.fl - in.F_l_max;
  g[kEdgeSpeedCap] = x.fr - in.F_r_max;
  g[kAlphaLow] = -a;
  g[kAlphaHigh] = a - 1.0;
  g[kNuLow] = -x.nu;
  g[kNuHigh] = x.nu - 1.0;
  g[kP1aSign] = -x.p1a;
  g[kP2aSign] = -x.p2a;
  g[kP1rSign] = -x.p1r;
  g[kP2rSign] = -x.p2r;
  g[kLocalSpeedSign] = -x.fl;
  g[kEdgeSpeedSign] = -x.fr;
  return g;
}

// ---------------------------------------------------------------------------
// Difference-of-convex split of the lifted objective.
//
// Every product term w u v is written in variables relative to the
// expansion point, U = u/u~ and V = v/v~, so that
//   w u v = W U V = 1/2 W (U + V)^2 - 1/2 W (U^2 + V^2),  W = w u~ v~.
// Without the rescaling the two halves are many orders of magnitude larger
// than their difference and the split is useless in double precision. The
// one negative product, -L Kl eta_l alpha fl^2, is split the other way round.
// ---------------------------------------------------------------------------

struct DcSplit {
  ConvexFn f1;
  ConvexFn f2;
};

struct DcParts {
  double f1 = 0.0;
  double f2 = 0.0;
  double f2_hat = 0.0;
  double f3 = 0.0;
  Eigen::VectorXd grad_f2;
};

namespace detail {

struct ProductTerm {
  double coef;
  int u, pu;
  int v, pv;
  bool negative;
};

inline std::vector<ProductTerm> product_terms(const ProblemInstance& in) {
  const double cl = in.L * in.Kl * in.eta_l;
  const double cr = in.L * in.Kr * in.eta_r;
  return {
      {cl, var::alpha, 1, var::fl, 2, true},
      {cr, var::alpha, 1, var::fr, 2, false},
      {1.0, var::p1a, 1, var::t_a, 1, false},
      {in.sig_R1_sq, var::p1r, 1, var::t_a, 1, false},
      {in.hA1_sq, var::s1, 1, var::t_a, 1, false},
      {1.0, var::p2a, 1, var::t_d1, 1, false},
      {1.0, var::p2r, 1, var::t_d2, 1, false},
  };
}

inline double positive_or_one(double v) { return v > 0.0 ? v : 1.0; }

// (z_i / ref)^power as a QuadForm.
inline QuadForm relative_monomial(int i, int power, double ref) {
  QuadForm q;
  if (power == 1)
    q.add_linear(i, 1.0 / ref);
  else
    q.add_square(i, 1.0 / (ref * ref));
  return q;
}

inline QuadForm sum_forms(const QuadForm& a, const QuadForm& b) {
  QuadForm q = a;
  q.constant += b.constant;
  q.linear.insert(q.linear.end(), b.linear.begin(), b.linear.end());
  q.square.insert(q.square.end(), b.square.begin(), b.square.end());
  return q;
}

} // namespace detail

/// Split f1 - f2 of the lifted objective, balanced at the expansion point zt.
inline DcSplit dc_split(const ProblemInstance& in, const Eigen::VectorXd& zt) {
  DcSplit s;
  const double cl = in.L * in.Kl * in.eta_l;
  s.f1.base.add_square(var::fl, cl);
  s.f1.base.add_linear(var::t_s, in.gamma);
  for (const auto& t : detail::product_terms(in)) {
    const double ru = detail::positive_or_one(zt[t.u]);
    const double rv = detail::positive_or_one(zt[t.v]);
    const double w = t.coef * std::pow(ru, t.pu) * std::pow(rv, t.pv);
    const QuadForm U = detail::relative_monomial(t.u, t.pu, ru);
    const QuadForm V = detail::relative_monomial(t.v, t.pv, rv);
    ConvexFn& joint = t.negative ? s.f2 : s.f1;
    ConvexFn& apart = t.negative ? s.f1 : s.f2;
    joint.add_squared(w, detail::sum_forms(U, V));
    apart.add_squared(w, U);
    apart.add_squared(w, V);
  }
  return s;
}

/// First-order expansion of f at zt as a ConvexFn (affine).
inline ConvexFn linearize(const ConvexFn& f, const Eigen::VectorXd& zt) {
  ConvexFn l;
  const Eigen::VectorXd g = f.gradient(zt);
  l.base.constant = f.value(zt) - g.dot(zt);
  for (int i = 0; i < g.size(); ++i) l.base.add_linear(i, g[i]);
  return l;
}

/// f1 - (affine expansion of f2 at zt): a convex majorant of the lifted
/// objective that is tight at zt.
inline ConvexFn upper_bound_fn(const DcSplit& s, const Eigen::VectorXd& zt) {
  ConvexFn f3 = s.f1;
  const ConvexFn l = linearize(s.f2, zt);
  f3.base.constant -= l.base.constant;
  for (const auto& c : l.base.linear) f3.base.add_linear(c.index, -c.value);
  return f3;
}

inline DcParts dc_objective(const ProblemInstance& in, const DecisionVector& x, const AuxVector& phi,
                            const DecisionVector& xt, const AuxVector& phit) {
  const Eigen::VectorXd z = stack(x, phi);
  const Eigen::VectorXd zt = stack(xt, phit);
  const DcSplit s = dc_split(in, zt);
  DcParts d;
  d.f1 = s.f1.value(z);
  d.f2 = s.f2.value(z);
  d.grad_f2 = s.f2.gradient(zt);
  d.f2_hat = s.f2.value(zt) + d.grad_f2.dot(z - zt);
  d.f3 = d.f1 - d.f2_hat;
  return d;
}

// ---------------------------------------------------------------------------
// Convex restrictions of product constraints.
// ---------------------------------------------------------------------------

/// c <= x y rewritten as 2c + x^2 + y^2 - (x + y)^2 <= 0 with the concave
/// part replaced by its tangent at (xt, yt):
///   2c + x^2 + y^2 - (xt+yt)^2 - 2(xt+yt)(x + y - xt - yt) <= 0.
/// Stored as coefficients of c, x^2, y^2, x, y and a constant.
struct BilinearCut {
  double c_coef = 2.0;
  double x_sq = 1.0;
  double y_sq = 1.0;
  double x_lin = 0.0;
  double y_lin = 0.0;
  double constant = 0.0;

  double residual(double c, double x, double y) const {
    return c_coef * c + x_sq * x * x + y_sq * y * y + x_lin * x + y_lin * y + constant;
  }
};

inline BilinearCut linearize_bilinear(double xt, double yt) {
  const double s = xt + yt;
  BilinearCut cut;
  cut.x_lin = cut.y_lin = -2.0 * s;
  cut.constant = s * s;
  return cut;
}

/// x y <= c rewritten as 1/2 (x+y)^2 - 1/2 (x^2 + y^2) - c <= 0 with the
/// concave part replaced by its tangent at (xt, yt):
///   1/2 (x+y)^2 - xt x - yt y + 1/2 (xt^2 + yt^2) - c <= 0.
struct ProductCut {
  double x_lin = 0.0;
  double y_lin = 0.0;
  double constant = 0.0;

  double residual(double c, double x, double y) const {
    return 0.5 * (x + y) * (x + y) + x_lin * x + y_lin * y + constant - c;
  }
};

inline ProductCut linearize_product_upper(double xt, double yt) {
  return {-xt, -yt, 0.5 * (xt * xt + yt * yt)};
}

/// Tangent of the convex map phi -> log2(1 + 1/phi) at phit. It lies below
/// the map, so lam <= intercept + slope * phi implies the log constraint.
struct LogCut {
  double intercept = 0.0;
  double slope = 0.0;
};

inline LogCut linearize_log_capacity(double phit) {
  const double d = std::numbers::ln2 * (phit * phit + phit);
  return {log2_1p(1.0 / phit) + phit / d, -1.0 / d};
}

} // namespace raco

#endif // RACO_TRANSFORM_HPP
