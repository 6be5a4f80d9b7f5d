#ifndef RACO_MODEL_HPP
#define RACO_MODEL_HPP

// Rate, delay and energy model of a relay-assisted offloading link in which
// user A computes a (1 - alpha) share locally and forwards the results over an
// amplify-and-forward (AF) band, while the remaining alpha share is sent raw
// over a decode-and-forward (DF) band to the relay server for edge execution.
//
// Everything is SI: Hz, W, J, s, bits. Noise powers are absolute (W), not
// densities.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "raco/errors.hpp"

namespace raco {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log2(1 + x), accurate for tiny x.
inline double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

/// How the AF and DF transmissions share the radio resource.
enum class Relaying {
  hybrid,        ///< AF on (1 - nu) W and DF on nu W, concurrently
  time_division  ///< both use the full band W in consecutive slots
};

struct ProblemInstance {
  double W = 0.0;      // Hz
  double L = 0.0;      // bits
  double Kl = 0.0;     // cycles/bit, user A
  double Kr = 0.0;     // cycles/bit, relay server
  double rho = 0.0;    // result bits per input bit
  double eta_l = 0.0;  // W s^3
  double eta_r = 0.0;  // W s^3
  double gamma = 0.0;  // J/s

  double hA1_sq = 0.0;  // AF hop A -> relay
  double hB1_sq = 0.0;  // AF hop relay -> B
  double hA2_sq = 0.0;  // DF hop A -> relay
  double hB2_sq = 0.0;  // DF hop relay -> B

  double sig_R1_sq = 0.0;  // W
  double sig_B1_sq = 0.0;
  double sig_R2_sq = 0.0;
  double sig_B2_sq = 0.0;

  double P_A_max = 0.0;  // W
  double P_R_max = 0.0;  // W
  double F_l_max = 0.0;  // cycles/s
  double F_r_max = 0.0;  // cycles/s

  Relaying relaying = Relaying::hybrid;

  /// Throws InvalidInstance naming the first offending field.
  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidInstance(std::string("field '") + name + "' must be finite and > 0");
    };
    positive(W, "W");
    positive(L, "L");
    positive(Kl, "Kl");
    positive(Kr, "Kr");
    positive(rho, "rho");
    positive(eta_l, "eta_l");
    positive(eta_r, "eta_r");
    positive(hA1_sq, "hA1_sq");
    positive(hB1_sq, "hB1_sq");
    positive(hA2_sq, "hA2_sq");
    positive(hB2_sq, "hB2_sq");
    positive(sig_R1_sq, "sig_R1_sq");
    positive(sig_B1_sq, "sig_B1_sq");
    positive(sig_R2_sq, "sig_R2_sq");
    positive(sig_B2_sq, "sig_B2_sq");
    positive(P_A_max, "P_A_max");
    positive(P_R_max, "P_R_max");
    positive(F_l_max, "F_l_max");
    positive(F_r_max, "F_r_max");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw InvalidInstance("field 'gamma' must be finite and >= 0");
  }

  bool operator==(const ProblemInstance&) const = default;
};

/// The eight search variables.
struct DecisionVector {
  double alpha = 0.0;  // offloaded fraction of the L input bits
  double nu = 0.0;     // fraction of W given to DF
  double p1a = 0.0;    // user A power on the AF band
  double p2a = 0.0;    // user A power on the DF band
  double p1r = 0.0;    // relay amplification power on the AF band
  double p2r = 0.0;    // relay power on the DF band
  double fl = 0.0;     // user A CPU speed
  double fr = 0.0;     // relay CPU speed

  enum Index { kAlpha, kNu, kP1a, kP2a, kP1r, kP2r, kFl, kFr, kSize };

  std::array<double, kSize> to_array() const {
    return {alpha, nu, p1a, p2a, p1r, p2r, fl, fr};
  }
  static DecisionVector from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }
  bool operator==(const DecisionVector&) const = default;
};

using Gradient8 = std::array<double, DecisionVector::kSize>;

struct RateDelayEnergy {
  double r_af = 0.0, r_df1 = 0.0, r_df2 = 0.0;
  double t_af = 0.0, t_df1 = 0.0, t_df2 = 0.0, t_l = 0.0, t_r = 0.0;
  double e_af = 0.0, e_df = 0.0, e_l = 0.0, e_r = 0.0;

  double e_sys() const { return e_l + e_r + e_af + e_df; }
};

namespace detail {

// Zero load takes zero time, even over a dead link.
inline double load_time(double load, double rate) {
  if (load == 0.0) return 0.0;
  if (rate <= 0.0) return kInf;
  return load / rate;
}

inline double af_bandwidth_share(const ProblemInstance& in, const DecisionVector& x) {
  return in.relaying == Relaying::hybrid ? 1.0 - x.nu : 1.0;
}
inline double df_bandwidth_share(const ProblemInstance& in, const DecisionVector& x) {
  return in.relaying == Relaying::hybrid ? x.nu : 1.0;
}

inline double af_snr(const ProblemInstance& in, const DecisionVector& x) {
  const double den = x.p1r * in.hB1_sq * in.sig_R1_sq + in.sig_B1_sq;
  return x.p1a * x.p1r * in.hA1_sq * in.hB1_sq / den;
}

} // namespace detail

inline double rate_af(const ProblemInstance& in, const DecisionVector& x) {
  const double share = detail::af_bandwidth_share(in, x);
  if (share <= 0.0) return 0.0;
  return 0.5 * share * in.W * log2_1p(detail::af_snr(in, x));
}

inline double rate_df1(const ProblemInstance& in, const DecisionVector& x) {
  const double share = detail::df_bandwidth_share(in, x);
  if (share <= 0.0) return 0.0;
  return share * in.W * log2_1p(x.p2a * in.hA2_sq / in.sig_R2_sq);
}

inline double rate_df2(const ProblemInstance& in, const DecisionVector& x) {
  const double share = detail::df_bandwidth_share(in, x);
  if (share <= 0.0) return 0.0;
  return share * in.W * log2_1p(x.p2r * in.hB2_sq / in.sig_B2_sq);
}

/// All rates, times and energies at x.
inline RateDelayEnergy evaluate(const ProblemInstance& in, const DecisionVector& x) {
  RateDelayEnergy o;
  o.r_af = rate_af(in, x);
  o.r_df1 = rate_df1(in, x);
  o.r_df2 = rate_df2(in, x);

  const double local = (1.0 - x.alpha) * in.L;
  const double offloaded = x.alpha * in.L;
  o.t_af = detail::load_time(in.rho * local, o.r_af);
  o.t_df1 = detail::load_time(offloaded, o.r_df1);
  o.t_df2 = detail::load_time(in.rho * offloaded, o.r_df2);
  o.t_l = detail::load_time(in.Kl * local, x.fl);
  o.t_r = detail::load_time(in.Kr * offloaded, x.fr);

  const double af_power = x.p1a + x.p1r * x.p1a * in.hA1_sq + x.p1r * in.sig_R1_sq;
  o.e_af = o.t_af == 0.0 ? 0.0 : af_power * o.t_af;
  o.e_df = (o.t_df1 == 0.0 ? 0.0 : x.p2a * o.t_df1) + (o.t_df2 == 0.0 ? 0.0 : x.p2r * o.t_df2);
  o.e_l = local * in.Kl * in.eta_l * x.fl * x.fl;
  o.e_r = offloaded * in.Kr * in.eta_r * x.fr * x.fr;
  return o;
}

inline RateDelayEnergy delays(const ProblemInstance& in, const DecisionVector& x) {
  return evaluate(in, x);
}
inline RateDelayEnergy energies(const ProblemInstance& in, const DecisionVector& x) {
  return evaluate(in, x);
}

// ---------------------------------------------------------------------------
// Latency structure.
//
// The end-to-end latency is the longest of a small set of paths, each a sum
// of the five component times. Hybrid relaying has two parallel branches.
// Time division serialises the channel as DF uplink, AF slot, DF downlink:
// the AF slot starts once both the local computation and the DF uplink are
// done, and the DF downlink starts once the edge computation is done and the
// AF slot is free, which gives
//   t_sys = t_df2 + max(t_df1 + t_r, t_l + t_af, t_df1 + t_af).
// ---------------------------------------------------------------------------

enum TimeComponent { kTl, kTaf, kTdf1, kTr, kTdf2, kTimeComponents };

using TimeVector = std::array<double, kTimeComponents>;
using PathMask = std::array<bool, kTimeComponents>;

inline constexpr int kMaxPaths = 3;

struct LatencyPaths {
  std::array<PathMask, kMaxPaths> masks{};
  int count = 0;
};

inline LatencyPaths latency_paths(Relaying relaying) {
  LatencyPaths p;
  if (relaying == Relaying::hybrid) {
    p.masks[0] = {true, true, false, false, false};
    p.masks[1] = {false, false, true, true, true};
    p.count = 2;
  } else {
    p.masks[0] = {false, false, true, true, true};
    p.masks[1] = {true, true, false, false, true};
    p.masks[2] = {false, true, true, false, true};
    p.count = 3;
  }
  return p;
}

inline TimeVector time_vector(const RateDelayEnergy& o) {
  return {o.t_l, o.t_af, o.t_df1, o.t_r, o.t_df2};
}

inline std::array<double, kMaxPaths> path_times(const LatencyPaths& paths, const TimeVector& t) {
  std::array<double, kMaxPaths> out{};
  for (int k = 0; k < paths.count; ++k) {
    double s = 0.0;
    for (int c = 0; c < kTimeComponents; ++c)
      if (paths.masks[k][c]) s += t[c];
    out[k] = s;
  }
  return out;
}

inline double t_sys(const ProblemInstance& in, const RateDelayEnergy& o) {
  const auto paths = latency_paths(in.relaying);
  const auto pt = path_times(paths, time_vector(o));
  return *std::max_element(pt.begin(), pt.begin() + paths.count);
}

inline double t_sys(const ProblemInstance& in, const DecisionVector& x) {
  return t_sys(in, evaluate(in, x));
}

/// E_sys + gamma t_sys. With gamma = 0 the latency is ignored, so an
/// unbounded delay does not turn the energy-only objective into NaN.
inline double weighted_cost(double gamma, double e_sys, double t_sys) {
  return gamma == 0.0 ? e_sys : e_sys + gamma * t_sys;
}

inline double objective_p1(const ProblemInstance& in, const DecisionVector& x) {
  const auto o = evaluate(in, x);
  return weighted_cost(in.gamma, o.e_sys(), t_sys(in, o));
}

// ---------------------------------------------------------------------------
// Feasibility of the original constraint set.
// ---------------------------------------------------------------------------

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violated;
};

/// Relay power drawn by the AF amplification plus the DF retransmission.
inline double relay_power(const ProblemInstance& in, const DecisionVector& x) {
  return x.p1r * in.sig_R1_sq + in.hA1_sq * x.p1r * x.p1a + x.p2r;
}

inline FeasibilityReport feasible_p1(const ProblemInstance& in, const DecisionVector& x,
                                     double tol = 1e-9) {
  FeasibilityReport r;
  auto check = [&](bool ok, const char* name) {
    if (!ok) {
      r.feasible = false;
      r.violated.emplace_back(name);
    }
  };
  check(x.fl > 0.0 && x.fl <= in.F_l_max + tol, "local_speed");
  check(x.fr > 0.0 && x.fr <= in.F_r_max + tol, "edge_speed");
  check(x.alpha >= -tol && x.alpha <= 1.0 + tol, "offload_ratio");
  check(x.nu >= -tol && x.nu <= 1.0 + tol, "bandwidth_split");
  check(x.p1a >= -tol && x.p2a >= -tol, "user_power_sign");
  check(x.p1r >= -tol && x.p2r >= -tol, "relay_power_sign");
  check(x.p1a + x.p2a <= in.P_A_max + tol, "user_power_budget");
  check(relay_power(in, x) <= in.P_R_max + tol, "relay_power_budget");
  return r;
}

// ---------------------------------------------------------------------------
// Analytic first derivatives with respect to the eight search variables.
// ---------------------------------------------------------------------------

struct ModelJacobian {
  RateDelayEnergy values;
  Gradient8 energy{};                                 // d E_sys / dx
  std::array<Gradient8, kTimeComponents> time{};      // d t_c / dx
};

namespace detail {

// d(load / rate): returns {d/dload, d/drate}.
inline std::pair<double, double> load_time_partials(double load, double rate) {
  if (load == 0.0) return {rate > 0.0 ? 1.0 / rate : kInf, 0.0};
  if (rate <= 0.0) return {kInf, -kInf};
  return {1.0 / rate, -load / (rate * rate)};
}

} // namespace detail

inline ModelJacobian jacobian(const ProblemInstance& in, const DecisionVector& x) {
  using I = DecisionVector::Index;
  ModelJacobian j;
  const auto& o = j.values = evaluate(in, x);
  const bool hybrid = in.relaying == Relaying::hybrid;
  const double ln2 = std::numbers::ln2;

  // AF rate.
  const double den = x.p1r * in.hB1_sq * in.sig_R1_sq + in.sig_B1_sq;
  const double snr_af = detail::af_snr(in, x);
  const double share_af = detail::af_bandwidth_share(in, x);
  const double dRaf_dS = share_af * in.W / (2.0 * ln2 * (1.0 + snr_af));
  Gradient8 dRaf{};
  dRaf[I::kNu] = hybrid ? -0.5 * in.W * log2_1p(snr_af) : 0.0;
  dRaf[I::kP1a] = dRaf_dS * x.p1r * in.hA1_sq * in.hB1_sq / den;
  dRaf[I::kP1r] = dRaf_dS * x.p1a * in.hA1_sq * in.hB1_sq * in.sig_B1_sq / (den * den);

  // DF rates.
  const double share_df = detail::df_bandwidth_share(in, x);
  const double snr1 = x.p2a * in.hA2_sq / in.sig_R2_sq;
  const double snr2 = x.p2r * in.hB2_sq / in.sig_B2_sq;
  Gradient8 dRd1{}, dRd2{};
  dRd1[I::kNu] = hybrid ? in.W * log2_1p(snr1) : 0.0;
  dRd1[I::kP2a] = share_df * in.W * in.hA2_sq / (in.sig_R2_sq * ln2 * (1.0 + snr1));
  dRd2[I::kNu] = hybrid ? in.W * log2_1p(snr2) : 0.0;
  dRd2[I::kP2r] = share_df * in.W * in.hB2_sq / (in.sig_B2_sq * ln2 * (1.0 + snr2));

  auto link_time_grad = [](double load, double rate, double dload_dalpha, const Gradient8& drate) {
    const auto [d_load, d_rate] = detail::load_time_partials(load, rate);
    Gradient8 g{};
    for (int k = 0; k < I::kSize; ++k)
      g[k] = drate[k] == 0.0 ? 0.0 : d_rate * drate[k];
    if (dload_dalpha != 0.0) g[I::kAlpha] += d_load * dload_dalpha;
    return g;
  };

  const double local = (1.0 - x.alpha) * in.L;
  const double offloaded = x.alpha * in.L;
  j.time[kTaf] = link_time_grad(in.rho * local, o.r_af, -in.rho * in.L, dRaf);
  j.time[kTdf1] = link_time_grad(offloaded, o.r_df1, in.L, dRd1);
  j.time[kTdf2] = link_time_grad(in.rho * offloaded, o.r_df2, in.rho * in.L, dRd2);

  {
    const auto [d_load, d_speed] = detail::load_time_partials(in.Kl * local, x.fl);
    j.time[kTl][I::kAlpha] = -in.Kl * in.L * d_load;
    j.time[kTl][I::kFl] = d_speed;
  }
  {
    const auto [d_load, d_speed] = detail::load_time_partials(in.Kr * offloaded, x.fr);
    j.time[kTr][I::kAlpha] = in.Kr * in.L * d_load;
    j.time[kTr][I::kFr] = d_speed;
  }

  // Energies.
  auto& e = j.energy;
  const double af_power = x.p1a + x.p1r * x.p1a * in.hA1_sq + x.p1r * in.sig_R1_sq;
  if (o.t_af != 0.0 || local != 0.0) {
    for (int k = 0; k < I::kSize; ++k)
      if (j.time[kTaf][k] != 0.0) e[k] += af_power * j.time[kTaf][k];
    e[I::kP1a] += (1.0 + x.p1r * in.hA1_sq) * o.t_af;
    e[I::kP1r] += (x.p1a * in.hA1_sq + in.sig_R1_sq) * o.t_af;
  }
  for (int k = 0; k < I::kSize; ++k) {
    if (j.time[kTdf1][k] != 0.0) e[k] += x.p2a * j.time[kTdf1][k];
    if (j.time[kTdf2][k] != 0.0) e[k] += x.p2r * j.time[kTdf2][k];
  }
  e[I::kP2a] += o.t_df1;
  e[I::kP2r] += o.t_df2;
  e[I::kAlpha] += -in.L * in.Kl * in.eta_l * x.fl * x.fl + in.L * in.Kr * in.eta_r * x.fr * x.fr;
  e[I::kFl] += 2.0 * local * in.Kl * in.eta_l * x.fl;
  e[I::kFr] += 2.0 * offloaded * in.Kr * in.eta_r * x.fr;
  return j;
}

} // namespace raco

#endif // RACO_MODEL_HPP
