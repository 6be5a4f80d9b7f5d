#ifndef RACO_CHANNEL_HPP
#define RACO_CHANNEL_HPP

// Channel draws and the default scenario.
//
// Random numbers come from std::mt19937_64, whose output sequence is fixed by
// the standard. The uniform and exponential transforms are done here rather
// than with <random> distributions, whose algorithms differ between standard
// libraries, so draws are identical on every platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "raco/errors.hpp"
#include "raco/model.hpp"

namespace raco {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trial i, shared by every solver and sweep point.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t i) { return splitmix64(base + i); }

enum class ChannelMode { iid_rayleigh, pathloss_geometry };

inline std::string to_string(ChannelMode m) {
  return m == ChannelMode::iid_rayleigh ? "iid-rayleigh" : "pathloss-geometry";
}

inline ChannelMode channel_mode_from_string(const std::string& s) {
  if (s == "iid-rayleigh") return ChannelMode::iid_rayleigh;
  if (s == "pathloss-geometry") return ChannelMode::pathloss_geometry;
  throw InvalidInstance("unknown channel mode '" + s + "'");
}

struct ChannelConfig {
  ChannelMode mode = ChannelMode::iid_rayleigh;
  double sigma_h_sq = 1e-3;  // mean of the fading power
  double pl0_db = -60.0;     // path loss at d0
  double d0 = 10.0;          // m
  double chi = 3.0;
  double dAB = 180.0;        // m
  double D = 90.0;           // m, user A to relay

  void validate() const {
    if (!(sigma_h_sq > 0.0)) throw InvalidInstance("sigma_h_sq must be > 0");
    if (mode == ChannelMode::pathloss_geometry) {
      if (!(d0 > 0.0) || !(chi > 0.0)) throw InvalidInstance("d0 and chi must be > 0");
      if (!(D > 0.0 && D < dAB)) throw InvalidInstance("D must lie strictly between 0 and dAB");
    }
  }
  bool operator==(const ChannelConfig&) const = default;
};

struct ChannelGains {
  double hA1_sq = 0.0, hB1_sq = 0.0, hA2_sq = 0.0, hB2_sq = 0.0;
};

/// Large-scale gain PL0 (d/d0)^-chi.
inline double path_gain(const ChannelConfig& c, double d) {
  return std::pow(10.0, c.pl0_db / 10.0) * std::pow(d / c.d0, -c.chi);
}

/// Mean power gain of the hops leaving user A and of the hops into user B.
inline std::pair<double, double> mean_gains(const ChannelConfig& c) {
  if (c.mode == ChannelMode::iid_rayleigh) return {c.sigma_h_sq, c.sigma_h_sq};
  return {c.sigma_h_sq * path_gain(c, c.D), c.sigma_h_sq * path_gain(c, c.dAB - c.D)};
}

/// Four independent Rayleigh power gains (exponential), in the order
/// A->R (AF), R->B (AF), A->R (DF), R->B (DF).
inline ChannelGains draw_channels(const ChannelConfig& c, Rng& rng) {
  const auto [a, b] = mean_gains(c);
  ChannelGains g;
  g.hA1_sq = rng.exponential(a);
  g.hB1_sq = rng.exponential(b);
  g.hA2_sq = rng.exponential(a);
  g.hB2_sq = rng.exponential(b);
  return g;
}

/// Noise power in W of a density given in dBm/Hz over W Hz.
inline double noise_power(double dbm_per_hz, double W) { return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0) * W; }

struct ScenarioDefaults {
  double W = 40e6;
  double K = 1e3;
  double rho = 0.1;
  double eta = 1e-28;
  double P_A_max = 1.0;
  double P_R_max = 5.0;
  double F_l_max = 200e6;
  double F_r_max = 600e6;
  double noise_dbm_hz = -169.0;
  double L_min = 1e5;
  double L_max = 5e5;

  bool operator==(const ScenarioDefaults&) const = default;
};

inline ProblemInstance default_instance(double gamma, double L, const ChannelGains& g,
                                        const ScenarioDefaults& d = {}) {
  ProblemInstance in;
  in.W = d.W;
  in.L = L;
  in.Kl = in.Kr = d.K;
  in.rho = d.rho;
  in.eta_l = in.eta_r = d.eta;
  in.gamma = gamma;
  in.hA1_sq = g.hA1_sq;
  in.hB1_sq = g.hB1_sq;
  in.hA2_sq = g.hA2_sq;
  in.hB2_sq = g.hB2_sq;
  const double n = noise_power(d.noise_dbm_hz, d.W);
  in.sig_R1_sq = in.sig_B1_sq = in.sig_R2_sq = in.sig_B2_sq = n;
  in.P_A_max = d.P_A_max;
  in.P_R_max = d.P_R_max;
  in.F_l_max = d.F_l_max;
  in.F_r_max = d.F_r_max;
  return in;
}

/// Channels and task size of one trial. The fading draws come first, so a
/// trial sees the same small-scale fading at every distance.
struct TrialDraw {
  ChannelGains gains;
  double L = 0.0;
};

inline TrialDraw draw_trial(const ChannelConfig& c, std::uint64_t seed, const ScenarioDefaults& d = {}) {
  Rng rng(seed);
  TrialDraw t;
  t.gains = draw_channels(c, rng);
  t.L = rng.uniform(d.L_min, d.L_max);
  return t;
}

} // namespace raco

#endif // RACO_CHANNEL_HPP
