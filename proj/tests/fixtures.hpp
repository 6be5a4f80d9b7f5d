#ifndef RACO_TESTS_FIXTURES_HPP
#define RACO_TESTS_FIXTURES_HPP

#include <cmath>
#include <random>

#include "raco/model.hpp"

namespace raco::testing {

inline constexpr double kTableNoise = 5.0356e-13;

inline ProblemInstance table1(double gamma = 0.01, double L = 3e5, double gain = 1e-3) {
  ProblemInstance in;
  in.W = 40e6;
  in.L = L;
  in.Kl = in.Kr = 1e3;
  in.rho = 0.1;
  in.eta_l = in.eta_r = 1e-28;
  in.gamma = gamma;
  in.hA1_sq = in.hB1_sq = in.hA2_sq = in.hB2_sq = gain;
  in.sig_R1_sq = in.sig_B1_sq = in.sig_R2_sq = in.sig_B2_sq = std::pow(10.0, -19.9) * 40e6;
  in.P_A_max = 1.0;
  in.P_R_max = 5.0;
  in.F_l_max = 200e6;
  in.F_r_max = 600e6;
  return in;
}

/// Default caps with gains drawn log-uniformly over two decades.
template <class Gen>
ProblemInstance random_instance(Gen& g, double gamma) {
  std::uniform_real_distribution<double> e(-4.0, -2.0), u(1e5, 5e5);
  ProblemInstance in = table1(gamma, u(g));
  in.hA1_sq = std::pow(10.0, e(g));
  in.hB1_sq = std::pow(10.0, e(g));
  in.hA2_sq = std::pow(10.0, e(g));
  in.hB2_sq = std::pow(10.0, e(g));
  return in;
}

/// Interior point of the original feasible set, relay budget included.
template <class Gen>
DecisionVector random_feasible(const ProblemInstance& in, Gen& g) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  DecisionVector x;
  x.alpha = u(g);
  x.nu = u(g);
  const double share = u(g);
  const double pa = u(g) * in.P_A_max;
  x.p1a = share * pa;
  x.p2a = (1.0 - share) * pa;
  const double budget = u(g) * in.P_R_max;
  const double split = u(g);
  x.p2r = (1.0 - split) * budget;
  x.p1r = split * budget / (in.sig_R1_sq + in.hA1_sq * x.p1a);
  x.fl = u(g) * in.F_l_max;
  x.fr = u(g) * in.F_r_max;
  return x;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace raco::testing

#endif
