#include <gtest/gtest.h>

#include <random>

#include "raco/special.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace raco;
using raco::testing::rel_err;
using raco::testing::table1;

namespace {

double cpu_cost(double gamma, double eta, double F) {
  const double LK = 3e8;  // L K, any positive value
  return LK * eta * F * F + gamma * LK / F;
}

} // namespace

TEST(CpuSpeed, ClosedFormAgainstGolden) {
  EXPECT_DOUBLE_EQ(cpu_speed(1.0, 1e-28, 6e8), 6e8);
  EXPECT_NEAR(cpu_speed(1.0, 1e-28, 1e10), 1.71e9, 0.01e9);
  EXPECT_NEAR(cpu_speed(0.01, 1e-28, 6e8), 3.684e8, 0.001e8);
  EXPECT_EQ(cpu_speed(0.0, 1e-28, 6e8), std::numeric_limits<double>::min());
  const ProblemInstance in = table1(0.01);
  EXPECT_DOUBLE_EQ(af_cpu_speed(in), 2e8);
  EXPECT_NEAR(df_cpu_speed(in), 3.684e8, 0.001e8);

  for (double gamma : {1e-4, 1e-3, 0.01, 0.1, 1.0}) {
    const double ref = oracle::golden([&](double F) { return cpu_cost(gamma, 1e-28, F); }, 1.0, 1e10);
    EXPECT_LT(rel_err(cpu_speed(gamma, 1e-28, 1e10), ref), 1e-6) << gamma;
  }
}

TEST(Hop, MinimiserAgainstScan) {
  std::mt19937_64 g(1);
  for (int k = 0; k < 20; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, std::pow(10.0, -2.0 + k % 3));
    const std::pair<HopProblem, double> hops[] = {{df_uplink_problem(in), in.P_A_max},
                                                  {df_downlink_problem(in), in.P_R_max}};
    for (const auto& [h, p_max] : hops) {
      const double lo = h.u_at_power(p_max);
      const double u = solve_hop(h, p_max);
      const double ref = oracle::scan_min([&](double v) { return h.value(v); }, lo, 1e4 * lo);
      EXPECT_LE(h.value(u), h.value(ref) * (1 + 1e-9));
      EXPECT_GE(u, lo * (1 - 1e-12));
    }
  }
}

TEST(Hop, DerivativeMatchesFiniteDifference) {
  const ProblemInstance in = table1(0.1);
  const HopProblem h = df_uplink_problem(in);
  for (double u : {1e-9, 3e-9, 1e-8, 1e-7, 1e-6}) {
    const double d = 1e-6 * u;
    EXPECT_NEAR(h.derivative(u), (h.value(u + d) - h.value(u - d)) / (2 * d), 1e-5 * std::abs(h.derivative(u)) + 1e-12);
  }
}

TEST(Df, ObjectiveMatchesDirectFormula) {
  const ProblemInstance in = table1(0.1);
  const SpecialResult r = solve_df(in);
  EXPECT_EQ(r.x.alpha, 1.0);
  EXPECT_EQ(r.x.nu, 1.0);
  const double r1 = in.W * std::log2(1 + r.x.p2a * in.hA2_sq / in.sig_R2_sq);
  const double r2 = in.W * std::log2(1 + r.x.p2r * in.hB2_sq / in.sig_B2_sq);
  const double t = in.L / r1 + in.Kr * in.L / r.x.fr + in.rho * in.L / r2;
  const double e = r.x.p2a * in.L / r1 + r.x.p2r * in.rho * in.L / r2 + in.L * in.Kr * in.eta_r * r.x.fr * r.x.fr;
  EXPECT_LT(rel_err(r.objective, e + in.gamma * t), 1e-12);
  EXPECT_LT(rel_err(r.u, 1.0 / r1), 1e-9);
}

TEST(Af, ObjectiveMatchesDirectFormula) {
  const ProblemInstance in = table1(0.1);
  const SpecialResult r = solve_af(in);
  EXPECT_EQ(r.x.alpha, 0.0);
  EXPECT_EQ(r.x.nu, 0.0);
  const double snr = r.x.p1a * r.x.p1r * in.hA1_sq * in.hB1_sq / (r.x.p1r * in.hB1_sq * in.sig_R1_sq + in.sig_B1_sq);
  const double ra = 0.5 * in.W * std::log2(1 + snr);
  const double ta = in.rho * in.L / ra;
  const double e = (r.x.p1a + r.x.p1r * r.x.p1a * in.hA1_sq + r.x.p1r * in.sig_R1_sq) * ta +
                   in.L * in.Kl * in.eta_l * r.x.fl * r.x.fl;
  EXPECT_LT(rel_err(r.objective, e + in.gamma * (ta + in.Kl * in.L / r.x.fl)), 1e-12);
  EXPECT_TRUE(feasible_p1(in, r.x, 1e-9).feasible);
}

TEST(Af, GridOracle) {
  std::mt19937_64 g(2);
  for (int k = 0; k < 5; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.01 * std::pow(10.0, k % 3));
    const SpecialResult r = solve_af(in);
    DecisionVector x = r.x;
    double best = kInf;
    for (int i = 1; i <= 200; ++i)
      for (int j = 1; j <= 200; ++j) {
        x.p1a = in.P_A_max * i / 200.0;
        x.p1r = in.P_R_max * j / 200.0;
        if (!feasible_p1(in, x, 0.0).feasible) continue;
        best = std::min(best, objective_p1(in, x));
      }
    EXPECT_LE(r.objective, best * 1.005);
  }
}

TEST(SpecialCases, MatchPinnedIbcd) {
  std::mt19937_64 g(3);
  for (double gamma : {0.01, 0.1, 1.0}) {
    for (int k = 0; k < 4; ++k) {
      const ProblemInstance in = raco::testing::random_instance(g, gamma);
      IbcdConfig df;
      df.fixed_alpha = 1.0;
      df.fixed_nu = 1.0;
      EXPECT_LT(rel_err(solve_df(in).objective, run_ibcd(in, df).objective), 0.01);
      IbcdConfig af;
      af.fixed_alpha = 0.0;
      af.fixed_nu = 0.0;
      EXPECT_LT(rel_err(solve_af(in).objective, run_ibcd(in, af).objective), 0.01);
    }
  }
}

TEST(SpecialCases, SolverResultConversion) {
  const SolverResult r = to_solver_result(solve_df(table1()));
  EXPECT_EQ(r.solver, "DF");
  EXPECT_EQ(r.termination, "closed-form");
  EXPECT_EQ(r.objective_trace.size(), 1u);
}
