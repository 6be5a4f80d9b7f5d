#include <gtest/gtest.h>

#include <random>

#include "raco/ibcd.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace raco;
using raco::testing::rel_err;
using raco::testing::table1;

TEST(SmoothMax, Values) {
  EXPECT_NEAR(smooth_max(1.0, 2.0, 10.0), 2.0 + std::log1p(std::exp(-10.0)) / 10.0, 1e-15);
  EXPECT_NEAR(smooth_max(1.0, 2.0, 10.0), 2.00000454, 1e-8);
  EXPECT_NEAR(smooth_max(3.0, 3.0, 10.0), 3.0 + std::log(2.0) / 10.0, 1e-15);
  EXPECT_NEAR(smooth_max(1e6, -1e6, 10.0), 1e6, 1e-9);  // no overflow
  EXPECT_TRUE(std::isinf(smooth_max(kInf, 1.0, 10.0)));
}

TEST(SmoothMax, Sandwich) {
  std::mt19937_64 g(1);
  for (int k = 0; k < 2000; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, std::pow(10.0, -2.0 + 2.0 * (k % 5) / 4.0));
    const DecisionVector x = raco::testing::random_feasible(in, g);
    const double gap = f_beta(in, x, 10.0) - objective_p1(in, x);
    EXPECT_GE(gap, 0.0);
    EXPECT_LE(gap, in.gamma * std::log(2.0) / 10.0 * (1 + 1e-12));
  }
}

TEST(SmoothMax, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(2);
  for (int k = 0; k < 30; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.5);
    const DecisionVector x = raco::testing::random_feasible(in, g);
    const Gradient8 grad = f_beta_gradient(in, x, 10.0);
    const auto a = x.to_array();
    for (int i = 0; i < DecisionVector::kSize; ++i) {
      const double h = 1e-6 * std::abs(a[i]);
      auto p = a, m = a;
      p[i] += h;
      m[i] -= h;
      const double fd =
          (f_beta(in, DecisionVector::from_array(p), 10.0) - f_beta(in, DecisionVector::from_array(m), 10.0)) /
          (2 * h);
      EXPECT_NEAR(grad[i], fd, 1e-5 * std::abs(fd) + 1e-10 * f_beta(in, x, 10.0) / std::abs(a[i])) << i;
    }
  }
}

TEST(ScalarBlocks, LocalSpeed) {
  DecisionVector x{0.4, 0.5, 0.25, 0.25, 100.0, 1.25, 1e8, 3e8};
  const IbcdConfig cfg;
  ProblemInstance in = table1(0.0);
  EXPECT_DOUBLE_EQ(update_fl(in, x, cfg), cfg.eps_interior * in.F_l_max);
  in.gamma = 1e3;
  EXPECT_DOUBLE_EQ(update_fl(in, x, cfg), in.F_l_max);

  in.gamma = 0.05;
  for (double alpha : {0.1, 0.5, 0.9}) {
    x.alpha = alpha;
    auto f = [&](double fl) {
      DecisionVector y = x;
      y.fl = fl;
      return f_beta(in, y, cfg.beta);
    };
    const double ref = oracle::golden(f, cfg.eps_interior * in.F_l_max, in.F_l_max);
    const double got = update_fl(in, x, cfg);
    EXPECT_LE(f(got), f(ref) * (1 + 1e-12));
    EXPECT_LT(rel_err(got, ref), 1e-5);
  }
}

TEST(ScalarBlocks, EdgeSpeedAndAlpha) {
  std::mt19937_64 g(3);
  const IbcdConfig cfg;
  for (int k = 0; k < 20; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.1);
    const DecisionVector x = raco::testing::random_feasible(in, g);
    auto along = [&](int idx) {
      return [&, idx](double v) {
        auto a = x.to_array();
        a[idx] = v;
        return f_beta(in, DecisionVector::from_array(a), cfg.beta);
      };
    };
    const auto ffr = along(DecisionVector::kFr);
    const double fr = update_fr(in, x, cfg);
    EXPECT_LE(ffr(fr), ffr(oracle::scan_min(ffr, cfg.eps_interior * in.F_r_max, in.F_r_max)) * (1 + 1e-9));
    const auto fa = along(DecisionVector::kAlpha);
    const double a = update_alpha(in, x, cfg);
    EXPECT_LE(fa(a), fa(oracle::scan_min(fa, cfg.eps_interior, 1 - cfg.eps_interior)) * (1 + 1e-9));
  }
}

TEST(ScalarBlocks, BandwidthSplit) {
  const IbcdConfig cfg;
  const ProblemInstance in = table1(0.1);
  DecisionVector x{0.0, 0.5, 0.25, 0.25, 100.0, 1.25, 1e8, 3e8};
  EXPECT_NEAR(update_nu(in, x, cfg), cfg.eps_interior, 1e-9);
  x.alpha = 1.0;
  EXPECT_NEAR(update_nu(in, x, cfg), 1.0 - cfg.eps_interior, 1e-9);

  x.alpha = 0.5;
  auto f = [&](double nu) {
    DecisionVector y = x;
    y.nu = nu;
    return f_beta(in, y, cfg.beta);
  };
  double best = 0.0, bv = kInf;
  for (int i = 0; i <= 10000; ++i) {
    const double nu = cfg.eps_interior + (1 - 2 * cfg.eps_interior) * i / 10000.0;
    if (f(nu) < bv) {
      bv = f(nu);
      best = nu;
    }
  }
  EXPECT_NEAR(update_nu(in, x, cfg), best, 1e-4);

  IbcdConfig pinned;
  pinned.fixed_nu = 0.5;
  EXPECT_EQ(update_nu(in, x, pinned), 0.5);
}

TEST(Projection, InteriorIsIdentity) {
  const ProblemInstance in = table1();
  const PowerBlock yt{0.3, 0.3, 1.0, 1.0};
  const PowerBlock step{0.01, -0.02, 0.03, -0.04};
  const ProjectionResult r = project_power_ex(in, yt, step);
  EXPECT_EQ(r.lambda, 0.0);
  EXPECT_NEAR(r.y.p1a, 0.29, 1e-15);
  EXPECT_NEAR(r.y.p2a, 0.32, 1e-15);
  EXPECT_NEAR(r.y.p1r, 0.97, 1e-15);
  EXPECT_NEAR(r.y.p2r, 1.04, 1e-15);
}

TEST(Projection, UserBudgetFace) {
  const ProblemInstance in = table1();
  const PowerBlock yt{0.5, 0.5, 1.0, 1.0};
  const PowerBlock y = project_power(in, yt, {-0.3, -0.1, 0.0, 0.0});
  // (0.8, 0.6) onto a + b <= 1: shift both by 0.2
  EXPECT_NEAR(y.p1a, 0.6, 1e-12);
  EXPECT_NEAR(y.p2a, 0.4, 1e-12);
  const PowerBlock z = project_power(in, yt, {2.0, 0.0, 3.0, 10.0});
  EXPECT_EQ(z.p1a, 0.0);
  EXPECT_EQ(z.p1r, 0.0);
  EXPECT_EQ(z.p2r, 0.0);
}

TEST(Projection, MatchesGridOracleWithCoupledBudget) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(0.0, 1.0), s(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    ProblemInstance in = table1();
    in.hA1_sq = 0.5 + 4.5 * u(g);
    PowerBlock yt{0.5 * u(g), 0.5 * u(g), 2.0 * u(g), 0.0};
    yt.p2r = std::max(0.0, in.P_R_max - yt.p1r * (in.sig_R1_sq + in.hA1_sq * yt.p1a)) * u(g);
    const PowerBlock step{s(g), s(g), s(g), s(g) - 3.0};
    const PowerBlock c{yt.p1a - step.p1a, yt.p2a - step.p2a, yt.p1r - step.p1r, yt.p2r - step.p2r};
    const ProjectionResult r = project_power_ex(in, yt, step);
    const oracle::GridProjection ref = oracle::grid_project(in, yt, c);
    EXPECT_LE(std::abs(r.y.p1a - ref.y.p1a), 2 * ref.step[0]);
    EXPECT_LE(std::abs(r.y.p2a - ref.y.p2a), 2 * ref.step[1]);
    EXPECT_LE(std::abs(r.y.p1r - ref.y.p1r), 2 * ref.step[2]);
    EXPECT_LE(std::abs(r.y.p2r - ref.y.p2r), 2 * ref.step[3]);
    EXPECT_LE(oracle::dist2(r.y, c), oracle::dist2(ref.y, c) + 1e-12);
    const oracle::Kkt kkt = oracle::kkt(in, yt, c, r.y, r.lambda);
    EXPECT_LE(kkt.stationarity, 1e-6);
    EXPECT_LE(kkt.primal, 1e-6);
    EXPECT_LE(kkt.complementarity, 1e-6);
  }
}

TEST(PowerStep, NeverIncreasesSmoothedObjective) {
  std::mt19937_64 g(5);
  const IbcdConfig cfg;
  for (int k = 0; k < 100; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.1);
    const DecisionVector x = raco::testing::random_feasible(in, g);
    const PowerBlock y = update_power(in, x, cfg);
    const DecisionVector x1 = with_powers(x, y);
    EXPECT_LE(f_beta(in, x1, cfg.beta), f_beta(in, x, cfg.beta));
    EXPECT_TRUE(feasible_p1(in, x1, 1e-9).feasible);
  }
}

TEST(Ibcd, MonotoneAndFeasible) {
  const ProblemInstance in = table1();
  const SolverResult r = run_ibcd(in);
  EXPECT_EQ(r.solver, "HR-IBCD");
  EXPECT_EQ(r.termination, "converged");
  EXPECT_LE(r.iterations, 100);
  for (size_t k = 1; k < r.surrogate_trace.size(); ++k) EXPECT_LE(r.surrogate_trace[k], r.surrogate_trace[k - 1]);
  EXPECT_TRUE(feasible_p1(in, r.x, 1e-9).feasible);
  EXPECT_NEAR(r.objective, objective_p1(in, r.x), 1e-15);
}

TEST(Ibcd, PinnedBlocksStayPinned) {
  IbcdConfig cfg;
  cfg.fixed_alpha = 0.3;
  cfg.fixed_nu = 0.6;
  const SolverResult r = run_ibcd(table1(0.1), cfg);
  EXPECT_EQ(r.x.alpha, 0.3);
  EXPECT_EQ(r.x.nu, 0.6);
}

TEST(Ibcd, RejectsBadConfig) {
  IbcdConfig cfg;
  cfg.beta = 0.0;
  EXPECT_THROW(run_ibcd(table1(), cfg), InvalidInstance);
}
