#include <gtest/gtest.h>

#include <random>

#include "raco/transform.hpp"
#include "fixtures.hpp"

using namespace raco;
using raco::testing::rel_err;

namespace {

// Lifted point perturbed away from its defining values, kept positive.
template <class Gen>
std::pair<DecisionVector, AuxVector> random_pair(const ProblemInstance& in, Gen& g) {
  const DecisionVector x = raco::testing::random_feasible(in, g);
  auto p = lift(in, x).to_array();
  std::uniform_real_distribution<double> f(0.5, 2.0);
  for (double& v : p) v *= f(g);
  return {x, AuxVector::from_array(p)};
}

// Lifted objective written out term by term.
double reference_p2(const ProblemInstance& in, const Eigen::VectorXd& z) {
  using namespace var;
  return (1 - z[alpha]) * in.L * in.Kl * in.eta_l * z[fl] * z[fl] +
         z[alpha] * in.L * in.Kr * in.eta_r * z[fr] * z[fr] +
         (z[p1a] + z[p1r] * in.sig_R1_sq + z[s1] * in.hA1_sq) * z[t_a] + z[p2a] * z[t_d1] + z[p2r] * z[t_d2] +
         in.gamma * z[t_s];
}

} // namespace

TEST(Lift, StackRoundTrip) {
  std::mt19937_64 g(1);
  const ProblemInstance in = raco::testing::table1();
  const auto [x, p] = random_pair(in, g);
  const auto [x2, p2] = unstack(stack(x, p));
  EXPECT_EQ(x, x2);
  EXPECT_EQ(p, p2);
  EXPECT_EQ(kLiftedSize, 25);
}

TEST(Lift, ObjectiveEquivalence) {
  std::mt19937_64 g(2);
  for (int k = 0; k < 1000; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.3);
    const DecisionVector x = raco::testing::random_feasible(in, g);
    const AuxVector p = lift(in, x);
    EXPECT_LT(rel_err(objective_p2(in, x, p), objective_p1(in, x)), 1e-10);
  }
}

TEST(Lift, SatisfiesEveryConstraint) {
  std::mt19937_64 g(3);
  for (int k = 0; k < 200; ++k) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.1);
    const DecisionVector x = raco::testing::random_feasible(in, g);
    const AuxVector p = lift(in, x);
    const auto r = p2_constraints(in, x, p);
    ASSERT_EQ(r.size(), static_cast<size_t>(kP2Rows));
    const double scale[] = {in.L, in.W, 1.0};
    for (int i = 0; i < kP2Rows; ++i) EXPECT_LE(r[i], 1e-9 * scale[0] * scale[1]) << p2_constraint_names()[i];
    EXPECT_NEAR(r[kProdLower], 0.0, 1e-12);
    EXPECT_NEAR(r[kProdUpper], 0.0, 1e-12);
    EXPECT_LE(r[kLogAf], 1e-12);
    EXPECT_NEAR(r[kLoadAf] / in.L, 0.0, 1e-12);
  }
}

TEST(Lift, MidpointAndSymmetricProduct) {
  const ProblemInstance in = raco::testing::table1();
  DecisionVector x{0.5, 0.5, 0.25, 0.25, 1.0, 1.0, 1e8, 3e8};
  const AuxVector p = lift(in, x);
  EXPECT_EQ(p.s1, x.p1a * x.p1r);
  EXPECT_EQ(p.s2, x.p1a * x.p1r);
  EXPECT_DOUBLE_EQ(p.t_s, t_sys(in, x));
}

TEST(Lift, DegenerateInput) {
  const ProblemInstance in = raco::testing::table1();
  DecisionVector x{0.5, 0.5, 0.25, 0.0, 1.0, 1.0, 1e8, 3e8};
  EXPECT_THROW(lift(in, x), DegenerateInput);
  x.p2a = 0.25;
  x.fl = 0.0;
  EXPECT_THROW(lift(in, x), DegenerateInput);
}

TEST(ObjectiveP2, EdgeOnlyWhenGammaZero) {
  ProblemInstance in = raco::testing::table1(0.0);
  DecisionVector x{1.0, 0.5, 0.3, 0.3, 1.0, 1.0, 1e8, 3e8};
  AuxVector p;
  p.t_s = 7.0;
  const double edge = in.L * in.Kr * in.eta_r * 9e16;
  EXPECT_NEAR(objective_p2(in, x, p), edge, 1e-15);
}

TEST(DcSplit, UpperBoundAndTightness) {
  std::mt19937_64 g(4);
  for (int e = 0; e < 20; ++e) {
    const ProblemInstance in = raco::testing::random_instance(g, 0.2);
    const auto [xt, pt] = random_pair(in, g);
    const Eigen::VectorXd zt = stack(xt, pt);
    const DcParts at = dc_objective(in, xt, pt, xt, pt);
    const double p2t = objective_p2(in, xt, pt);
    EXPECT_LE(std::abs(at.f3 - p2t), 1e-9 * std::abs(p2t));
    EXPECT_NEAR(at.f2_hat, at.f2, 1e-12 * std::abs(at.f2));
    EXPECT_LT(rel_err(at.f1 - at.f2, reference_p2(in, zt)), 1e-9);
    for (int k = 0; k < 100; ++k) {
      const auto [x, p] = random_pair(in, g);
      const DcParts d = dc_objective(in, x, p, xt, pt);
      const double p2 = objective_p2(in, x, p);
      EXPECT_GE(d.f3, p2 - 1e-9 * std::abs(p2));
    }
  }
}

TEST(DcSplit, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(5);
  const ProblemInstance in = raco::testing::random_instance(g, 0.2);
  const auto [xt, pt] = random_pair(in, g);
  const Eigen::VectorXd zt = stack(xt, pt);
  const DcSplit s = dc_split(in, zt);
  const ConvexFn f3 = upper_bound_fn(s, zt);
  const Eigen::VectorXd grad = f3.gradient(zt);
  for (int i = 0; i < kLiftedSize; ++i) {
    const double h = 1e-5 * std::abs(zt[i]);
    Eigen::VectorXd a = zt, b = zt;
    a[i] += h;
    b[i] -= h;
    const double fd = (reference_p2(in, a) - reference_p2(in, b)) / (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-5 * std::abs(fd) + 1e-9 * std::abs(reference_p2(in, zt)) / std::abs(zt[i]))
        << "variable " << i;
  }
}

TEST(Cuts, Bilinear) {
  const BilinearCut cut = linearize_bilinear(1.0, 1.0);
  EXPECT_DOUBLE_EQ(cut.residual(0.0, 1.0, 1.0), 2.0 * (0.0 - 1.0));  // tight: 2(c - xy)
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 10000; ++k) {
    const double xt = u(g), yt = u(g), c = u(g), x = u(g), y = u(g);
    const BilinearCut l = linearize_bilinear(xt, yt);
    EXPECT_NEAR(l.residual(c, xt, yt), 2.0 * (c - xt * yt), 1e-12);
    EXPECT_GE(l.residual(c, x, y), 2.0 * (c - x * y) - 1e-12);
  }
}

TEST(Cuts, ProductUpper) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 10000; ++k) {
    const double xt = u(g), yt = u(g), c = u(g), x = u(g), y = u(g);
    const ProductCut l = linearize_product_upper(xt, yt);
    EXPECT_NEAR(l.residual(c, xt, yt), xt * yt - c, 1e-12);
    EXPECT_GE(l.residual(c, x, y), x * y - c - 1e-12);
  }
}

TEST(Cuts, LogCapacityTangent) {
  for (double phit : {1e-6, 1e-3, 0.1, 1.0, 10.0}) {
    const LogCut l = linearize_log_capacity(phit);
    auto f = [](double phi) { return std::log2(1.0 + 1.0 / phi); };
    EXPECT_NEAR(l.intercept + l.slope * phit, f(phit), 1e-12 * f(phit));
    const double h = 1e-6 * phit;
    EXPECT_NEAR(l.slope, (f(phit + h) - f(phit - h)) / (2 * h), 1e-5 * std::abs(l.slope));
    for (double m : {0.1, 0.5, 2.0, 10.0}) EXPECT_LE(l.intercept + l.slope * m * phit, f(m * phit) + 1e-12);
  }
}
