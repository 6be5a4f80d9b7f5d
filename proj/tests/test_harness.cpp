#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "raco/harness.hpp"
#include "fixtures.hpp"

using namespace raco;
using raco::testing::rel_err;

TEST(Channel, NoisePower) {
  EXPECT_NEAR(noise_power(-169.0, 40e6), 5.0356e-13, 1e-4 * 5.0356e-13);
  EXPECT_DOUBLE_EQ(noise_power(-169.0, 40e6), std::pow(10.0, -19.9) * 40e6);
}

TEST(Channel, RayleighMean) {
  ChannelConfig c;
  Rng rng(42);
  double s[4] = {0, 0, 0, 0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const ChannelGains g = draw_channels(c, rng);
    s[0] += g.hA1_sq;
    s[1] += g.hB1_sq;
    s[2] += g.hA2_sq;
    s[3] += g.hB2_sq;
  }
  for (double v : s) EXPECT_LT(rel_err(v / n, c.sigma_h_sq), 0.01);
}

TEST(Channel, Geometry) {
  ChannelConfig c;
  c.mode = ChannelMode::pathloss_geometry;
  EXPECT_DOUBLE_EQ(path_gain(c, c.d0), 1e-6);
  EXPECT_NEAR(path_gain(c, 10 * c.d0), 1e-9, 1e-21);
  c.D = c.d0;
  EXPECT_NEAR(mean_gains(c).first, c.sigma_h_sq * 1e-6, 1e-20);
  EXPECT_NEAR(mean_gains(c).second, c.sigma_h_sq * path_gain(c, c.dAB - c.d0), 1e-25);
  c.D = 0.0;
  EXPECT_THROW(c.validate(), InvalidInstance);
}

TEST(Channel, SeedsAreReproducibleAndDistinct) {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(trial_seed(1, i));
  EXPECT_EQ(seeds.size(), 1000u);
  const ChannelConfig c;
  const TrialDraw d1 = draw_trial(c, 99), d2 = draw_trial(c, 99);
  EXPECT_EQ(d1.gains.hA1_sq, d2.gains.hA1_sq);
  EXPECT_EQ(d1.L, d2.L);
  EXPECT_GE(d1.L, 1e5);
  EXPECT_LE(d1.L, 5e5);
}

TEST(Channel, DefaultInstanceCaps) {
  const ProblemInstance in = default_instance(0.1, 3e5, {1e-3, 1e-3, 1e-3, 1e-3});
  EXPECT_EQ(in.W, 40e6);
  EXPECT_EQ(in.P_A_max, 1.0);
  EXPECT_EQ(in.P_R_max, 5.0);
  EXPECT_EQ(in.F_l_max, 200e6);
  EXPECT_EQ(in.F_r_max, 600e6);
  EXPECT_EQ(in.Kl, 1e3);
  EXPECT_EQ(in.rho, 0.1);
  EXPECT_EQ(in.eta_r, 1e-28);
  EXPECT_EQ(in, raco::testing::table1(0.1));
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.0, 1.0, -2.5, 1e-300, 5.0356e-13, 0.1 + 0.2, 123456789.123}) {
    const std::string s = csv::number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(csv::field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Baselines, FrequencyDivisionPinsHalfBand) {
  const ProblemInstance in = raco::testing::table1(0.1);
  const SolverResult r = solve_fdhr(in);
  EXPECT_EQ(r.solver, "FDHR");
  EXPECT_EQ(r.x.nu, 0.5);
  IbcdConfig pinned;
  pinned.fixed_nu = 0.5;
  EXPECT_EQ(r.objective, run_ibcd(in, pinned).objective);
}

TEST(Baselines, TimeDivisionTimeline) {
  const ProblemInstance in = raco::testing::table1(0.1);
  const SolverResult r = solve_tdhr(in);
  EXPECT_EQ(r.solver, "TDHR");
  ProblemInstance td = in;
  td.relaying = Relaying::time_division;
  const auto o = evaluate(td, r.x);
  EXPECT_DOUBLE_EQ(r.t_sys, o.t_df2 + std::max({o.t_df1 + o.t_r, o.t_l + o.t_af, o.t_df1 + o.t_af}));
  // Full band on each slot.
  DecisionVector full = r.x;
  full.nu = 0.0;
  EXPECT_DOUBLE_EQ(o.r_af, rate_af(in, full));
}

TEST(Solvers, Names) {
  EXPECT_EQ(canonical_solver_name("cccp"), "HR-CCCP");
  EXPECT_EQ(canonical_solver_name("Ibcd"), "HR-IBCD");
  EXPECT_EQ(canonical_solver_name("df"), "DF");
  EXPECT_EQ(canonical_solver_name("tdhr"), "TDHR");
  EXPECT_EQ(canonical_solver_name("nope"), "");
  EXPECT_THROW(run_solver("nope", raco::testing::table1()), InvalidInstance);
  for (const auto& n : solver_names()) EXPECT_NO_THROW(run_solver(n, raco::testing::table1()));
}

TEST(Experiment, SweepPoints) {
  ExperimentConfig c;
  c.experiment = Experiment::L_sweep;
  EXPECT_EQ(sweep_points(c).size(), 2u * 5u);
  c.experiment = Experiment::distance;
  EXPECT_EQ(sweep_points(c).size(), 2u * 17u);
  c.experiment = Experiment::gamma_sweep;
  EXPECT_EQ(sweep_points(c).size(), 5u);
  c.gammas = {0.3};
  EXPECT_EQ(sweep_points(c).size(), 1u);
  EXPECT_EQ(experiment_from_string("baseline-compare"), Experiment::baseline_compare);
  EXPECT_THROW(experiment_from_string("x"), InvalidInstance);
}

namespace {

std::string trials_csv(const ExperimentConfig& c) {
  std::ostringstream os;
  write_trials_csv(os, run_experiment(c).records);
  return os.str();
}

} // namespace

TEST(Experiment, RowsAndDeterminism) {
  ExperimentConfig c;
  c.experiment = Experiment::gamma_sweep;
  c.gammas = {0.01, 1.0};
  c.trials = 3;
  c.solvers = {"HR-IBCD", "AF", "DF"};
  c.threads = 1;
  const ExperimentResult r = run_experiment(c);
  EXPECT_EQ(r.records.size(), 2u * 3u * 3u);
  EXPECT_EQ(r.summary.size(), 2u * 3u);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.ok()) << rec.termination;
  // Common random numbers: trial k sees the same channel at every gamma and for every solver.
  EXPECT_EQ(r.records[0].hA1_sq, r.records[9].hA1_sq);
  EXPECT_EQ(r.records[0].seed, r.records[2].seed);

  const std::string one = trials_csv(c);
  c.threads = 3;
  EXPECT_EQ(trials_csv(c), one);
  std::istringstream is(one);
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, 1 + 18);
}

TEST(Experiment, WritesFiles) {
  ExperimentConfig c;
  c.experiment = Experiment::convergence;
  c.trials = 2;
  c.output_dir = (std::filesystem::temp_directory_path() / "raco_harness_test").string();
  std::filesystem::remove_all(c.output_dir);
  const auto paths = write_experiment(c, run_experiment(c));
  ASSERT_EQ(paths.size(), 4u);
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  std::ifstream traces(paths.back());
  std::string head;
  std::getline(traces, head);
  EXPECT_EQ(head, "trial,gamma,solver,iteration,objective,surrogate");
  std::filesystem::remove_all(c.output_dir);
}

TEST(Experiment, SolverErrorsAreRecorded) {
  ExperimentConfig c;
  c.trials = 1;
  c.gammas = {0.1};
  c.solvers = {"HR-CCCP"};
  c.scenario.K = 0.0;  // every instance fails validation inside the solver
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.records[0].ok());
  EXPECT_TRUE(std::isnan(r.records[0].objective));
  EXPECT_EQ(r.summary[0].trials_ok, 0);
}
