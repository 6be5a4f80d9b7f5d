#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "raco/cli.hpp"

namespace {

void add_common(CLI::App* sub, raco::CliInvocation& inv) {
  sub->add_option("-c,--config", inv.config_path, "Configuration file")->check(CLI::ExistingFile);
  sub->add_option("-g,--gamma", inv.gammas, "Delay weight in J/s (repeatable)");
  sub->add_option("-L,--task-size", inv.Ls, "Task size in bits (repeatable)");
  sub->add_option("-s,--seed", inv.seed, "Base RNG seed");
  sub->add_option("--solver", inv.solvers, "Solver: HR-CCCP, HR-IBCD, AF, DF, TDHR, FDHR (repeatable)");
  sub->add_flag("-v,--verbose", inv.verbosity, "More output on stderr (repeatable)");
}

void add_experiment(CLI::App* sub, raco::CliInvocation& inv) {
  sub->add_option("-n,--trials", inv.trials, "Monte Carlo trials per sweep point")->check(CLI::PositiveNumber);
  sub->add_option("-o,--output", inv.output, "Output directory (default: $RACO_OUT_DIR or .)");
  sub->add_option("-j,--threads", inv.threads, "Worker threads, 0 for one per core")->check(CLI::NonNegativeNumber);
  sub->add_flag("--timing", inv.timing, "Record wall time per solve (output is no longer reproducible)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource allocation for relay-assisted computation offloading"};
  app.require_subcommand(1);

  raco::CliInvocation inv;
  auto* solve = app.add_subcommand("solve", "Solve one instance, print JSON");
  add_common(solve, inv);

  auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo experiment, write CSV");
  add_common(sweep, inv);
  add_experiment(sweep, inv);
  sweep->add_option("-e,--experiment", inv.experiment,
                    "convergence, tradeoff, distance, gamma-sweep, L-sweep or baseline-compare");

  auto* conv = app.add_subcommand("convergence", "Per-iteration objective traces, write CSV");
  add_common(conv, inv);
  add_experiment(conv, inv);

  auto* compare = app.add_subcommand("compare", "All six solvers over the gamma grid, write CSV");
  add_common(compare, inv);
  add_experiment(compare, inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? raco::kExitOk : raco::kExitUsage;
  }

  if (solve->parsed()) inv.command = raco::Command::solve;
  else if (sweep->parsed()) inv.command = raco::Command::sweep;
  else if (conv->parsed()) inv.command = raco::Command::convergence;
  else inv.command = raco::Command::compare;

  try {
    return raco::run_command(inv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return raco::kExitSolverFailure;
  }
}
