#ifndef RACO_CLI_HPP
#define RACO_CLI_HPP

// Subcommands behind the raco executable. Each takes a parsed invocation and
// the output streams and returns the process exit code, so they can be driven
// from tests without spawning a process.

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "raco/config.hpp"
#include "raco/harness.hpp"

namespace raco {

enum ExitCode : int { kExitOk = 0, kExitSolverFailure = 1, kExitUsage = 2 };

enum class Command { solve, sweep, convergence, compare };

/// Bad flags, an unreadable config or an invalid instance.
class UsageError : public Error {
public:
  using Error::Error;
};

struct CliInvocation {
  Command command = Command::solve;
  std::optional<std::string> config_path;
  std::optional<std::string> experiment;  // sweep only
  std::vector<double> gammas;
  std::vector<double> Ls;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> solvers;
  std::optional<int> trials;
  std::optional<int> threads;
  std::optional<std::string> output;
  bool timing = false;
  int verbosity = 0;
};

inline std::string default_output_dir() {
  const char* env = std::getenv("RACO_OUT_DIR");
  return env && *env ? env : ".";
}

/// File values first, then flags on top.
inline Config resolve_config(const CliInvocation& inv) {
  Config base;
  base.experiment.output_dir = default_output_dir();
  Config c = inv.config_path ? load_config(*inv.config_path, base) : base;
  ExperimentConfig& e = c.experiment;

  switch (inv.command) {
    case Command::convergence: e.experiment = Experiment::convergence; break;
    case Command::compare: e.experiment = Experiment::baseline_compare; break;
    case Command::sweep:
      if (inv.experiment) {
        try {
          e.experiment = experiment_from_string(*inv.experiment);
        } catch (const InvalidInstance& ex) {
          throw UsageError(ex.what());
        }
      }
      break;
    case Command::solve: break;
  }
  if (!inv.gammas.empty()) e.gammas = inv.gammas;
  if (!inv.Ls.empty()) e.Ls = inv.Ls;
  if (inv.seed) e.seed = *inv.seed;
  if (inv.trials) e.trials = *inv.trials;
  if (inv.threads) e.threads = *inv.threads;
  if (inv.output) e.output_dir = *inv.output;
  if (inv.timing) e.timing = true;
  if (!inv.solvers.empty()) {
    e.solvers.clear();
    for (const auto& s : inv.solvers) {
      const std::string name = canonical_solver_name(s);
      if (name.empty()) throw UsageError("unknown solver '" + s + "'");
      e.solvers.push_back(name);
    }
  }
  return c;
}

namespace cli_detail {

inline std::string error_type(const std::exception& e) {
  if (dynamic_cast<const InfeasibleInstance*>(&e)) return "InfeasibleInstance";
  if (dynamic_cast<const DegenerateInput*>(&e)) return "DegenerateInput";
  if (dynamic_cast<const InnerSolverStall*>(&e)) return "InnerSolverStall";
  if (dynamic_cast<const InvalidInstance*>(&e)) return "InvalidInstance";
  return "Error";
}

inline nlohmann::ordered_json instance_json(const ProblemInstance& in) {
  nlohmann::ordered_json j;
  j["W"] = in.W;
  j["L"] = in.L;
  j["Kl"] = in.Kl;
  j["Kr"] = in.Kr;
  j["rho"] = in.rho;
  j["eta_l"] = in.eta_l;
  j["eta_r"] = in.eta_r;
  j["gamma"] = in.gamma;
  j["hA1_sq"] = in.hA1_sq;
  j["hB1_sq"] = in.hB1_sq;
  j["hA2_sq"] = in.hA2_sq;
  j["hB2_sq"] = in.hB2_sq;
  j["sig_R1_sq"] = in.sig_R1_sq;
  j["sig_B1_sq"] = in.sig_B1_sq;
  j["sig_R2_sq"] = in.sig_R2_sq;
  j["sig_B2_sq"] = in.sig_B2_sq;
  j["P_A_max"] = in.P_A_max;
  j["P_R_max"] = in.P_R_max;
  j["F_l_max"] = in.F_l_max;
  j["F_r_max"] = in.F_r_max;
  j["relaying"] = to_string(in.relaying);
  return j;
}

inline nlohmann::ordered_json decision_json(const DecisionVector& x) {
  nlohmann::ordered_json j;
  j["alpha"] = x.alpha;
  j["nu"] = x.nu;
  j["p1a"] = x.p1a;
  j["p2a"] = x.p2a;
  j["p1r"] = x.p1r;
  j["p2r"] = x.p2r;
  j["fl"] = x.fl;
  j["fr"] = x.fr;
  return j;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidInstance& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

} // namespace cli_detail

/// Solves one instance and prints the result as JSON. Without an [instance]
/// section the instance is the first Monte Carlo draw of the seed.
inline int cmd_solve(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    if (inv.gammas.size() > 1 || inv.Ls.size() > 1) throw UsageError("solve takes a single --gamma and --L");
    if (inv.solvers.size() > 1) throw UsageError("solve takes a single --solver");
    const Config c = resolve_config(inv);
    const ExperimentConfig& e = c.experiment;
    const std::string solver = e.solvers.empty() ? "HR-CCCP" : e.solvers.front();

    nlohmann::ordered_json j;
    j["solver"] = solver;
    ProblemInstance in;
    if (c.instance) {
      in = *c.instance;
      if (!inv.gammas.empty()) in.gamma = inv.gammas.front();
      if (!inv.Ls.empty()) in.L = inv.Ls.front();
    } else {
      e.channel.validate();
      SweepPoint p{e.active_gammas().front(), std::nullopt, std::nullopt};
      if (!inv.Ls.empty()) p.L = inv.Ls.front();
      if (e.channel.mode == ChannelMode::pathloss_geometry) p.D = e.channel.D;
      const std::uint64_t seed = trial_seed(e.seed, 0);
      in = trial_instance(e, p, seed);
      j["seed"] = seed;
    }
    in.validate();
    j["instance"] = cli_detail::instance_json(in);

    try {
      const SolverResult r = run_solver(solver, in, e.settings);
      j["objective"] = r.objective;
      j["e_sys"] = r.e_sys;
      j["t_sys"] = r.t_sys;
      j["iterations"] = r.iterations;
      j["termination"] = r.termination;
      j["x"] = cli_detail::decision_json(r.x);
      out << j.dump(2) << '\n';
      return static_cast<int>(kExitOk);
    } catch (const std::exception& ex) {
      j["error"] = {{"type", cli_detail::error_type(ex)}, {"message", ex.what()}};
      out << j.dump(2) << '\n';
      return static_cast<int>(kExitSolverFailure);
    }
  });
}

/// Runs the configured experiment and writes its CSV files. Failed trials
/// are kept in the output and turn the exit code to 1.
inline int cmd_experiment(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    const Config c = resolve_config(inv);
    const ExperimentResult r = run_experiment(c.experiment);
    for (const auto& path : write_experiment(c.experiment, r)) out << path << '\n';
    int failed = 0;
    for (const auto& rec : r.records)
      if (!rec.ok()) {
        ++failed;
        if (inv.verbosity > 0) err << "trial " << rec.trial << " " << rec.solver << ": " << rec.termination << '\n';
      }
    if (inv.verbosity > 0) {
      for (const auto& s : r.summary)
        err << to_string(c.experiment.experiment) << " gamma=" << s.gamma << (s.L ? " L=" + csv::number(*s.L) : "")
            << (s.D ? " D=" + csv::number(*s.D) : "") << ' ' << s.solver << " mean=" << s.mean_objective
            << " iters=" << s.mean_iterations << '\n';
    }
    if (failed > 0) {
      err << failed << " of " << r.records.size() << " solver runs failed\n";
      return static_cast<int>(kExitSolverFailure);
    }
    return static_cast<int>(kExitOk);
  });
}

inline int cmd_sweep(CliInvocation inv, std::ostream& out, std::ostream& err) {
  inv.command = Command::sweep;
  return cmd_experiment(inv, out, err);
}

inline int cmd_convergence(CliInvocation inv, std::ostream& out, std::ostream& err) {
  inv.command = Command::convergence;
  return cmd_experiment(inv, out, err);
}

inline int cmd_compare(CliInvocation inv, std::ostream& out, std::ostream& err) {
  inv.command = Command::compare;
  return cmd_experiment(inv, out, err);
}

inline int run_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  switch (inv.command) {
    case Command::solve: return cmd_solve(inv, out, err);
    case Command::sweep: return cmd_sweep(inv, out, err);
    case Command::convergence: return cmd_convergence(inv, out, err);
    case Command::compare: return cmd_compare(inv, out, err);
  }
  return kExitUsage;
}

} // namespace raco

#endif // RACO_CLI_HPP
