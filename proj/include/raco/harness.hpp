#ifndef RACO_HARNESS_HPP
#define RACO_HARNESS_HPP

// Monte Carlo experiment driver. Every trial index owns one seed; the same
// draws are reused for every solver, every gamma and every distance, so
// differences between solvers are not blurred by channel noise.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "raco/cccp.hpp"
#include "raco/channel.hpp"
#include "raco/csv.hpp"
#include "raco/ibcd.hpp"
#include "raco/special.hpp"

namespace raco {

// ---------------------------------------------------------------------------
// Solvers by name
// ---------------------------------------------------------------------------

struct SolverSettings {
  CccpConfig cccp;
  IbcdConfig ibcd;
  AfConfig af;

  bool operator==(const SolverSettings&) const = default;
};

inline const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {"HR-CCCP", "HR-IBCD", "AF", "DF", "TDHR", "FDHR"};
  return names;
}

inline bool is_solver_name(const std::string& s) {
  const auto& n = solver_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

/// Canonical name of a solver; also accepts lower case and the short forms
/// "cccp" and "ibcd". Returns an empty string for an unknown name.
inline std::string canonical_solver_name(const std::string& s) {
  std::string u = s;
  for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "CCCP") return "HR-CCCP";
  if (u == "IBCD") return "HR-IBCD";
  return is_solver_name(u) ? u : std::string();
}

/// Half-band frequency division: nu held at 0.5.
inline SolverResult solve_fdhr(const ProblemInstance& in, IbcdConfig cfg = {}) {
  cfg.fixed_nu = 0.5;
  SolverResult r = run_ibcd(in, cfg);
  r.solver = "FDHR";
  return r;
}

/// Time division: both links get the full band in consecutive slots and the
/// latency is t_df2 + max(t_df1 + t_r, t_l + t_af, t_df1 + t_af) (see
/// latency_paths). nu has no effect and is left at its start value.
inline SolverResult solve_tdhr(const ProblemInstance& in, IbcdConfig cfg = {}) {
  ProblemInstance td = in;
  td.relaying = Relaying::time_division;
  cfg.fixed_nu.reset();
  SolverResult r = run_ibcd(td, cfg);
  r.solver = "TDHR";
  return r;
}

inline SolverResult run_solver(const std::string& name, const ProblemInstance& in, const SolverSettings& s = {}) {
  if (name == "HR-CCCP") return run_cccp(in, s.cccp);
  if (name == "HR-IBCD") return run_ibcd(in, s.ibcd);
  if (name == "AF") return to_solver_result(solve_af(in, s.af));
  if (name == "DF") return to_solver_result(solve_df(in));
  if (name == "TDHR") return solve_tdhr(in, s.ibcd);
  if (name == "FDHR") return solve_fdhr(in, s.ibcd);
  throw InvalidInstance("unknown solver '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment description
// ---------------------------------------------------------------------------

enum class Experiment { convergence, tradeoff, distance, gamma_sweep, L_sweep, baseline_compare };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::convergence: return "convergence";
    case Experiment::tradeoff: return "tradeoff";
    case Experiment::distance: return "distance";
    case Experiment::gamma_sweep: return "gamma-sweep";
    case Experiment::L_sweep: return "L-sweep";
    case Experiment::baseline_compare: return "baseline-compare";
  }
  return "";
}

inline Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::convergence, Experiment::tradeoff, Experiment::distance, Experiment::gamma_sweep,
                 Experiment::L_sweep, Experiment::baseline_compare})
    if (to_string(e) == s) return e;
  throw InvalidInstance("unknown experiment '" + s + "'");
}

inline std::vector<std::string> default_solvers(Experiment e) {
  switch (e) {
    case Experiment::convergence:
    case Experiment::tradeoff:
    case Experiment::L_sweep: return {"HR-CCCP", "HR-IBCD"};
    case Experiment::distance: return {"HR-CCCP"};
    default: return solver_names();
  }
}

inline std::vector<double> default_gammas(Experiment e) {
  switch (e) {
    case Experiment::convergence: return {0.01};
    case Experiment::distance: return {0.05, 0.5};
    case Experiment::L_sweep: return {0.01, 1.0};
    default: return {0.01, 0.05, 0.1, 0.5, 1.0};
  }
}

struct ExperimentConfig {
  Experiment experiment = Experiment::gamma_sweep;
  std::vector<double> gammas;  // empty: the experiment's default grid
  std::vector<double> Ls = {1e5, 2e5, 3e5, 4e5, 5e5};
  std::vector<double> distances = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170};
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;  // empty: the experiment's default set
  ChannelConfig channel;
  ScenarioDefaults scenario;
  SolverSettings settings;
  std::string output_dir = ".";
  int threads = 0;      // 0: one per hardware thread
  bool timing = false;  // record wall time (makes output run-dependent)

  bool operator==(const ExperimentConfig&) const = default;

  std::vector<std::string> active_solvers() const { return solvers.empty() ? default_solvers(experiment) : solvers; }
  std::vector<double> active_gammas() const { return gammas.empty() ? default_gammas(experiment) : gammas; }

  void validate() const {
    if (trials < 1) throw InvalidInstance("trials must be >= 1");
    for (double g : active_gammas())
      if (!(g >= 0.0)) throw InvalidInstance("gamma values must be >= 0");
    if (experiment == Experiment::L_sweep && Ls.empty()) throw InvalidInstance("L grid is empty");
    if (experiment == Experiment::distance && distances.empty()) throw InvalidInstance("distance grid is empty");
    for (const auto& s : active_solvers())
      if (!is_solver_name(s)) throw InvalidInstance("unknown solver '" + s + "'");
    channel.validate();
  }
};

struct SweepPoint {
  double gamma = 0.0;
  std::optional<double> L;  // empty: drawn per trial
  std::optional<double> D;  // geometry mode only
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  std::vector<SweepPoint> pts;
  for (double g : c.active_gammas()) {
    if (c.experiment == Experiment::L_sweep) {
      for (double L : c.Ls) pts.push_back({g, L, std::nullopt});
    } else if (c.experiment == Experiment::distance) {
      for (double D : c.distances) pts.push_back({g, std::nullopt, D});
    } else {
      std::optional<double> D;
      if (c.channel.mode == ChannelMode::pathloss_geometry) D = c.channel.D;
      pts.push_back({g, std::nullopt, D});
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> D;
  double hA1_sq = 0.0, hB1_sq = 0.0, hA2_sq = 0.0, hB2_sq = 0.0;
  double gamma = 0.0;
  double L = 0.0;
  std::string solver;
  double objective = 0.0;
  double e_sys = 0.0;
  double t_sys = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
  int iterations = 0;
  std::string termination;
  std::optional<double> wall_time;

  bool ok() const { return termination.rfind("error", 0) != 0; }
};

struct TraceRecord {
  int trial = 0;
  double gamma = 0.0;
  std::string solver;
  int iteration = 0;
  double objective = 0.0;
  double surrogate = 0.0;
};

struct SummaryRecord {
  double gamma = 0.0;
  std::optional<double> L;
  std::optional<double> D;
  std::string solver;
  int trials_ok = 0;
  double mean_objective = 0.0, std_objective = 0.0;
  double mean_e_sys = 0.0, std_e_sys = 0.0;
  double mean_t_sys = 0.0, std_t_sys = 0.0;
  double mean_iterations = 0.0;
};

struct ExperimentResult {
  std::vector<SweepPoint> points;
  std::vector<std::string> solvers;
  std::vector<TrialRecord> records;  // point-major, then trial, then solver
  std::vector<SummaryRecord> summary;
  std::vector<TraceRecord> traces;
};

inline ProblemInstance trial_instance(const ExperimentConfig& c, const SweepPoint& p, std::uint64_t seed,
                                      ChannelGains* gains_out = nullptr) {
  ChannelConfig ch = c.channel;
  if (p.D) {
    ch.mode = ChannelMode::pathloss_geometry;
    ch.D = *p.D;
  }
  const TrialDraw d = draw_trial(ch, seed, c.scenario);
  if (gains_out) *gains_out = d.gains;
  return default_instance(p.gamma, p.L ? *p.L : d.L, d.gains, c.scenario);
}

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

} // namespace detail

inline std::vector<SummaryRecord> summarise(const ExperimentResult& r, int trials) {
  std::vector<SummaryRecord> out;
  const std::size_t ns = r.solvers.size();
  for (std::size_t p = 0; p < r.points.size(); ++p) {
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<double> obj, e, t, it;
      for (int k = 0; k < trials; ++k) {
        const TrialRecord& rec = r.records[(p * trials + k) * ns + s];
        if (!rec.ok()) continue;
        obj.push_back(rec.objective);
        e.push_back(rec.e_sys);
        t.push_back(rec.t_sys);
        it.push_back(rec.iterations);
      }
      SummaryRecord sr;
      sr.gamma = r.points[p].gamma;
      sr.L = r.points[p].L;
      sr.D = r.points[p].D;
      sr.solver = r.solvers[s];
      sr.trials_ok = static_cast<int>(obj.size());
      std::tie(sr.mean_objective, sr.std_objective) = detail::mean_std(obj);
      std::tie(sr.mean_e_sys, sr.std_e_sys) = detail::mean_std(e);
      std::tie(sr.mean_t_sys, sr.std_t_sys) = detail::mean_std(t);
      sr.mean_iterations = detail::mean_std(it).first;
      out.push_back(sr);
    }
  }
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.points = sweep_points(cfg);
  res.solvers = cfg.active_solvers();
  const std::size_t ns = res.solvers.size();
  const std::size_t jobs = res.points.size() * static_cast<std::size_t>(cfg.trials);
  res.records.resize(jobs * ns);
  std::vector<std::vector<TraceRecord>> traces(jobs);
  const bool want_traces = cfg.experiment == Experiment::convergence;

  auto run_job = [&](std::size_t j) {
    const std::size_t p = j / cfg.trials;
    const int k = static_cast<int>(j % cfg.trials);
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(k));
    ChannelGains g;
    const ProblemInstance in = trial_instance(cfg, res.points[p], seed, &g);
    for (std::size_t s = 0; s < ns; ++s) {
      TrialRecord& rec = res.records[j * ns + s];
      rec.trial = k;
      rec.seed = seed;
      rec.D = res.points[p].D;
      rec.hA1_sq = g.hA1_sq;
      rec.hB1_sq = g.hB1_sq;
      rec.hA2_sq = g.hA2_sq;
      rec.hB2_sq = g.hB2_sq;
      rec.gamma = in.gamma;
      rec.L = in.L;
      rec.solver = res.solvers[s];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SolverResult r = run_solver(res.solvers[s], in, cfg.settings);
        rec.objective = r.objective;
        rec.e_sys = r.e_sys;
        rec.t_sys = r.t_sys;
        rec.alpha = r.x.alpha;
        rec.nu = r.x.nu;
        rec.iterations = r.iterations;
        rec.termination = r.termination;
        if (want_traces)
          for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
            traces[j].push_back({k, in.gamma, r.solver, static_cast<int>(i), r.objective_trace[i],
                                 r.surrogate_trace[i]});
      } catch (const std::exception& e) {
        rec.objective = rec.e_sys = rec.t_sys = std::nan("");
        rec.termination = std::string("error: ") + e.what();
      }
      if (cfg.timing)
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  unsigned nt = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  nt = std::max(1u, std::min<unsigned>(nt, static_cast<unsigned>(jobs)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
  };
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& t : traces) res.traces.insert(res.traces.end(), t.begin(), t.end());
  res.summary = summarise(res, cfg.trials);
  return res;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline std::string optional_number(const std::optional<double>& v) { return v ? csv::number(*v) : ""; }

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
  csv::write_row(os, {"trial", "seed", "D", "hA1_sq", "hB1_sq", "hA2_sq", "hB2_sq", "gamma", "L", "solver",
                      "objective", "e_sys", "t_sys", "alpha", "nu", "iterations", "termination", "wall_time"});
  for (const auto& r : recs)
    csv::write_row(os, {std::to_string(r.trial), std::to_string(r.seed), optional_number(r.D), csv::number(r.hA1_sq),
                        csv::number(r.hB1_sq), csv::number(r.hA2_sq), csv::number(r.hB2_sq), csv::number(r.gamma),
                        csv::number(r.L), r.solver, csv::number(r.objective), csv::number(r.e_sys),
                        csv::number(r.t_sys), csv::number(r.alpha), csv::number(r.nu), std::to_string(r.iterations),
                        r.termination, optional_number(r.wall_time)});
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRecord>& recs) {
  csv::write_row(os, {"gamma", "L", "D", "solver", "trials_ok", "mean_objective", "std_objective", "mean_e_sys",
                      "std_e_sys", "mean_t_sys", "std_t_sys", "mean_iterations"});
  for (const auto& r : recs)
    csv::write_row(os, {csv::number(r.gamma), optional_number(r.L), optional_number(r.D), r.solver,
                        std::to_string(r.trials_ok), csv::number(r.mean_objective), csv::number(r.std_objective),
                        csv::number(r.mean_e_sys), csv::number(r.std_e_sys), csv::number(r.mean_t_sys),
                        csv::number(r.std_t_sys), csv::number(r.mean_iterations)});
}

/// One row per sweep point, one mean-objective column per solver.
inline void write_compare_csv(std::ostream& os, const ExperimentResult& r) {
  std::vector<std::string> head = {"gamma", "L", "D"};
  head.insert(head.end(), r.solvers.begin(), r.solvers.end());
  csv::write_row(os, head);
  const std::size_t ns = r.solvers.size();
  for (std::size_t p = 0; p < r.points.size(); ++p) {
    std::vector<std::string> row = {csv::number(r.points[p].gamma), optional_number(r.points[p].L),
                                    optional_number(r.points[p].D)};
    for (std::size_t s = 0; s < ns; ++s) row.push_back(csv::number(r.summary[p * ns + s].mean_objective));
    csv::write_row(os, row);
  }
}

inline void write_traces_csv(std::ostream& os, const std::vector<TraceRecord>& recs) {
  csv::write_row(os, {"trial", "gamma", "solver", "iteration", "objective", "surrogate"});
  for (const auto& r : recs)
    csv::write_row(os, {std::to_string(r.trial), csv::number(r.gamma), r.solver, std::to_string(r.iteration),
                        csv::number(r.objective), csv::number(r.surrogate)});
}

/// Writes <experiment>_trials.csv, _summary.csv, _compare.csv and, for the
/// convergence experiment, _traces.csv. Returns the paths written.
inline std::vector<std::string> write_experiment(const ExperimentConfig& cfg, const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const std::string stem = (fs::path(cfg.output_dir) / to_string(cfg.experiment)).string();
  std::vector<std::string> paths;
  auto emit = [&](const std::string& suffix, auto&& fn) {
    const std::string path = stem + suffix;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    fn(os);
    paths.push_back(path);
  };
  emit("_trials.csv", [&](std::ostream& os) { write_trials_csv(os, r.records); });
  emit("_summary.csv", [&](std::ostream& os) { write_summary_csv(os, r.summary); });
  emit("_compare.csv", [&](std::ostream& os) { write_compare_csv(os, r); });
  if (cfg.experiment == Experiment::convergence)
    emit("_traces.csv", [&](std::ostream& os) { write_traces_csv(os, r.traces); });
  return paths;
}

} // namespace raco

#endif // RACO_HARNESS_HPP
