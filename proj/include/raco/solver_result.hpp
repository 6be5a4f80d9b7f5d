#ifndef RACO_SOLVER_RESULT_HPP
#define RACO_SOLVER_RESULT_HPP

#include <optional>
#include <string>
#include <vector>

#include "raco/model.hpp"
#include "raco/transform.hpp"

namespace raco {

struct SolverResult {
  std::string solver;
  DecisionVector x;
  std::optional<AuxVector> phi;  // lifted variables, CCCP only
  double objective = 0.0;        // E_sys + gamma t_sys at x
  double e_sys = 0.0;
  double t_sys = 0.0;
  int iterations = 0;
  std::string termination;       // converged | max-iterations | inner-stall | closed-form

  // Per-iteration values of the quantity each algorithm descends on
  // (lifted objective for CCCP, smoothed objective for IBCD), and of the
  // true objective at the same iterates. Index 0 is the starting point.
  std::vector<double> surrogate_trace;
  std::vector<double> objective_trace;
};

inline void fill_outcome(const ProblemInstance& in, SolverResult& r) {
  const auto o = evaluate(in, r.x);
  r.e_sys = o.e_sys();
  r.t_sys = t_sys(in, o);
  r.objective = weighted_cost(in.gamma, r.e_sys, r.t_sys);
}

} // namespace raco

#endif // RACO_SOLVER_RESULT_HPP
