#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcfair/convex.hpp"
#include "dcfair/model.hpp"
#include "dcfair/problems.hpp"

namespace dcfair {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by ssg_direct when no iterate ever entered the nearly-feasible set.
struct NoNearlyFeasibleError : SolverError {
  using SolverError::SolverError;
};

struct SsgConfig {
  double epsilon = 1e-3;  // infeasibility tolerance
  long long T = 200;      // iteration count
};

struct SsgResult {
  Vec v_best;
  double best_objective = 0.0;
  long long t_set_size = 0;
  long long oracle_count = 0;  // one per ConvexFn eval/subgrad call
  bool zero_subgrad_stop = false;
};

// Switching subgradient method on a convex problem. Requires
// max_i g_i(v0) <= epsilon (checked with a 1e-10 slack); when the
// feasible-branch objective subgradient vanishes the current point is
// optimal and the method returns immediately.
SsgResult ssg(const ConvexFn& objective, const std::vector<ConvexFn>& constraints,
              const FeasibleDomain& domain, const Vec& v0, const SsgConfig& config);

struct TheoreticalConstants {
  double M = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double f_lb = 0.0;
  double Lambda = 0.0;  // dual bound 2M/sqrt(2 mu nu)
};

struct IdcaSchedule {
  long long K = 0;
  std::vector<double> eps_k;  // size 1 (constant) or K
  std::vector<long long> T_k; // size 1 or K; empty = theoretical formula
  std::optional<TheoreticalConstants> constants;

  double eps_at(long long k) const;
  long long T_at(long long k) const;
  static IdcaSchedule practical(long long K, double eps, long long T);
};

// K and eps_k per the outer-loop bound; T_k uses the computable distance
// bound 2M/mu in place of the unobservable subproblem distance:
//   T_k = ceil((M^2/(eps_k mu)) * ln(4 M^2 / (mu eps_k))).
IdcaSchedule theoretical_schedule(double M, double mu, double nu,
                                  double eps_target, double f0_at_start,
                                  double f_lb);

struct SolveTrace {
  std::vector<DecisionVector> iterates;      // outer iterates, start first
  std::vector<double> objective_values;      // true DC objective
  std::vector<double> max_infeasibility;     // max true DC constraint
  std::vector<long long> oracle_counts;      // cumulative per iterate
  std::vector<double> seconds;               // cumulative per iterate
  long long oracle_count = 0;
  double wall_time = 0.0;
};

struct IdcaOptions {
  double eps_feas = 1e-6;       // reporting tolerance for "nearly feasible"
  double early_stop = 1e-8;     // stop when ||w_{k+1}-w_k|| drops below
  bool check_majorization = false;
  std::uint64_t check_seed = 1;
};

struct IdcaResult {
  DecisionVector final;     // last outer iterate
  DecisionVector reported;  // best-objective nearly feasible iterate
  bool feasible_found = false;
  long long best_index = -1;
  bool stopped_early = false;
  SolveTrace trace;
  std::vector<double> inner_eps;    // eps_k actually used
  std::vector<double> inner_g_end;  // max_i g_i(w^{k+1}) per outer step
};

IdcaResult idca(const DCProblem& problem, const IdcaSchedule& schedule,
                const IdcaOptions& options = {});

struct SsgDirectPolicy {
  enum class Kind { Static, Diminishing } kind = Kind::Static;
  double epsilon = 1e-3;  // static tolerance
  double c = 1.0;         // diminishing: eps_t = c/(t+1)

  double eps_at(long long t) const {
    return kind == Kind::Static ? epsilon : c / static_cast<double>(t + 1);
  }
};

struct SsgDirectResult {
  DecisionVector best;
  double best_objective = 0.0;
  double infeas_at_best = 0.0;  // max_i f_i at the returned iterate
  long long t_set_size = 0;
  long long oracle_count = 0;
  SolveTrace trace;
};

// Switching subgradient heuristic applied to the DC functions themselves
// (no convexification, no guarantee). Throws NoNearlyFeasibleError when the
// nearly-feasible set stays empty for the whole run.
SsgDirectResult ssg_direct(const DCProblem& problem, const SsgDirectPolicy& policy,
                           long long T);

struct SubgradientResult {
  DecisionVector last;
  std::vector<double> objective_values;
  long long oracle_count = 0;
  double wall_time = 0.0;
};

// Projected subgradient descent with a constant step; returns the last iterate.
SubgradientResult subgradient_descent(const DCFn& objective,
                                      const FeasibleDomain& domain,
                                      const DecisionVector& v0, double step_size,
                                      long long steps);

void write_trace_csv(const std::string& path, const SolveTrace& trace);

// Monotonic seconds; frozen to 0 when DCFAIR_FIXED_CLOCK is set so that
// output files can be compared byte-for-byte.
double now_seconds();

}  // namespace dcfair
