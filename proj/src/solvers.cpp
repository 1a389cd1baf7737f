#include "dcfair/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "dcfair/prng.hpp"

namespace dcfair {

namespace {

constexpr double kPreSlack = 1e-10;

void check_finite(const Vec& v, const char* where) {
  for (double e : v) {
    if (!std::isfinite(e)) throw SolverError(std::string("NaN/Inf in ") + where);
  }
}

void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw SolverError(std::string("NaN/Inf in ") + where);
}

}  // namespace

double now_seconds() {
  if (std::getenv("DCFAIR_FIXED_CLOCK") != nullptr) return 0.0;
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

SsgResult ssg(const ConvexFn& objective, const std::vector<ConvexFn>& constraints,
              const FeasibleDomain& domain, const Vec& v0, const SsgConfig& config) {
  if (!(config.epsilon > 0.0)) throw SolverError("ssg requires epsilon > 0");
  if (config.T < 1) throw SolverError("ssg requires T >= 1");
  check_finite(v0, "ssg start");

  SsgResult res;
  res.oracle_count = 0;

  Vec v = v0;
  const std::size_t m = constraints.size();
  {
    double g0max = -std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) g0max = std::max(g0max, c.eval(v));
    res.oracle_count += static_cast<long long>(m);
    if (m > 0 && !(g0max <= config.epsilon + kPreSlack)) {
      throw SolverError("ssg precondition violated: max constraint at start is " +
                        std::to_string(g0max) + " > epsilon " +
                        std::to_string(config.epsilon));
    }
  }

  bool have_best = false;
  for (long long t = 0; t < config.T; ++t) {
    double gval = -std::numeric_limits<double>::infinity();
    int argmax = -1;
    for (std::size_t i = 0; i < m; ++i) {
      const double val = constraints[i].eval(v);
      if (val > gval) {
        gval = val;
        argmax = static_cast<int>(i);
      }
    }
    res.oracle_count += static_cast<long long>(m);
    check_finite(m ? gval : 0.0, "ssg constraint value");

    if (m == 0 || gval <= config.epsilon) {
      const double fval = objective.eval(v);
      ++res.oracle_count;
      check_finite(fval, "ssg objective value");
      if (!have_best || fval < res.best_objective) {
        res.best_objective = fval;
        res.v_best = v;
        have_best = true;
      }
      ++res.t_set_size;

      Vec g0 = objective.subgrad(v);
      ++res.oracle_count;
      const double g0sq = sqnorm(g0);
      if (g0sq == 0.0) {
        // v minimizes the objective; nothing further to do
        res.zero_subgrad_stop = true;
        return res;
      }
      axpy(v, -config.epsilon / g0sq, g0);
      v = domain.project(v);
    } else {
      Vec g = constraints[argmax].subgrad(v);
      ++res.oracle_count;
      const double gsq = sqnorm(g);
      if (gsq == 0.0) {
        throw SolverError("ssg: zero subgradient on an infeasible constraint");
      }
      axpy(v, -gval / gsq, g);
      v = domain.project(v);
    }
    check_finite(v, "ssg iterate");
  }

  if (!have_best) {
    throw SolverError("ssg finished with an empty nearly-feasible set");
  }
  return res;
}

double IdcaSchedule::eps_at(long long k) const {
  if (eps_k.empty()) throw SolverError("schedule has no eps_k");
  if (eps_k.size() == 1) return eps_k[0];
  return eps_k.at(static_cast<std::size_t>(k));
}

long long IdcaSchedule::T_at(long long k) const {
  if (!T_k.empty()) {
    return T_k.size() == 1 ? T_k[0] : T_k.at(static_cast<std::size_t>(k));
  }
  if (!constants) throw SolverError("theoretical T_k needs M and mu");
  const double M = constants->M, mu = constants->mu;
  const double eps = eps_at(k);
  const double t = (M * M / (eps * mu)) * std::log(4.0 * M * M / (mu * eps));
  if (!(t < 9e18)) throw SolverError("theoretical T_k overflows");
  return static_cast<long long>(std::ceil(t));
}

IdcaSchedule IdcaSchedule::practical(long long K, double eps, long long T) {
  if (K < 0 || eps <= 0.0 || T < 1) throw SolverError("bad practical schedule");
  IdcaSchedule s;
  s.K = K;
  s.eps_k = {eps};
  s.T_k = {T};
  return s;
}

IdcaSchedule theoretical_schedule(double M, double mu, double nu,
                                  double eps_target, double f0_at_start,
                                  double f_lb) {
  if (!(M > 0.0) || !(mu > 0.0) || !(nu > 0.0) || !(eps_target > 0.0)) {
    throw SolverError("theoretical schedule requires positive M, mu, nu, eps");
  }
  if (f0_at_start < f_lb) throw SolverError("f0 at start below f_lb");

  const double M2 = M * M;
  const double M4 = M2 * M2;
  const double inner_min = std::min({1.0, 1.0 / (4.0 * M2), mu * nu / (8.0 * M4)});
  const double outer_max = std::max({1.0, 4.0 * M2, 8.0 * M4 / (mu * nu)});

  IdcaSchedule s;
  s.eps_k = {(mu / 8.0) * inner_min * eps_target * eps_target};
  const double k_real =
      outer_max * (f0_at_start - f_lb) / (mu * eps_target * eps_target);
  if (!(k_real < 9e18)) throw SolverError("theoretical K overflows");
  s.K = static_cast<long long>(std::ceil(k_real));
  TheoreticalConstants c;
  c.M = M;
  c.mu = mu;
  c.nu = nu;
  c.f_lb = f_lb;
  c.Lambda = 2.0 * M / std::sqrt(2.0 * mu * nu);
  s.constants = c;
  return s;
}

namespace {

void record_trace(SolveTrace& trace, const DCProblem& problem,
                  const DecisionVector& w, long long oracles, double t0) {
  trace.iterates.push_back(w);
  trace.objective_values.push_back(problem.objective.value(w.packed));
  trace.max_infeasibility.push_back(
      problem.constraints.empty()
          ? 0.0
          : max_dc_value(problem.constraints, w.packed));
  trace.oracle_counts.push_back(oracles);
  trace.seconds.push_back(now_seconds() - t0);
}

void check_majorization_at(const DCProblem& problem,
                           const std::vector<ConvexFn>& lin_constraints,
                           const ConvexFn& lin_objective, const Vec& anchor,
                           Rng64& rng) {
  Vec v(anchor.size());
  for (int trial = 0; trial < 100; ++trial) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = anchor[i] + rng.next_gaussian();
    }
    const double tol = 1e-9;
    const double f0 = problem.objective.value(v);
    if (lin_objective.eval(v) < f0 - tol * std::max(1.0, std::abs(f0))) {
      throw SolverError("majorization violated on the objective");
    }
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
      const double fi = problem.constraints[i].value(v);
      if (lin_constraints[i].eval(v) < fi - tol * std::max(1.0, std::abs(fi))) {
        throw SolverError("majorization violated on constraint " + std::to_string(i));
      }
    }
  }
}

}  // namespace

IdcaResult idca(const DCProblem& problem, const IdcaSchedule& schedule,
                const IdcaOptions& options) {
  const double t0 = now_seconds();
  IdcaResult res;
  Rng64 check_rng(options.check_seed);

  DecisionVector w = problem.start;
  long long oracles = 0;
  record_trace(res.trace, problem, w, oracles, t0);

  for (long long k = 0; k < schedule.K; ++k) {
    const double eps_k = schedule.eps_at(k);
    const long long T_k = schedule.T_at(k);

    ConvexFn g0 = linearize_minus(problem.objective, w.packed);
    std::vector<ConvexFn> gi;
    gi.reserve(problem.constraints.size());
    for (const auto& c : problem.constraints) {
      gi.push_back(linearize_minus(c, w.packed));
    }
    if (options.check_majorization) {
      check_majorization_at(problem, gi, g0, w.packed, check_rng);
    }

    SsgResult inner;
    try {
      inner = ssg(g0, gi, problem.domain, w.packed, SsgConfig{eps_k, T_k});
    } catch (const SolverError& e) {
      throw SolverError("idca outer iteration " + std::to_string(k) + ": " +
                        e.what());
    }
    oracles += inner.oracle_count;

    const Vec& next = inner.v_best;
    const double step_norm = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double dlt = next[i] - w.packed[i];
        s += dlt * dlt;
      }
      return std::sqrt(s);
    }();

    w.packed = next;
    res.inner_eps.push_back(eps_k);
    res.inner_g_end.push_back(gi.empty() ? 0.0 : max_value(gi, w.packed));
    record_trace(res.trace, problem, w, oracles, t0);

    if (step_norm <= options.early_stop) {
      res.stopped_early = true;
      break;
    }
  }

  res.trace.oracle_count = oracles;
  res.trace.wall_time = now_seconds() - t0;
  res.final = w;

  // report the best-objective outer iterate among the nearly feasible ones
  for (std::size_t i = 0; i < res.trace.iterates.size(); ++i) {
    if (res.trace.max_infeasibility[i] <= options.eps_feas) {
      if (res.best_index < 0 ||
          res.trace.objective_values[i] <
              res.trace.objective_values[static_cast<std::size_t>(res.best_index)]) {
        res.best_index = static_cast<long long>(i);
      }
    }
  }
  res.feasible_found = res.best_index >= 0;
  res.reported = res.feasible_found
                     ? res.trace.iterates[static_cast<std::size_t>(res.best_index)]
                     : res.final;
  return res;
}

SsgDirectResult ssg_direct(const DCProblem& problem, const SsgDirectPolicy& policy,
                           long long T) {
  if (T < 1) throw SolverError("ssg_direct requires T >= 1");
  const double t0 = now_seconds();

  SsgDirectResult res;
  DecisionVector w = problem.start;
  long long oracles = 0;

  bool have_best = false;
  double best_obj = 0.0;
  Vec best = w.packed;
  double best_infeas = 0.0;
  const long long stride = std::max<long long>(1, T / 512);

  for (long long t = 0; t < T; ++t) {
    if (t % stride == 0) record_trace(res.trace, problem, w, oracles, t0);
    const double eps_t = policy.eps_at(t);
    double fval = -std::numeric_limits<double>::infinity();
    int argmax = -1;
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
      const double v = problem.constraints[i].value(w.packed);
      if (v > fval) {
        fval = v;
        argmax = static_cast<int>(i);
      }
    }
    oracles += 2 * static_cast<long long>(problem.constraints.size());
    if (problem.constraints.empty()) fval = -std::numeric_limits<double>::infinity();

    if (fval <= eps_t) {
      const double obj = problem.objective.value(w.packed);
      oracles += 2;
      check_finite(obj, "ssg_direct objective");
      if (!have_best || obj < best_obj) {
        best_obj = obj;
        best = w.packed;
        best_infeas = problem.constraints.empty() ? 0.0 : fval;
        have_best = true;
      }
      ++res.t_set_size;
      Vec g = problem.objective.subgrad(w.packed);
      oracles += 2;
      const double gsq = sqnorm(g);
      if (gsq == 0.0) break;  // objective cannot improve
      axpy(w.packed, -eps_t / gsq, g);
    } else {
      Vec g = problem.constraints[argmax].subgrad(w.packed);
      oracles += 2;
      const double gsq = sqnorm(g);
      if (gsq == 0.0) {
        throw SolverError("ssg_direct: zero subgradient on infeasible constraint");
      }
      axpy(w.packed, -fval / gsq, g);
    }
    w.packed = problem.domain.project(w.packed);
    check_finite(w.packed, "ssg_direct iterate");
  }

  if (!have_best) {
    throw NoNearlyFeasibleError(
        "ssg_direct: no nearly-feasible iterate was found (heuristic gives no "
        "guarantee)");
  }
  res.best = w;
  res.best.packed = best;
  res.best_objective = best_obj;
  res.infeas_at_best = best_infeas;
  res.oracle_count = oracles;
  record_trace(res.trace, problem, res.best, oracles, t0);
  res.trace.oracle_count = oracles;
  res.trace.wall_time = now_seconds() - t0;
  return res;
}

SubgradientResult subgradient_descent(const DCFn& objective,
                                      const FeasibleDomain& domain,
                                      const DecisionVector& v0, double step_size,
                                      long long steps) {
  if (!(step_size > 0.0)) throw SolverError("step size must be positive");
  if (steps < 0) throw SolverError("steps must be nonnegative");
  const double t0 = now_seconds();

  SubgradientResult res;
  res.last = v0;
  for (long long t = 0; t < steps; ++t) {
    const double val = objective.value(res.last.packed);
    res.oracle_count += 2;
    check_finite(val, "subgradient objective");
    res.objective_values.push_back(val);
    Vec g = objective.subgrad(res.last.packed);
    res.oracle_count += 2;
    axpy(res.last.packed, -step_size, g);
    res.last.packed = domain.project(res.last.packed);
    check_finite(res.last.packed, "subgradient iterate");
  }
  res.wall_time = now_seconds() - t0;
  return res;
}

void write_trace_csv(const std::string& path, const SolveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot write trace file: " + path);
  out << "outer_k,objective,max_infeas,oracle_count,seconds\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    out << i << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", trace.objective_values[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", trace.max_infeasibility[i]);
    out << buf << ',' << trace.oracle_counts[i] << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", trace.seconds[i]);
    out << buf << '\n';
  }
}

}  // namespace dcfair
