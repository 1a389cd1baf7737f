#include "dcfair/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dcfair {

namespace {

using nlohmann::json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("DCFAIR_LOG");
    if (!env) return 1;
    const std::string name(env);
    if (name == "error") return 0;
    if (name == "debug") return 2;
    return 1;
  }();
  return level;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + s + "' for key " + key);
  }
}

long long to_ll(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer '" + s + "' for key " + key);
  }
}

std::vector<double> to_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(to_double(trim(tok), key));
  return out;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("cannot parse boolean '" + s + "' for key " + key);
}

std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void log_error(const std::string& msg) { std::cerr << "[error] " << msg << "\n"; }

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[debug] " << msg << "\n";
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "data") data_path = value;
  else if (key == "format") format = value;
  else if (key == "label-col") label_col = value;
  else if (key == "group-col") group_col = value;
  else if (key == "group-file") group_file = value;
  else if (key == "feature-cols") {
    feature_cols.clear();
    for (const auto& t : split_list(value)) {
      if (!trim(t).empty()) feature_cols.push_back(trim(t));
    }
  } else if (key == "split") {
    const auto fr = to_double_list(value, key);
    if (fr.size() != 3) throw ConfigError("split needs three fractions");
    train_frac = fr[0];
    val_frac = fr[1];
    test_frac = fr[2];
  } else if (key == "family") family = value;
  else if (key == "surrogate") surrogate = value;
  else if (key == "loss") loss = value;
  else if (key == "interval") {
    const auto ab = to_double_list(value, key);
    if (ab.size() != 2) throw ConfigError("interval needs two numbers");
    alpha = ab[0];
    beta = ab[1];
  } else if (key == "theta-hat") theta_hat = to_double(value, key);
  else if (key == "kappa") kappa = to_double(value, key);
  else if (key == "kappa-list") kappa_list = to_double_list(value, key);
  else if (key == "lambda") lambda = to_double(value, key);
  else if (key == "lambda-list") lambda_list = to_double_list(value, key);
  else if (key == "rho") rho = to_double(value, key);
  else if (key == "pgrid") pgrid_count = static_cast<int>(to_ll(value, key));
  else if (key == "solver") solver = value;
  else if (key == "outer") outer = to_ll(value, key);
  else if (key == "inner") inner = to_ll(value, key);
  else if (key == "eps") eps = to_double(value, key);
  else if (key == "eps-policy") eps_policy = value;
  else if (key == "eps-c") eps_c = to_double(value, key);
  else if (key == "step-size") step_size = to_double(value, key);
  else if (key == "schedule") schedule = value;
  else if (key == "nu") nu = to_double(value, key);
  else if (key == "f-lb") f_lb = to_double(value, key);
  else if (key == "seed") seed = static_cast<std::uint64_t>(to_ll(value, key));
  else if (key == "seeds") {
    seeds.clear();
    for (const auto& t : split_list(value)) {
      seeds.push_back(static_cast<std::uint64_t>(to_ll(trim(t), key)));
    }
  } else if (key == "jobs") jobs = static_cast<int>(to_ll(value, key));
  else if (key == "out") out_dir = value;
  else if (key == "tune") tune = to_bool(value, key);
  else if (key == "width") width = to_double(value, key);
  else if (key == "grid-step") grid_step = to_double(value, key);
  else throw ConfigError("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value at " + path + ":" +
                        std::to_string(line_no));
    }
    try {
      base.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (at " + path + ":" +
                        std::to_string(line_no) + ")");
    }
  }
  return base;
}

namespace {

bool is_regularized(const std::string& family) {
  return family == "regularized-pdp" || family == "regularized-wpdp";
}

bool is_constrained(const std::string& family) {
  return family == "pdp" || family == "wpdp" || family == "group-auc" ||
         family == "inter-group" || family == "intra-group";
}

}  // namespace

void RunConfig::validate(const std::string& subcommand) const {
  if (data_path.empty()) throw ConfigError("missing required key: data");
  try {
    SplitSpec{train_frac, val_frac, test_frac, seed}.validate();
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  try {
    family_from_string(family);
    loss_from_string(loss);
    surrogate_from_string(surrogate);
    Interval iv(alpha, beta);
    (void)iv;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (solver != "idca" && solver != "ssg-direct" && solver != "subgradient") {
    throw ConfigError("unknown solver: " + solver);
  }
  if (eps_policy != "static" && eps_policy != "diminishing") {
    throw ConfigError("eps-policy must be static or diminishing");
  }
  if (schedule != "practical" && schedule != "theoretical") {
    throw ConfigError("schedule must be practical or theoretical");
  }
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (inner < 1) throw ConfigError("inner (T) must be >= 1");
  if (outer < 0) throw ConfigError("outer (K) must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (rho < 0.0) throw ConfigError("rho must be nonnegative");
  if (pgrid_count < 1) throw ConfigError("pgrid must be >= 1");
  if (!(step_size > 0.0)) throw ConfigError("step-size must be positive");

  if (is_regularized(family)) {
    if (kappa || !kappa_list.empty()) {
      throw ConfigError("kappa only applies to constrained families; use lambda");
    }
    if (solver != "subgradient") {
      throw ConfigError("regularized families are solved with solver=subgradient");
    }
  } else {
    if (lambda || !lambda_list.empty()) {
      throw ConfigError("lambda only applies to regularized families");
    }
  }
  if (family == "unconstrained") {
    if (kappa || !kappa_list.empty()) {
      throw ConfigError("kappa does not apply to the unconstrained family");
    }
  }
  if (solver == "subgradient" && is_constrained(family)) {
    throw ConfigError("solver=subgradient cannot enforce " + family +
                      " constraints; use idca or ssg-direct");
  }

  if (subcommand == "train") {
    if (is_constrained(family) && !kappa) {
      throw ConfigError("train with family=" + family + " needs kappa");
    }
    if (is_regularized(family) && !lambda &&
        lambda_list.size() != 1) {
      throw ConfigError("train with family=" + family + " needs lambda");
    }
  } else if (subcommand == "sweep") {
    if (family == "unconstrained") {
      throw ConfigError("sweep needs a constrained or regularized family");
    }
    if (is_constrained(family) && kappa_list.empty()) {
      throw ConfigError("sweep needs kappa-list");
    }
    if (is_regularized(family) && lambda_list.empty()) {
      throw ConfigError("sweep needs lambda-list");
    }
  }
  if ((family == "pdp" || family == "wpdp")) {
    for (double k : kappa_list) {
      if (k < 0.0 || k > 1.0) throw ConfigError("kappa must lie in [0,1]");
    }
    if (kappa && (*kappa < 0.0 || *kappa > 1.0)) {
      throw ConfigError("kappa must lie in [0,1]");
    }
  }
}

std::string RunConfig::to_json() const {
  json j;
  j["data"] = data_path;
  j["format"] = format;
  j["label_col"] = label_col;
  j["group_col"] = group_col;
  j["group_file"] = group_file;
  j["feature_cols"] = feature_cols;
  j["split"] = {train_frac, val_frac, test_frac};
  j["family"] = family;
  j["surrogate"] = surrogate;
  j["loss"] = loss;
  j["interval"] = {alpha, beta};
  j["theta_hat"] = theta_hat;
  if (kappa) j["kappa"] = *kappa;
  if (!kappa_list.empty()) j["kappa_list"] = kappa_list;
  if (lambda) j["lambda"] = *lambda;
  if (!lambda_list.empty()) j["lambda_list"] = lambda_list;
  j["rho"] = rho;
  j["pgrid"] = pgrid_count;
  j["solver"] = solver;
  j["outer"] = outer;
  j["inner"] = inner;
  j["eps"] = eps;
  j["eps_policy"] = eps_policy;
  j["eps_c"] = eps_c;
  j["step_size"] = step_size;
  j["schedule"] = schedule;
  j["nu"] = nu;
  j["f_lb"] = f_lb;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["jobs"] = jobs;
  j["out"] = out_dir;
  j["tune"] = tune;
  j["width"] = width;
  j["grid_step"] = grid_step;
  return j.dump();
}

Dataset load_data(const RunConfig& cfg) {
  std::string fmt = cfg.format;
  if (fmt.empty()) {
    fmt = cfg.data_path.size() > 4 &&
                  cfg.data_path.substr(cfg.data_path.size() - 4) == ".csv"
              ? "csv"
              : "libsvm";
  }
  if (fmt == "csv") {
    if (cfg.label_col.empty() || cfg.group_col.empty()) {
      throw ConfigError("csv data needs label-col and group-col");
    }
    return load_csv(cfg.data_path,
                    CsvSchema{cfg.label_col, cfg.group_col, cfg.feature_cols});
  }
  if (fmt != "libsvm") throw ConfigError("unknown data format: " + fmt);
  if (!cfg.group_file.empty()) {
    return load_libsvm(cfg.data_path, GroupSource(cfg.group_file));
  }
  if (!cfg.group_col.empty()) {
    return load_libsvm(cfg.data_path,
                       GroupSource(static_cast<int>(to_ll(cfg.group_col, "group-col"))));
  }
  throw ConfigError("libsvm data needs group-col (feature index) or group-file");
}

namespace {

struct SolveSummary {
  DecisionVector solution;
  double objective = 0.0;
  double max_infeas = 0.0;
  long long oracle_count = 0;
  double seconds = 0.0;
  bool feasible_found = true;
  SolveTrace trace;
  json tuned;
};

double val_accuracy(const DecisionVector& v, const PackedLayout& layout,
                    int d, const Dataset& val, double theta_hat) {
  LinearCrossModel m(d, Vec(v.packed.begin(), v.packed.begin() + layout.model_len));
  return accuracy(m, val, theta_hat);
}

SolveSummary solve_idca(const RunConfig& cfg, const DCProblem& problem,
                        const Dataset& val, int d) {
  long long T = cfg.inner;
  double eps = cfg.eps;
  long long K = cfg.outer;
  json tuned;

  if (cfg.tune) {
    // pick (T, eps) by validation accuracy after 50 outer iterations,
    // skipping candidates whose final iterate is not nearly feasible;
    // ties resolve toward smaller eps then smaller T
    double best_acc = -1.0;
    bool found = false;
    for (double eps_c : {5e-4, 1e-3, 2e-3, 5e-3}) {
      for (long long T_c : {150LL, 200LL}) {
        IdcaResult r = idca(problem, IdcaSchedule::practical(50, eps_c, T_c));
        const double infeas = r.trace.max_infeasibility.back();
        if (infeas > eps_c + 1e-9) continue;
        const double acc =
            val_accuracy(r.final, problem.layout, d, val, cfg.theta_hat);
        if (acc > best_acc) {
          best_acc = acc;
          T = T_c;
          eps = eps_c;
          found = true;
        }
      }
    }
    if (!found) {
      log_info("tune: every (T,eps) candidate ended infeasible; keeping configured values");
    }
    tuned["T"] = T;
    tuned["eps"] = eps;
    tuned["grid_feasible"] = found;
  }

  const std::vector<long long> k_grid = {100, 150, 200, 250, 300, 350, 400};
  const long long K_run = cfg.tune ? k_grid.back() : K;

  IdcaSchedule sched;
  if (cfg.schedule == "theoretical") {
    double M = 0.0;
    M = std::max(M, estimate_lipschitz(problem.objective.plus, problem.start.packed));
    M = std::max(M, estimate_lipschitz(problem.objective.minus, problem.start.packed));
    for (const auto& c : problem.constraints) {
      M = std::max(M, estimate_lipschitz(c.plus, problem.start.packed));
      M = std::max(M, estimate_lipschitz(c.minus, problem.start.packed));
    }
    const double f0 = problem.objective.value(problem.start.packed);
    sched = theoretical_schedule(M, std::max(cfg.rho, 1e-12), cfg.nu, cfg.eps, f0,
                                 cfg.f_lb);
    tuned["theoretical_M"] = M;
    tuned["theoretical_eps_k"] = sched.eps_k[0];
    tuned["theoretical_K"] = sched.K;
    // cap at the configured budget; eps_k keeps the schedule's value
    sched.K = std::min(sched.K, K_run);
    sched.T_k = {T};
  } else {
    sched = IdcaSchedule::practical(K_run, eps, T);
  }

  IdcaResult res = idca(problem, sched);

  long long chosen_k = static_cast<long long>(res.trace.iterates.size()) - 1;
  if (cfg.tune) {
    double best_acc = -1.0;
    for (long long kc : k_grid) {
      const long long idx =
          std::min<long long>(kc, static_cast<long long>(res.trace.iterates.size()) - 1);
      const double acc = val_accuracy(res.trace.iterates[static_cast<std::size_t>(idx)],
                                      problem.layout, d, val, cfg.theta_hat);
      if (acc > best_acc) {
        best_acc = acc;
        chosen_k = idx;
      }
    }
    tuned["K"] = chosen_k;
  }

  // best-objective nearly feasible outer iterate up to chosen_k; the
  // selection tolerance follows the inner tolerance (iterates hug the
  // boundary at that resolution once a fairness constraint binds)
  const double eps_feas = std::max(1e-6, sched.eps_k[0]);
  long long best = -1;
  for (long long i = 0; i <= chosen_k; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (res.trace.max_infeasibility[ui] <= eps_feas) {
      if (best < 0 || res.trace.objective_values[ui] <
                          res.trace.objective_values[static_cast<std::size_t>(best)]) {
        best = i;
      }
    }
  }
  SolveSummary out;
  out.feasible_found = best >= 0;
  const long long pick = best >= 0 ? best : chosen_k;
  const auto upick = static_cast<std::size_t>(pick);
  out.solution = res.trace.iterates[upick];
  out.objective = res.trace.objective_values[upick];
  out.max_infeas = res.trace.max_infeasibility[upick];
  out.oracle_count = res.trace.oracle_count;
  out.seconds = res.trace.wall_time;
  out.trace = std::move(res.trace);
  out.tuned = std::move(tuned);
  return out;
}

SolveSummary solve_ssg_direct(const RunConfig& cfg, const DCProblem& problem,
                              const Dataset& val, int d) {
  SsgDirectPolicy policy;
  policy.kind = cfg.eps_policy == "static" ? SsgDirectPolicy::Kind::Static
                                           : SsgDirectPolicy::Kind::Diminishing;
  policy.epsilon = cfg.eps;
  policy.c = cfg.eps_c;
  json tuned;

  if (cfg.tune) {
    // candidate eps_t settings per the tuning recipe: static values and
    // diminishing constants; best = smallest objective after 10^4 iterations
    double best_obj = std::numeric_limits<double>::infinity();
    for (double e : {1e-4, 2e-4, 5e-4, 1e-3}) {
      SsgDirectPolicy c{SsgDirectPolicy::Kind::Static, e, 1.0};
      try {
        const auto r = ssg_direct(problem, c, 10000);
        if (r.best_objective < best_obj) {
          best_obj = r.best_objective;
          policy = c;
        }
      } catch (const NoNearlyFeasibleError&) {
      }
    }
    for (double cval : {0.2, 0.5, 1.0, 2.0}) {
      SsgDirectPolicy c{SsgDirectPolicy::Kind::Diminishing, cfg.eps, cval};
      try {
        const auto r = ssg_direct(problem, c, 10000);
        if (r.best_objective < best_obj) {
          best_obj = r.best_objective;
          policy = c;
        }
      } catch (const NoNearlyFeasibleError&) {
      }
    }
    tuned["policy"] = policy.kind == SsgDirectPolicy::Kind::Static ? "static" : "diminishing";
    tuned["eps"] = policy.epsilon;
    tuned["c"] = policy.c;
  }
  (void)val;
  (void)d;

  const auto res = ssg_direct(problem, policy, cfg.inner);
  SolveSummary out;
  out.solution = res.best;
  out.objective = res.best_objective;
  out.max_infeas = res.infeas_at_best;
  out.oracle_count = res.oracle_count;
  out.seconds = res.trace.wall_time;
  out.feasible_found = true;
  out.trace = res.trace;
  out.tuned = std::move(tuned);
  return out;
}

SolveSummary solve_subgradient(const RunConfig& cfg, const DCProblem& problem,
                               const Dataset& val, int d) {
  double step = cfg.step_size;
  json tuned;
  if (cfg.tune) {
    double best_acc = -1.0;
    for (double s : {5e-4, 1e-3, 2e-3, 5e-3}) {
      const auto r =
          subgradient_descent(problem.objective, problem.domain, problem.start, s, 10000);
      const double acc = val_accuracy(r.last, problem.layout, d, val, cfg.theta_hat);
      if (acc > best_acc) {
        best_acc = acc;
        step = s;
      }
    }
    tuned["step_size"] = step;
  }
  const long long steps = cfg.inner * std::max<long long>(cfg.outer, 1);
  const auto res =
      subgradient_descent(problem.objective, problem.domain, problem.start, step, steps);
  SolveSummary out;
  out.solution = res.last;
  out.objective = problem.objective.value(res.last.packed);
  out.max_infeas = 0.0;
  out.oracle_count = res.oracle_count;
  out.seconds = res.wall_time;
  out.feasible_found = true;
  out.tuned = std::move(tuned);

  out.trace.iterates.push_back(res.last);
  out.trace.objective_values.push_back(out.objective);
  out.trace.max_infeasibility.push_back(0.0);
  out.trace.oracle_counts.push_back(res.oracle_count);
  out.trace.seconds.push_back(res.wall_time);
  out.trace.oracle_count = res.oracle_count;
  out.trace.wall_time = res.wall_time;
  return out;
}

BuildSpec make_build_spec(const RunConfig& cfg, const std::string& family,
                          double param) {
  BuildSpec bs;
  bs.family = family_from_string(family);
  bs.surrogate = surrogate_from_string(cfg.surrogate);
  bs.loss = loss_from_string(cfg.loss);
  bs.interval = Interval(cfg.alpha, cfg.beta);
  bs.theta_hat = cfg.theta_hat;
  bs.rho = cfg.rho;
  bs.pgrid_count = cfg.pgrid_count;
  if (is_regularized(family)) {
    bs.lambda = param;
  } else if (family != "unconstrained") {
    bs.kappa = param;
  }
  return bs;
}

}  // namespace

TrainOutcome run_single_train(const RunConfig& cfg, const Dataset& full,
                              std::uint64_t seed,
                              std::optional<double> param_override,
                              std::optional<std::string> family_override) {
  TrainOutcome out;
  out.seed = seed;
  try {
    const std::string family = family_override.value_or(cfg.family);
    double param = 0.0;
    if (param_override) {
      param = *param_override;
    } else if (is_regularized(family)) {
      param = cfg.lambda ? *cfg.lambda
                         : (cfg.lambda_list.size() == 1 ? cfg.lambda_list[0] : 0.0);
    } else if (family != "unconstrained") {
      param = cfg.kappa.value_or(0.0);
    }
    out.param = param;

    SplitSpec spec{cfg.train_frac, cfg.val_frac, cfg.test_frac, seed};
    SplitResult parts = split(full, spec);

    auto train = std::make_shared<Dataset>(std::move(parts.train));
    DCProblem problem = build_problem(train, make_build_spec(cfg, family, param));
    out.meta = problem.meta;

    SolveSummary sol;
    if (family == "unconstrained" && cfg.solver == "subgradient") {
      sol = solve_subgradient(cfg, problem, parts.val, full.d());
    } else if (is_regularized(family)) {
      sol = solve_subgradient(cfg, problem, parts.val, full.d());
    } else if (cfg.solver == "ssg-direct") {
      sol = solve_ssg_direct(cfg, problem, parts.val, full.d());
    } else {
      sol = solve_idca(cfg, problem, parts.val, full.d());
    }

    out.solution = sol.solution;
    out.objective = sol.objective;
    out.max_infeas = sol.max_infeas;
    out.oracle_count = sol.oracle_count;
    out.seconds = sol.seconds;
    out.feasible_found = sol.feasible_found;
    out.trace = std::move(sol.trace);
    out.tuned_json = sol.tuned.empty() ? "" : sol.tuned.dump();

    LinearCrossModel model(
        full.d(), Vec(sol.solution.packed.begin(),
                      sol.solution.packed.begin() + problem.layout.model_len));
    const Interval iv(cfg.alpha, cfg.beta);
    const FairnessReport test_rep =
        fairness_report(model, parts.test, iv, cfg.theta_hat);
    out.accuracy = test_rep.accuracy;
    out.metrics = test_rep.max;
    out.test_report_json = test_rep.to_json();
    out.train_report_json =
        fairness_report(model, *train, iv, cfg.theta_hat).to_json();
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

namespace {

json outcome_report(const RunConfig& cfg, const Dataset& full,
                    const TrainOutcome& r) {
  json rep;
  rep["config"] = json::parse(cfg.to_json());
  rep["data"] = {{"n", full.n()}, {"d", full.d()}, {"groups", full.num_groups()}};
  rep["problem"] = json::parse(meta_to_json(r.meta));
  json solve;
  solve["solver"] = cfg.solver;
  solve["seed"] = r.seed;
  solve["param"] = r.param;
  solve["objective"] = r.objective;
  solve["max_infeas"] = r.max_infeas;
  solve["oracle_count"] = r.oracle_count;
  solve["seconds"] = r.seconds;
  solve["feasible_found"] = r.feasible_found;
  if (!r.tuned_json.empty()) solve["tuned"] = json::parse(r.tuned_json);
  rep["solve"] = solve;
  rep["metrics"] = json::parse(r.test_report_json);
  rep["train_metrics"] = json::parse(r.train_report_json);
  return rep;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  cfg.validate("train");
  const Dataset full = load_data(cfg);
  double param = 0.0;
  if (is_regularized(cfg.family)) {
    param = cfg.lambda ? *cfg.lambda : cfg.lambda_list.at(0);
  } else if (cfg.family != "unconstrained") {
    param = *cfg.kappa;
  }
  TrainOutcome r = run_single_train(cfg, full, cfg.seed, param);
  if (!r.ok) throw std::runtime_error(r.error);

  std::filesystem::create_directories(cfg.out_dir);
  const auto dir = std::filesystem::path(cfg.out_dir);
  const json rep = outcome_report(cfg, full, r);
  write_text((dir / "report.json").string(), rep.dump(2) + "\n");
  save_model_json((dir / "model.json").string(), full.d(), r.solution);
  write_trace_csv((dir / "trace.csv").string(), r.trace);
  log_info("train: wrote report.json, model.json, trace.csv to " + cfg.out_dir);
  std::cout << rep.dump(2) << std::endl;
  return 0;
}

namespace {

struct SweepTask {
  double param = 0.0;
  std::uint64_t seed = 0;
  bool anchor = false;
};

struct Aggregate {
  double mean_acc = 0, ci_acc = 0;
  PairMetrics mean, ci;
  double mean_obj = 0, mean_infeas = 0, mean_oracles = 0, mean_seconds = 0;
  int n_ok = 0;
};

Aggregate aggregate_rows(const std::vector<const TrainOutcome*>& rows) {
  Aggregate a;
  std::vector<double> accs, dps, wdps, pdps, wpdps;
  for (const auto* r : rows) {
    if (!r->ok) continue;
    ++a.n_ok;
    accs.push_back(r->accuracy);
    dps.push_back(r->metrics.dp);
    wdps.push_back(r->metrics.wdp);
    pdps.push_back(r->metrics.pdp);
    wpdps.push_back(r->metrics.wpdp);
    a.mean_obj += r->objective;
    a.mean_infeas += r->max_infeas;
    a.mean_oracles += static_cast<double>(r->oracle_count);
    a.mean_seconds += r->seconds;
  }
  if (a.n_ok == 0) return a;
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  // 95% normal-approximation half-width; 0 with a single seed
  auto ci_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / (v.size() - 1));
    return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
  };
  a.mean_acc = mean_of(accs);
  a.ci_acc = ci_of(accs);
  a.mean.dp = mean_of(dps);
  a.ci.dp = ci_of(dps);
  a.mean.wdp = mean_of(wdps);
  a.ci.wdp = ci_of(wdps);
  a.mean.pdp = mean_of(pdps);
  a.ci.pdp = ci_of(pdps);
  a.mean.wpdp = mean_of(wpdps);
  a.ci.wpdp = ci_of(wpdps);
  a.mean_obj /= a.n_ok;
  a.mean_infeas /= a.n_ok;
  a.mean_oracles /= a.n_ok;
  a.mean_seconds /= a.n_ok;
  return a;
}

const char* kFrontierHeader =
    "kind,param,seed,status,accuracy,dp,wdp,pdp,wpdp,one_minus_dp,one_minus_wdp,"
    "one_minus_pdp,one_minus_wpdp,objective,max_infeas,oracle_count,seconds,"
    "accuracy_ci,dp_ci,wdp_ci,pdp_ci,wpdp_ci\n";

std::string row_csv(const char* kind, const std::string& param,
                    const std::string& seed, const TrainOutcome& r) {
  std::ostringstream os;
  os << kind << ',' << param << ',' << seed << ',';
  if (!r.ok) {
    std::string msg = r.error;
    for (char& c : msg) {
      if (c == ',' || c == '\n') c = ';';
    }
    os << "error: " << msg << std::string(18, ',') << '\n';
    return os.str();
  }
  os << "ok," << fmt10(r.accuracy) << ',' << fmt10(r.metrics.dp) << ','
     << fmt10(r.metrics.wdp) << ',' << fmt10(r.metrics.pdp) << ','
     << fmt10(r.metrics.wpdp) << ',' << fmt10(1.0 - r.metrics.dp) << ','
     << fmt10(1.0 - r.metrics.wdp) << ',' << fmt10(1.0 - r.metrics.pdp) << ','
     << fmt10(1.0 - r.metrics.wpdp) << ',' << fmt10(r.objective) << ','
     << fmt10(r.max_infeas) << ',' << r.oracle_count << ',' << fmt10(r.seconds)
     << ",,,,,\n";
  return os.str();
}

std::string aggregate_csv(const char* kind, const std::string& param,
                          const Aggregate& a) {
  std::ostringstream os;
  os << kind << ',' << param << ",,";
  if (a.n_ok == 0) {
    os << "error: no successful rows" << std::string(18, ',') << '\n';
    return os.str();
  }
  os << "ok," << fmt10(a.mean_acc) << ',' << fmt10(a.mean.dp) << ','
     << fmt10(a.mean.wdp) << ',' << fmt10(a.mean.pdp) << ',' << fmt10(a.mean.wpdp)
     << ',' << fmt10(1.0 - a.mean.dp) << ',' << fmt10(1.0 - a.mean.wdp) << ','
     << fmt10(1.0 - a.mean.pdp) << ',' << fmt10(1.0 - a.mean.wpdp) << ','
     << fmt10(a.mean_obj) << ',' << fmt10(a.mean_infeas) << ','
     << fmt10(a.mean_oracles) << ',' << fmt10(a.mean_seconds) << ','
     << fmt10(a.ci_acc) << ',' << fmt10(a.ci.dp) << ',' << fmt10(a.ci.wdp) << ','
     << fmt10(a.ci.pdp) << ',' << fmt10(a.ci.wpdp) << '\n';
  return os.str();
}

json outcome_row_json(const TrainOutcome& r, bool anchor) {
  json j;
  j["anchor"] = anchor;
  j["param"] = r.param;
  j["seed"] = r.seed;
  j["ok"] = r.ok;
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["accuracy"] = r.accuracy;
  j["dp"] = r.metrics.dp;
  j["wdp"] = r.metrics.wdp;
  j["pdp"] = r.metrics.pdp;
  j["wpdp"] = r.metrics.wpdp;
  j["objective"] = r.objective;
  j["max_infeas"] = r.max_infeas;
  j["oracle_count"] = r.oracle_count;
  j["seconds"] = r.seconds;
  j["feasible_found"] = r.feasible_found;
  return j;
}

}  // namespace

int cmd_sweep(const RunConfig& cfg) {
  cfg.validate("sweep");
  const Dataset full = load_data(cfg);
  const bool reg = is_regularized(cfg.family);
  const std::vector<double>& params = reg ? cfg.lambda_list : cfg.kappa_list;
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty()) seeds = {cfg.seed};

  std::vector<SweepTask> tasks;
  for (std::uint64_t s : seeds) tasks.push_back({0.0, s, true});
  for (double p : params) {
    for (std::uint64_t s : seeds) tasks.push_back({p, s, false});
  }
  std::vector<TrainOutcome> results(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const SweepTask& t = tasks[i];
      if (t.anchor) {
        results[i] =
            run_single_train(cfg, full, t.seed, 0.0, std::string("unconstrained"));
      } else {
        results[i] = run_single_train(cfg, full, t.seed, t.param);
      }
      log_info("sweep: finished " + std::string(t.anchor ? "anchor" : "param=" +
                std::to_string(t.param)) + " seed=" + std::to_string(t.seed));
    }
  };
  const int n_threads = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // assemble frontier.csv: anchor aggregate, then per-param rows + aggregate
  std::ostringstream csv;
  csv << kFrontierHeader;
  std::vector<const TrainOutcome*> anchor_rows;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].anchor) anchor_rows.push_back(&results[i]);
  }
  csv << aggregate_csv("anchor", "", aggregate_rows(anchor_rows));

  json sweep_json;
  sweep_json["config"] = json::parse(cfg.to_json());
  json rows_json = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rows_json.push_back(outcome_row_json(results[i], tasks[i].anchor));
  }
  sweep_json["rows"] = rows_json;

  for (double p : params) {
    std::vector<const TrainOutcome*> rows;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!tasks[i].anchor && tasks[i].param == p) {
        rows.push_back(&results[i]);
        csv << row_csv("row", fmt10(p), std::to_string(tasks[i].seed), results[i]);
      }
    }
    csv << aggregate_csv("aggregate", fmt10(p), aggregate_rows(rows));
  }

  std::filesystem::create_directories(cfg.out_dir);
  const auto dir = std::filesystem::path(cfg.out_dir);
  write_text((dir / "frontier.csv").string(), csv.str());
  write_text((dir / "sweep.json").string(), sweep_json.dump(2) + "\n");
  log_info("sweep: wrote frontier.csv and sweep.json to " + cfg.out_dir);

  for (const auto& r : results) {
    if (!r.ok) log_error("sweep row failed: " + r.error);
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path) {
  if (model_path.empty()) throw ConfigError("eval needs a model file path");
  cfg.validate("eval");
  const LoadedModel lm = load_model_json(model_path);
  const Dataset data = load_data(cfg);
  if (lm.d != data.d()) {
    throw ModelError("model dimension d=" + std::to_string(lm.d) +
                     " does not match data dimension d=" + std::to_string(data.d()));
  }
  const FairnessReport rep =
      fairness_report(lm.model(), data, Interval(cfg.alpha, cfg.beta), cfg.theta_hat);
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / "eval_report.json";
  write_text(path.string(), rep.to_json() + "\n");
  std::cout << rep.to_json() << std::endl;
  return 0;
}

int cmd_select_interval(const RunConfig& cfg) {
  cfg.validate("select-interval");
  const Dataset full = load_data(cfg);
  SplitSpec spec{cfg.train_frac, cfg.val_frac, cfg.test_frac, cfg.seed};
  SplitResult parts = split(full, spec);

  TrainOutcome r =
      run_single_train(cfg, full, cfg.seed, 0.0, std::string("unconstrained"));
  if (!r.ok) throw std::runtime_error(r.error);
  LinearCrossModel model(
      full.d(), Vec(r.solution.packed.begin(),
                    r.solution.packed.begin() + LinearCrossModel::weight_len(full.d())));

  const IntervalSelection sel = select_interval(parts.train, model, cfg.theta_hat,
                                                cfg.width, cfg.grid_step);
  json j;
  j["interval"] = {sel.chosen.alpha, sel.chosen.beta};
  j["pooled_rate"] = sel.pooled_rate;
  json cands = json::array();
  for (const auto& c : sel.candidates) {
    cands.push_back({{"interval", {c.interval.alpha, c.interval.beta}},
                     {"max_pdp", c.max_pdp}});
  }
  j["candidates"] = cands;
  std::filesystem::create_directories(cfg.out_dir);
  write_text((std::filesystem::path(cfg.out_dir) / "interval.json").string(),
             j.dump(2) + "\n");
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int cmd_split(const RunConfig& cfg) {
  cfg.validate("split");
  const Dataset full = load_data(cfg);
  SplitSpec spec{cfg.train_frac, cfg.val_frac, cfg.test_frac, cfg.seed};
  SplitResult parts = split(full, spec);

  std::filesystem::create_directories(cfg.out_dir);
  const auto dir = std::filesystem::path(cfg.out_dir);
  save_libsvm(parts.train, (dir / "train.libsvm").string(),
              (dir / "train.groups").string());
  save_libsvm(parts.val, (dir / "val.libsvm").string(), (dir / "val.groups").string());
  save_libsvm(parts.test, (dir / "test.libsvm").string(),
              (dir / "test.groups").string());
  json j;
  j["seed"] = cfg.seed;
  j["fracs"] = {cfg.train_frac, cfg.val_frac, cfg.test_frac};
  j["sizes"] = {parts.train.n(), parts.val.n(), parts.test.n()};
  write_text((dir / "split.json").string(), j.dump(2) + "\n");
  std::cout << j.dump(2) << std::endl;
  return 0;
}

}  // namespace dcfair
