#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcfair/dataset.hpp"
#include "dcfair/metrics.hpp"
#include "dcfair/problems.hpp"
#include "dcfair/solvers.hpp"

namespace dcfair {

// Configuration problems exit with code 2; runtime failures with 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // data
  std::string data_path;
  std::string format;  // "libsvm" | "csv"; empty = infer from extension
  std::string label_col;
  std::string group_col;   // csv column name or libsvm 1-based feature index
  std::string group_file;  // libsvm side file
  std::vector<std::string> feature_cols;
  double train_frac = 0.6, val_frac = 0.2, test_frac = 0.2;

  // problem
  std::string family = "unconstrained";
  std::string surrogate = "hinge";
  std::string loss = "logistic";
  double alpha = 0.0, beta = 1.0;
  double theta_hat = 0.0;
  std::optional<double> kappa;
  std::vector<double> kappa_list;
  std::optional<double> lambda;
  std::vector<double> lambda_list;
  double rho = 1e-3;
  int pgrid_count = 10;

  // solver
  std::string solver = "idca";
  long long outer = 100;
  long long inner = 200;
  double eps = 1e-3;
  std::string eps_policy = "static";  // ssg-direct: static | diminishing
  double eps_c = 1.0;
  double step_size = 1e-3;
  std::string schedule = "practical";  // practical | theoretical
  double nu = 1.0;
  double f_lb = 0.0;

  // run
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  std::string out_dir = "out";
  bool tune = false;

  // select-interval
  double width = 0.25;
  double grid_step = 0.05;

  // Applies one key=value pair (config-file key names). Unknown keys throw.
  void apply(const std::string& key, const std::string& value);
  void validate(const std::string& subcommand) const;

  std::string to_json() const;
};

RunConfig load_config_file(const std::string& path, RunConfig base = {});

Dataset load_data(const RunConfig& cfg);

struct TrainOutcome {
  bool ok = false;
  std::string error;
  double param = 0.0;  // kappa or lambda used
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  PairMetrics metrics;  // max over pairs on the test split
  double objective = 0.0;
  double max_infeas = 0.0;
  long long oracle_count = 0;
  double seconds = 0.0;
  bool feasible_found = false;
  DecisionVector solution;
  ProblemMeta meta;
  std::string tuned_json;  // empty when --tune is off
  std::string test_report_json;
  std::string train_report_json;
  SolveTrace trace;
};

// One training run on an already-loaded dataset. `param_override` replaces
// the configured kappa/lambda (used by sweeps).
TrainOutcome run_single_train(const RunConfig& cfg, const Dataset& full,
                              std::uint64_t seed,
                              std::optional<double> param_override = {},
                              std::optional<std::string> family_override = {});

int cmd_train(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg, const std::string& model_path);
int cmd_select_interval(const RunConfig& cfg);
int cmd_split(const RunConfig& cfg);

// DCFAIR_LOG in {error, info, debug}; defaults to info.
void log_info(const std::string& msg);
void log_debug(const std::string& msg);
void log_error(const std::string& msg);

}  // namespace dcfair
