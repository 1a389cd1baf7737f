#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcfair/run.hpp"

namespace {

struct CliValues {
  std::string config_path;
  std::string model_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers the shared flag set on a subcommand; values land in `vals`
// as key=value overrides applied after the config file.
void add_common_flags(CLI::App* cmd, CliValues& vals) {
  cmd->add_option("--config", vals.config_path, "flat key=value config file");
  auto remember = [&vals](const std::string& key) {
    return [&vals, key](const std::string& v) { vals.overrides.push_back({key, v}); };
  };
  cmd->add_option_function<std::string>("--data", remember("data"), "dataset path");
  cmd->add_option_function<std::string>("--family", remember("family"),
                                        "pdp|wpdp|group-auc|inter-group|intra-group|"
                                        "regularized-pdp|regularized-wpdp|unconstrained");
  cmd->add_option_function<std::string>("--kappa", remember("kappa"),
                                        "fairness tolerance");
  cmd->add_option_function<std::string>("--kappa-list", remember("kappa-list"),
                                        "comma-separated kappa values");
  cmd->add_option_function<std::string>("--lambda-list", remember("lambda-list"),
                                        "comma-separated lambda values");
  cmd->add_option_function<std::string>("--interval", remember("interval"),
                                        "alpha,beta");
  cmd->add_option_function<std::string>("--theta-hat", remember("theta-hat"),
                                        "decision threshold");
  cmd->add_option_function<std::string>("--surrogate", remember("surrogate"),
                                        "hinge|sigmoid");
  cmd->add_option_function<std::string>("--solver", remember("solver"),
                                        "idca|ssg-direct|subgradient");
  cmd->add_option_function<std::string>("--rho", remember("rho"),
                                        "strong-convexity shift");
  cmd->add_option_function<std::string>("--outer", remember("outer"),
                                        "outer iterations K");
  cmd->add_option_function<std::string>("--inner", remember("inner"),
                                        "inner iterations T");
  cmd->add_option_function<std::string>("--eps", remember("eps"),
                                        "inner infeasibility tolerance");
  cmd->add_option_function<std::string>("--seed", remember("seed"), "split seed");
  cmd->add_option_function<std::string>("--seeds", remember("seeds"),
                                        "comma-separated seeds");
  cmd->add_option_function<std::string>("--jobs", remember("jobs"),
                                        "parallel sweep rows");
  cmd->add_option_function<std::string>("--out", remember("out"),
                                        "output directory");
  cmd->add_flag_callback(
      "--tune", [&vals] { vals.overrides.push_back({"tune", "true"}); },
      "tune (T,eps[,K]) on the validation split");
}

dcfair::RunConfig resolve(const CliValues& vals) {
  dcfair::RunConfig cfg;
  if (!vals.config_path.empty()) cfg = dcfair::load_config_file(vals.config_path, cfg);
  for (const auto& [k, v] : vals.overrides) cfg.apply(k, v);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dcfair: partially fair linear classifiers via DC-constrained training"};
  app.require_subcommand(1);

  CliValues vals;
  auto* train = app.add_subcommand("train", "train one model and write a run report");
  add_common_flags(train, vals);
  auto* sweep = app.add_subcommand("sweep", "kappa/lambda sweep producing a Pareto frontier");
  add_common_flags(sweep, vals);
  auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  add_common_flags(eval, vals);
  eval->add_option("--model", vals.model_path, "model.json produced by train")
      ->required();
  auto* sel = app.add_subcommand("select-interval",
                                 "pick the interval where the unconstrained model is most unfair");
  add_common_flags(sel, vals);
  sel->add_option_function<std::string>(
      "--width", [&vals](const std::string& v) { vals.overrides.push_back({"width", v}); },
      "interval width");
  sel->add_option_function<std::string>(
      "--grid-step",
      [&vals](const std::string& v) { vals.overrides.push_back({"grid-step", v}); },
      "candidate grid step");
  auto* split = app.add_subcommand("split", "materialize train/val/test splits");
  add_common_flags(split, vals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const dcfair::RunConfig cfg = resolve(vals);
    if (train->parsed()) return dcfair::cmd_train(cfg);
    if (sweep->parsed()) return dcfair::cmd_sweep(cfg);
    if (eval->parsed()) return dcfair::cmd_eval(cfg, vals.model_path);
    if (sel->parsed()) return dcfair::cmd_select_interval(cfg);
    if (split->parsed()) return dcfair::cmd_split(cfg);
  } catch (const dcfair::ConfigError& e) {
    dcfair::log_error(e.what());
    return 2;
  } catch (const dcfair::DataError& e) {
    dcfair::log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    dcfair::log_error(e.what());
    return 1;
  }
  return 0;
}
