#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcfair/convex.hpp"
#include "dcfair/dataset.hpp"
#include "dcfair/metrics.hpp"
#include "dcfair/model.hpp"

namespace dcfair {

struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LossKind { Logistic, Hinge, Quadratic };

enum class ConstraintFamily {
  PDP,
  WPDP,
  GroupAUC,
  InterGroup,
  IntraGroup,
  RegularizedPDP,
  RegularizedWPDP,
  Unconstrained
};

std::string to_string(ConstraintFamily f);
std::string to_string(SurrogateKind s);
std::string to_string(LossKind l);
ConstraintFamily family_from_string(const std::string& s);
SurrogateKind surrogate_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

// Finite grid of target rates p in [alpha, beta - kappa*(beta-alpha)).
struct PGrid {
  std::vector<double> values;
};

// `count` midpoints of equal cells over [alpha, beta - kappa*(beta-alpha)):
// p_j = alpha + (j - 1/2) * range / count.
PGrid make_pgrid(const Interval& interval, double kappa, int count = 10);

// Shared per-problem score cache: every oracle built over the same data
// recomputes the n scores only when the model part of the query changes.
class ScoreCache {
 public:
  ScoreCache(std::shared_ptr<const Dataset> data, int model_len);
  std::shared_ptr<const Vec> scores(const Vec& u) const;
  const Dataset& data() const { return *data_; }
  int model_len() const { return model_len_; }

 private:
  std::shared_ptr<const Dataset> data_;
  int model_len_;
  mutable std::mutex mutex_;
  mutable Vec key_;
  mutable std::shared_ptr<const Vec> cached_;
};

struct ProblemMeta {
  ConstraintFamily family = ConstraintFamily::Unconstrained;
  SurrogateKind surrogate = SurrogateKind::HingeWindow;
  double kappa = 0.0;
  double lambda = 0.0;
  Interval interval;
  double theta_hat = 0.0;
  double rho = 0.0;
  std::vector<double> pgrid;
};

struct DCProblem {
  DCFn objective;
  std::vector<DCFn> constraints;
  FeasibleDomain domain;
  PackedLayout layout;
  DecisionVector start;
  ProblemMeta meta;
};

// ---- objectives ------------------------------------------------------

// Mean pointwise loss over the training set, as a DC pair with both sides
// shifted by (rho/2)||u||^2 (the loss itself is convex for the linear model).
DCFn erm_objective(const Dataset& data, LossKind loss, double rho,
                   std::shared_ptr<ScoreCache> cache = nullptr);

// Mean pairwise loss over positive x negative pairs.
DCFn auc_objective(const Dataset& data, LossKind loss, double rho,
                   std::shared_ptr<ScoreCache> cache = nullptr);

// Partial-AUC objective: the pairwise-loss sum over negatives whose score
// rank falls in the interval, written as (top-n_beta sum) - (top-n_alpha sum)
// with n_alpha = ceil(alpha*n_-), n_beta = ceil(beta*n_-); score ties break
// to the lowest index.
DCFn pauc_objective(const Dataset& data, const Interval& interval,
                    LossKind loss, double rho,
                    std::shared_ptr<ScoreCache> cache = nullptr);

// ---- constraints -----------------------------------------------------

struct PdpConstraints {
  std::vector<DCFn> constraints;  // for each p: for each group: lower, upper
  int theta_len = 0;
};

PdpConstraints pdp_constraints(const Dataset& data, const Interval& interval,
                               double kappa, const PGrid& pgrid,
                               SurrogateKind surrogate, double rho,
                               std::shared_ptr<ScoreCache> cache = nullptr);

// One constraint per ordered pair (k, k'), k != k'; theta_hat is a constant.
std::vector<DCFn> wpdp_constraints(const Dataset& data, const Interval& interval,
                                   double kappa, double theta_hat,
                                   SurrogateKind surrogate, double rho,
                                   std::shared_ptr<ScoreCache> cache = nullptr);

enum class BaselineFamily { GroupAUC, InterGroup, IntraGroup };

// AUC-style baseline constraints with the quadratic surrogate
// sigma(x) = (1+x)^2/2; convex, wrapped as DC with minus = (rho/2)||u||^2.
std::vector<DCFn> baseline_constraints(const Dataset& data, BaselineFamily family,
                                       double kappa, double rho,
                                       std::shared_ptr<ScoreCache> cache = nullptr);

// Penalty-form objective (unconstrained): f0 + lambda-weighted max/abs
// fairness penalty, exposed as a single nonsmooth oracle (plus part holds
// everything, minus is zero). Subgradients pick the lowest achieving index
// and use sign(x) with 0 at exact zero.
DCFn regularized_objective(const Dataset& data, ConstraintFamily kind,
                           double lambda, const Interval& interval,
                           const std::optional<PGrid>& pgrid,
                           std::optional<double> theta_hat,
                           SurrogateKind surrogate, double rho,
                           LossKind loss = LossKind::Logistic,
                           std::shared_ptr<ScoreCache> cache = nullptr);

// Trivially fair start: w = 0 with thresholds placed mid-window
// (hinge: theta_p = 0.5 - p - kappa*(beta-alpha)/2; sigmoid: -logit of the
// same mass). Verified against the constraints before returning.
DecisionVector feasible_start(const DCProblem& problem_parts);

// Assembles a full problem for one family; see ProblemMeta for knobs.
struct BuildSpec {
  ConstraintFamily family = ConstraintFamily::PDP;
  SurrogateKind surrogate = SurrogateKind::HingeWindow;
  LossKind loss = LossKind::Logistic;
  Interval interval;
  double kappa = 0.1;
  double lambda = 0.0;
  double theta_hat = 0.0;
  double rho = 1e-3;
  int pgrid_count = 10;
};

DCProblem build_problem(std::shared_ptr<const Dataset> data, const BuildSpec& spec);

// Weak-convexity bound of sigmoid-surrogate group means over this data;
// added to the quadratic shift so sigmoid DC pairs stay rho-strongly convex.
double sigmoid_curvature_bound(const Dataset& data, bool with_theta);

std::string meta_to_json(const ProblemMeta& meta);

}  // namespace dcfair
