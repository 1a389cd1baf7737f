#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcfair/dataset.hpp"
#include "dcfair/model.hpp"

namespace dcfair {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Score interval [alpha, beta) of within-group ranks; immutable.
struct Interval {
  double alpha = 0.0;
  double beta = 1.0;

  Interval() = default;
  Interval(double a, double b) : alpha(a), beta(b) {
    if (!(0.0 <= a && a < b && b <= 1.0)) {
      throw MetricError("interval requires 0 <= alpha < beta <= 1");
    }
  }
  double width() const { return beta - alpha; }
};

// Per-group score lists sorted descending (rank 1 = largest).
class ScoredGroupSample {
 public:
  explicit ScoredGroupSample(std::vector<std::vector<double>> per_group);
  static ScoredGroupSample from_model(const LinearCrossModel& model,
                                      const Dataset& data);

  int num_groups() const { return static_cast<int>(per_group_.size()); }
  // group ids are 1-based
  const std::vector<double>& group(int k) const;

 private:
  std::vector<std::vector<double>> per_group_;
};

// Fraction of the (descending-sorted) sample strictly above theta.
double empirical_ccdf(const std::vector<double>& sorted_desc, double theta);

// Exact two-sample Kolmogorov-Smirnov statistic between the CCDFs of
// groups k and k' (max over all thresholds).
double dp_metric(const ScoredGroupSample& samples, int k, int kp);

// KS statistic between the rank-windowed sub-samples: descending
// positions i with floor(alpha*n) < i <= floor(beta*n) (1-based).
double pdp_metric(const ScoredGroupSample& samples, int k, int kp,
                  const Interval& interval);

double wdp_metric(const ScoredGroupSample& samples, int k, int kp,
                  double theta_hat);

// |min(p_k,beta)-min(p_k,alpha)-min(p_k',beta)+min(p_k',alpha)| / (beta-alpha)
// with p = empirical CCDF at theta_hat (truncated-CCDF identity).
double wpdp_metric(const ScoredGroupSample& samples, int k, int kp,
                   const Interval& interval, double theta_hat);

// Classification accuracy under the strict rule: predict +1 iff h > theta_hat.
double accuracy(const LinearCrossModel& model, const Dataset& data,
                double theta_hat);

struct PairMetrics {
  int k = 0, kp = 0;
  double dp = 0, wdp = 0, pdp = 0, wpdp = 0;
};

struct FairnessReport {
  std::vector<PairMetrics> pairs;  // unordered pairs k < k'
  PairMetrics max;                 // componentwise max over pairs
  double accuracy = 0.0;
  Interval interval;
  double theta_hat = 0.0;

  std::string to_json() const;
};

FairnessReport fairness_report(const LinearCrossModel& model, const Dataset& data,
                               const Interval& interval, double theta_hat);

struct IntervalCandidate {
  Interval interval;
  double max_pdp = 0.0;
};

struct IntervalSelection {
  Interval chosen;
  double pooled_rate = 0.0;  // p = empirical CCDF of all scores at theta_hat
  std::vector<IntervalCandidate> candidates;
};

// Candidate intervals [a, a+width] with a on the grid {0, step, 2*step, ...}
// that cover the pooled positive rate p; picks the one where the model is
// most unfair (max-over-pairs pdp), ties to the smallest a.
IntervalSelection select_interval(const Dataset& data,
                                  const LinearCrossModel& model,
                                  double theta_hat, double window_width,
                                  double grid_step);

}  // namespace dcfair
