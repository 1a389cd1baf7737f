#include "dcfair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dcfair {

namespace {

constexpr double kGridEps = 1e-12;

// floor with a tiny forgiveness so that e.g. 0.7*10 lands on 7 even when
// the product rounds just below the integer.
int rank_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ScoredGroupSample::ScoredGroupSample(std::vector<std::vector<double>> per_group)
    : per_group_(std::move(per_group)) {
  if (per_group_.size() < 2) throw MetricError("need at least 2 groups");
  for (auto& g : per_group_) {
    if (g.empty()) throw MetricError("empty group sample");
    std::sort(g.begin(), g.end(), std::greater<double>());
  }
}

ScoredGroupSample ScoredGroupSample::from_model(const LinearCrossModel& model,
                                                const Dataset& data) {
  std::vector<std::vector<double>> per_group(data.num_groups());
  for (int i = 0; i < data.n(); ++i) {
    per_group[data.group(i) - 1].push_back(
        score_row(model.weights, model.d, data.row(i), data.group(i)));
  }
  return ScoredGroupSample(std::move(per_group));
}

const std::vector<double>& ScoredGroupSample::group(int k) const {
  if (k < 1 || k > num_groups()) throw MetricError("group id out of range");
  return per_group_[k - 1];
}

double empirical_ccdf(const std::vector<double>& sorted_desc, double theta) {
  if (sorted_desc.empty()) throw MetricError("empirical_ccdf: empty sample");
  // first position where s <= theta, scanning the descending list
  const auto it = std::partition_point(sorted_desc.begin(), sorted_desc.end(),
                                       [&](double s) { return s > theta; });
  return static_cast<double>(it - sorted_desc.begin()) /
         static_cast<double>(sorted_desc.size());
}

namespace {

// Exact KS between two descending-sorted samples: walk the merged value
// sequence from above and track both exceedance counts.
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t na = a.size(), nb = b.size();
  std::size_t ia = 0, ib = 0;
  double best = 0.0;
  while (ia < na || ib < nb) {
    double v;
    if (ia < na && (ib >= nb || a[ia] >= b[ib])) v = a[ia];
    else v = b[ib];
    // consume every sample equal to v so counts reflect CCDF just below v
    while (ia < na && a[ia] >= v) ++ia;
    while (ib < nb && b[ib] >= v) ++ib;
    const double diff = std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb);
    best = std::max(best, diff);
  }
  return best;
}

std::vector<double> rank_window(const std::vector<double>& sorted_desc,
                                const Interval& interval) {
  const int n = static_cast<int>(sorted_desc.size());
  const int lo = rank_floor(interval.alpha * n);
  const int hi = rank_floor(interval.beta * n);
  if (hi <= lo) {
    throw MetricError("empty rank window for n=" + std::to_string(n));
  }
  return std::vector<double>(sorted_desc.begin() + lo, sorted_desc.begin() + hi);
}

}  // namespace

double dp_metric(const ScoredGroupSample& samples, int k, int kp) {
  return ks_statistic(samples.group(k), samples.group(kp));
}

double pdp_metric(const ScoredGroupSample& samples, int k, int kp,
                  const Interval& interval) {
  return ks_statistic(rank_window(samples.group(k), interval),
                      rank_window(samples.group(kp), interval));
}

double wdp_metric(const ScoredGroupSample& samples, int k, int kp,
                  double theta_hat) {
  return std::abs(empirical_ccdf(samples.group(k), theta_hat) -
                  empirical_ccdf(samples.group(kp), theta_hat));
}

double wpdp_metric(const ScoredGroupSample& samples, int k, int kp,
                   const Interval& interval, double theta_hat) {
  const double pk = empirical_ccdf(samples.group(k), theta_hat);
  const double pkp = empirical_ccdf(samples.group(kp), theta_hat);
  const double a = interval.alpha, b = interval.beta;
  return std::abs(std::min(pk, b) - std::min(pk, a) - std::min(pkp, b) +
                  std::min(pkp, a)) /
         (b - a);
}

double accuracy(const LinearCrossModel& model, const Dataset& data,
                double theta_hat) {
  int correct = 0;
  for (int i = 0; i < data.n(); ++i) {
    const double h = score_row(model.weights, model.d, data.row(i), data.group(i));
    const double pred = (h > theta_hat) ? 1.0 : -1.0;
    if (pred == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / data.n();
}

FairnessReport fairness_report(const LinearCrossModel& model, const Dataset& data,
                               const Interval& interval, double theta_hat) {
  const auto samples = ScoredGroupSample::from_model(model, data);
  FairnessReport rep;
  rep.interval = interval;
  rep.theta_hat = theta_hat;
  rep.accuracy = accuracy(model, data, theta_hat);
  for (int k = 1; k <= samples.num_groups(); ++k) {
    for (int kp = k + 1; kp <= samples.num_groups(); ++kp) {
      PairMetrics pm;
      pm.k = k;
      pm.kp = kp;
      pm.dp = dp_metric(samples, k, kp);
      pm.wdp = wdp_metric(samples, k, kp, theta_hat);
      pm.pdp = pdp_metric(samples, k, kp, interval);
      pm.wpdp = wpdp_metric(samples, k, kp, interval, theta_hat);
      rep.pairs.push_back(pm);
      rep.max.dp = std::max(rep.max.dp, pm.dp);
      rep.max.wdp = std::max(rep.max.wdp, pm.wdp);
      rep.max.pdp = std::max(rep.max.pdp, pm.pdp);
      rep.max.wpdp = std::max(rep.max.wpdp, pm.wpdp);
    }
  }
  return rep;
}

std::string FairnessReport::to_json() const {
  std::ostringstream os;
  os << "{\"pairs\": [";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    os << (i ? ", " : "") << "{\"k\": " << p.k << ", \"k_prime\": " << p.kp
       << ", \"dp\": " << fmt17(p.dp) << ", \"wdp\": " << fmt17(p.wdp)
       << ", \"pdp\": " << fmt17(p.pdp) << ", \"wpdp\": " << fmt17(p.wpdp)
       << "}";
  }
  os << "], \"max\": {\"dp\": " << fmt17(max.dp) << ", \"wdp\": " << fmt17(max.wdp)
     << ", \"pdp\": " << fmt17(max.pdp) << ", \"wpdp\": " << fmt17(max.wpdp)
     << "}, \"accuracy\": " << fmt17(accuracy) << ", \"interval\": ["
     << fmt17(interval.alpha) << ", " << fmt17(interval.beta)
     << "], \"theta_hat\": " << fmt17(theta_hat) << "}";
  return os.str();
}

IntervalSelection select_interval(const Dataset& data,
                                  const LinearCrossModel& model,
                                  double theta_hat, double window_width,
                                  double grid_step) {
  if (!(window_width > 0.0 && window_width <= 1.0)) {
    throw MetricError("window width must lie in (0,1]");
  }
  if (!(grid_step > 0.0)) throw MetricError("grid step must be positive");

  std::vector<double> all_scores;
  all_scores.reserve(data.n());
  for (int i = 0; i < data.n(); ++i) {
    all_scores.push_back(
        score_row(model.weights, model.d, data.row(i), data.group(i)));
  }
  std::sort(all_scores.begin(), all_scores.end(), std::greater<double>());
  const double p = empirical_ccdf(all_scores, theta_hat);

  const auto samples = ScoredGroupSample::from_model(model, data);
  auto max_pair_pdp = [&](const Interval& iv) {
    double m = 0.0;
    for (int k = 1; k <= samples.num_groups(); ++k) {
      for (int kp = k + 1; kp <= samples.num_groups(); ++kp) {
        m = std::max(m, pdp_metric(samples, k, kp, iv));
      }
    }
    return m;
  };

  IntervalSelection sel;
  sel.pooled_rate = p;
  int best = -1;
  for (int j = 0;; ++j) {
    const double a = j * grid_step;
    if (a + window_width > 1.0 + kGridEps) break;
    const double b = std::min(a + window_width, 1.0);
    if (p < a - kGridEps || p > b + kGridEps) continue;
    IntervalCandidate cand;
    cand.interval = Interval(a, b);
    cand.max_pdp = max_pair_pdp(cand.interval);
    sel.candidates.push_back(cand);
    if (best < 0 || cand.max_pdp > sel.candidates[best].max_pdp + kGridEps) {
      best = static_cast<int>(sel.candidates.size()) - 1;
    }
  }
  if (best < 0) {
    throw MetricError("no candidate interval covers the positive rate p=" +
                      std::to_string(p));
  }
  sel.chosen = sel.candidates[best].interval;
  return sel;
}

}  // namespace dcfair
