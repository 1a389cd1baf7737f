#pragma once

// Direct-expression oracles shared by the unit and acceptance suites.
// These evaluate the formulas behind every emitted DC pair from scratch:
// naive featurize-dot scores, explicit pair loops, plain surrogate
// arithmetic. They intentionally avoid every library code path they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcfair/dataset.hpp"
#include "dcfair/metrics.hpp"
#include "dcfair/problems.hpp"
#include "test_util.hpp"

namespace oracles {

using dcfair::Dataset;
using dcfair::Interval;
using dcfair::LossKind;
using dcfair::SurrogateKind;
using dcfair::Vec;
using testutil::naive_score;

double sig_hinge(double x) { return std::min(std::max(x + 0.5, 0.0), 1.0); }
double sig_logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double sig_quad(double x) { return 0.5 * (1.0 + x) * (1.0 + x); }

double surrogate_of(SurrogateKind k, double x) {
  return k == SurrogateKind::HingeWindow ? sig_hinge(x) : sig_logistic(x);
}

double oracle_group_mass(const Dataset& data, const Vec& u, int model_len,
                         SurrogateKind kind, int group, double theta) {
  const Vec w(u.begin(), u.begin() + model_len);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.group(i) != group) continue;
    Vec x(data.row(i), data.row(i) + data.d());
    sum += surrogate_of(kind, naive_score(w, x, data.group(i)) - theta);
    ++count;
  }
  return sum / count;
}

double oracle_erm(const Dataset& data, const Vec& u, LossKind loss) {
  const Vec w(u.begin(), u.begin() + 2 * data.d() + 2);
  double sum = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    Vec x(data.row(i), data.row(i) + data.d());
    const double h = naive_score(w, x, data.group(i));
    const double z = data.label(i);
    if (loss == LossKind::Logistic) sum += std::log(1.0 + std::exp(-z * h));
    else if (loss == LossKind::Hinge) sum += std::max(1.0 - z * h, 0.0);
    else sum += 0.5 * (h - z) * (h - z);
  }
  return sum / data.n();
}

double pairwise_loss(LossKind loss, double x) {
  if (loss == LossKind::Hinge) return std::max(1.0 - x, 0.0);
  if (loss == LossKind::Logistic) return std::log(1.0 + std::exp(-x));
  return 0.5 * (1.0 - x) * (1.0 - x);
}

double oracle_auc(const Dataset& data, const Vec& u, LossKind loss) {
  const Vec w(u.begin(), u.begin() + 2 * data.d() + 2);
  double sum = 0.0;
  int np = 0, nn = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.label(i) <= 0) continue;
    ++np;
    Vec xi(data.row(i), data.row(i) + data.d());
    const double hp = naive_score(w, xi, data.group(i));
    nn = 0;
    for (int j = 0; j < data.n(); ++j) {
      if (data.label(j) > 0) continue;
      ++nn;
      Vec xj(data.row(j), data.row(j) + data.d());
      sum += pairwise_loss(loss, hp - naive_score(w, xj, data.group(j)));
    }
  }
  return sum / (static_cast<double>(np) * nn);
}

// explicit sort-and-window evaluation of the pAUC objective
double oracle_pauc(const Dataset& data, const Vec& u, LossKind loss, double alpha,
                   double beta) {
  const Vec w(u.begin(), u.begin() + 2 * data.d() + 2);
  std::vector<double> pos;
  std::vector<std::pair<double, int>> neg;  // (score, original index)
  for (int i = 0; i < data.n(); ++i) {
    Vec x(data.row(i), data.row(i) + data.d());
    const double h = naive_score(w, x, data.group(i));
    if (data.label(i) > 0) pos.push_back(h);
    else neg.push_back({h, i});
  }
  std::stable_sort(neg.begin(), neg.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const int n_neg = static_cast<int>(neg.size());
  const int na = static_cast<int>(std::ceil(alpha * n_neg - 1e-12));
  const int nb = static_cast<int>(std::ceil(beta * n_neg - 1e-12));
  double sum = 0.0;
  for (double hp : pos) {
    for (int j = na; j < nb; ++j) sum += pairwise_loss(loss, hp - neg[j].first);
  }
  return sum / (static_cast<double>(pos.size()) * (nb - na));
}

double oracle_quad_pair_mean(const Dataset& data, const Vec& u,
                             const std::vector<int>& a, const std::vector<int>& b) {
  const Vec w(u.begin(), u.begin() + 2 * data.d() + 2);
  double sum = 0.0;
  for (int i : a) {
    Vec xi(data.row(i), data.row(i) + data.d());
    const double hi = naive_score(w, xi, data.group(i));
    for (int j : b) {
      Vec xj(data.row(j), data.row(j) + data.d());
      sum += sig_quad(hi - naive_score(w, xj, data.group(j)));
    }
  }
  return sum / (static_cast<double>(a.size()) * b.size());
}

std::vector<int> rows_of(const Dataset& data, int group, int label_sign) {
  std::vector<int> out;
  for (int i = 0; i < data.n(); ++i) {
    if (data.group(i) != group) continue;
    if (label_sign != 0 && data.label(i) * label_sign <= 0) continue;
    out.push_back(i);
  }
  return out;
}

double oracle_wpdp_value(const Dataset& data, const Vec& u, int model_len,
                         SurrogateKind kind, int k, int kp, const Interval& iv,
                         double kappa, double theta_hat) {
  const double ak = oracle_group_mass(data, u, model_len, kind, k, theta_hat);
  const double akp = oracle_group_mass(data, u, model_len, kind, kp, theta_hat);
  return std::min(ak, iv.beta) - std::min(ak, iv.alpha) - std::min(akp, iv.beta) +
         std::min(akp, iv.alpha) - kappa * iv.width();
}


}  // namespace oracles
