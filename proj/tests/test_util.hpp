#pragma once

// Shared fixtures and independent oracles. Everything here recomputes the
// quantities under test from first principles (naive scans, explicit double
// loops, midpoint grids) so the assertions do not share code paths with the
// library implementation.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dcfair/dataset.hpp"
#include "dcfair/metrics.hpp"
#include "dcfair/model.hpp"
#include "dcfair/prng.hpp"

namespace testutil {

using dcfair::Dataset;
using dcfair::Rng64;
using dcfair::Vec;

// ---- datasets --------------------------------------------------------

inline Dataset random_dataset(int n, int d, int groups, std::uint64_t seed,
                              double group2_shift = 0.0) {
  Rng64 rng(seed);
  std::vector<double> feats;
  std::vector<double> labels;
  std::vector<int> gs;
  for (int i = 0; i < n; ++i) {
    const int g = 1 + static_cast<int>(rng.next_below(groups));
    const double z = rng.next_double() < 0.5 ? -1.0 : 1.0;
    for (int j = 0; j < d; ++j) {
      double v = rng.next_gaussian() + 0.8 * z * (j == 0 ? 1.0 : 0.3);
      if (g == 2) v += group2_shift;
      feats.push_back(v);
    }
    labels.push_back(z);
    gs.push_back(g);
  }
  // make sure every group id appears
  for (int g = 1; g <= groups; ++g) gs[g - 1] = g;
  return Dataset(std::move(feats), d, std::move(labels), std::move(gs));
}

// Two groups with different base rates: the accuracy-optimal score keeps a
// between-group offset, so the unconstrained model is pDP-unfair by design.
inline Dataset planted_bias_dataset(int n, std::uint64_t seed,
                                    double rate1 = 0.3, double rate2 = 0.7,
                                    double signal = 0.9) {
  Rng64 rng(seed);
  std::vector<double> feats;
  std::vector<double> labels;
  std::vector<int> gs;
  for (int i = 0; i < n; ++i) {
    const int g = 1 + static_cast<int>(rng.next_below(2));
    const double rate = g == 1 ? rate1 : rate2;
    const double z = rng.next_double() < rate ? 1.0 : -1.0;
    feats.push_back(rng.next_gaussian() + signal * z);
    feats.push_back(rng.next_gaussian());
    labels.push_back(z);
    gs.push_back(g);
  }
  gs[0] = 1;
  gs[1] = 2;
  return Dataset(std::move(feats), 2, std::move(labels), std::move(gs));
}

// ---- score oracles (independent of score_row) -------------------------

inline double naive_score(const Vec& weights, const Vec& x, int g) {
  Vec aug;
  aug.push_back(1.0);
  for (double v : x) aug.push_back(v);
  aug.push_back(static_cast<double>(g));
  for (double v : x) aug.push_back(static_cast<double>(g) * v);
  double s = 0.0;
  for (std::size_t i = 0; i < aug.size(); ++i) s += weights[i] * aug[i];
  return s;
}

inline std::vector<Vec> naive_group_scores(const Dataset& data, const Vec& w) {
  std::vector<Vec> out(data.num_groups());
  for (int i = 0; i < data.n(); ++i) {
    Vec x(data.row(i), data.row(i) + data.d());
    out[data.group(i) - 1].push_back(naive_score(w, x, data.group(i)));
  }
  return out;
}

// ---- metric oracles ----------------------------------------------------

inline double ccdf_count(const std::vector<double>& sample, double theta) {
  int c = 0;
  for (double s : sample) {
    if (s > theta) ++c;
  }
  return static_cast<double>(c) / sample.size();
}

// all thresholds that can matter: below min, every midpoint, above max
inline std::vector<double> candidate_thresholds(std::vector<double> merged) {
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::vector<double> cands;
  cands.push_back(merged.front() - 1.0);
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    cands.push_back(0.5 * (merged[i] + merged[i + 1]));
  }
  cands.push_back(merged.back() + 1.0);
  return cands;
}

inline double brute_force_ks(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> merged = a;
  merged.insert(merged.end(), b.begin(), b.end());
  double best = 0.0;
  for (double t : candidate_thresholds(merged)) {
    best = std::max(best, std::abs(ccdf_count(a, t) - ccdf_count(b, t)));
  }
  return best;
}

// floor-based rank window on a descending-sorted copy
inline std::vector<double> brute_window(std::vector<double> sample, double alpha,
                                        double beta) {
  std::sort(sample.begin(), sample.end(), std::greater<double>());
  const int n = static_cast<int>(sample.size());
  const int lo = static_cast<int>(std::floor(alpha * n + 1e-9));
  const int hi = static_cast<int>(std::floor(beta * n + 1e-9));
  return std::vector<double>(sample.begin() + lo, sample.begin() + hi);
}

// Two-inequality feasibility by brute force: a threshold theta_p exists
// (among all candidate levels) putting every group's exceedance rate in
// [p, p + kappa*(beta-alpha)].
inline bool sandwich_feasible_at_p(const std::vector<std::vector<double>>& groups,
                              double p, double kappa, double width) {
  std::vector<double> merged;
  for (const auto& g : groups) merged.insert(merged.end(), g.begin(), g.end());
  for (double t : candidate_thresholds(merged)) {
    bool ok = true;
    for (const auto& g : groups) {
      const double r = ccdf_count(g, t);
      if (r < p - 1e-15 || r > p + kappa * width + 1e-15) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

// ---- finite differences ------------------------------------------------

template <typename F>
Vec central_diff(const F& f, const Vec& u, double h = 1e-5) {
  Vec g(u.size());
  Vec up = u, dn = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    up[i] = u[i] + h;
    dn[i] = u[i] - h;
    g[i] = (f(up) - f(dn)) / (2.0 * h);
    up[i] = u[i];
    dn[i] = u[i];
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) {
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    da += a[i] * a[i];
    db += b[i] * b[i];
  }
  // relative where the gradients are sizable, absolute in flat regions
  const double den = std::max({1e-3, std::sqrt(da), std::sqrt(db)});
  return std::sqrt(num) / den;
}

inline Vec random_vec(int n, Rng64& rng, double scale = 1.0) {
  Vec v(n);
  for (auto& e : v) e = scale * rng.next_gaussian();
  return v;
}

}  // namespace testutil
