#include "dcfair/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace dcfair {

namespace {

// max |sigma''| of the logistic function
constexpr double kSigmoidCurvature = 0.0962250448649376;

double logit(double q) { return std::log(q / (1.0 - q)); }

std::vector<std::vector<int>> group_rows(const Dataset& data) {
  std::vector<std::vector<int>> rows(data.num_groups());
  for (int i = 0; i < data.n(); ++i) rows[data.group(i) - 1].push_back(i);
  return rows;
}

struct PosNegRows {
  std::vector<int> pos, neg;
};

PosNegRows pos_neg_rows(const Dataset& data, const std::vector<int>* subset = nullptr) {
  PosNegRows out;
  auto add = [&](int i) {
    (data.label(i) > 0 ? out.pos : out.neg).push_back(i);
  };
  if (subset) {
    for (int i : *subset) add(i);
  } else {
    for (int i = 0; i < data.n(); ++i) add(i);
  }
  return out;
}

double pair_loss(LossKind loss, double x) {
  switch (loss) {
    case LossKind::Hinge:
      return std::max(1.0 - x, 0.0);
    case LossKind::Logistic: {
      const double m = -x;
      return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    case LossKind::Quadratic:
      return 0.5 * (1.0 - x) * (1.0 - x);
  }
  return 0.0;
}

// right-derivative convention at the hinge kink
double pair_loss_slope(LossKind loss, double x) {
  switch (loss) {
    case LossKind::Hinge:
      return (x <= 1.0) ? -1.0 : 0.0;
    case LossKind::Logistic:
      return -sigmoid_surrogate(-x).value;
    case LossKind::Quadratic:
      return x - 1.0;
  }
  return 0.0;
}

}  // namespace

std::string to_string(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::PDP: return "pdp";
    case ConstraintFamily::WPDP: return "wpdp";
    case ConstraintFamily::GroupAUC: return "group-auc";
    case ConstraintFamily::InterGroup: return "inter-group";
    case ConstraintFamily::IntraGroup: return "intra-group";
    case ConstraintFamily::RegularizedPDP: return "regularized-pdp";
    case ConstraintFamily::RegularizedWPDP: return "regularized-wpdp";
    case ConstraintFamily::Unconstrained: return "unconstrained";
  }
  return "?";
}

std::string to_string(SurrogateKind s) {
  switch (s) {
    case SurrogateKind::HingeWindow: return "hinge";
    case SurrogateKind::Sigmoid: return "sigmoid";
    case SurrogateKind::QuadraticPairwise: return "quadratic";
  }
  return "?";
}

std::string to_string(LossKind l) {
  switch (l) {
    case LossKind::Logistic: return "logistic";
    case LossKind::Hinge: return "hinge";
    case LossKind::Quadratic: return "quadratic";
  }
  return "?";
}

ConstraintFamily family_from_string(const std::string& s) {
  for (auto f : {ConstraintFamily::PDP, ConstraintFamily::WPDP,
                 ConstraintFamily::GroupAUC, ConstraintFamily::InterGroup,
                 ConstraintFamily::IntraGroup, ConstraintFamily::RegularizedPDP,
                 ConstraintFamily::RegularizedWPDP, ConstraintFamily::Unconstrained}) {
    if (to_string(f) == s) return f;
  }
  throw ProblemError("unknown constraint family: " + s);
}

SurrogateKind surrogate_from_string(const std::string& s) {
  for (auto k : {SurrogateKind::HingeWindow, SurrogateKind::Sigmoid,
                 SurrogateKind::QuadraticPairwise}) {
    if (to_string(k) == s) return k;
  }
  throw ProblemError("unknown surrogate: " + s);
}

LossKind loss_from_string(const std::string& s) {
  for (auto k : {LossKind::Logistic, LossKind::Hinge, LossKind::Quadratic}) {
    if (to_string(k) == s) return k;
  }
  throw ProblemError("unknown loss: " + s);
}

PGrid make_pgrid(const Interval& interval, double kappa, int count) {
  if (count < 1) throw ProblemError("pgrid needs at least one point");
  if (kappa < 0.0 || kappa > 1.0) throw ProblemError("kappa must lie in [0,1]");
  const double lo = interval.alpha;
  const double hi = interval.beta - kappa * interval.width();
  if (!(hi > lo)) throw ProblemError("pgrid range [alpha, beta-kappa(beta-alpha)) is empty");
  PGrid grid;
  grid.values.reserve(count);
  for (int j = 1; j <= count; ++j) {
    grid.values.push_back(lo + (j - 0.5) * (hi - lo) / count);
  }
  return grid;
}

ScoreCache::ScoreCache(std::shared_ptr<const Dataset> data, int model_len)
    : data_(std::move(data)), model_len_(model_len) {}

std::shared_ptr<const Vec> ScoreCache::scores(const Vec& u) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (cached_ && std::equal(u.begin(), u.begin() + model_len_, key_.begin())) {
    return cached_;
  }
  const Dataset& data = *data_;
  auto fresh = std::make_shared<Vec>(data.n());
  const int d = data.d();
  for (int i = 0; i < data.n(); ++i) {
    (*fresh)[i] = score_row(u, d, data.row(i), data.group(i));
  }
  key_.assign(u.begin(), u.begin() + model_len_);
  cached_ = fresh;
  return fresh;
}

namespace {

std::shared_ptr<ScoreCache> ensure_cache(std::shared_ptr<ScoreCache> cache,
                                         const Dataset& data) {
  if (cache) return cache;
  // non-owning alias: standalone builders keep the caller's dataset alive
  auto alias = std::shared_ptr<const Dataset>(&data, [](const Dataset*) {});
  return std::make_shared<ScoreCache>(alias, LinearCrossModel::weight_len(data.d()));
}

}  // namespace

DCFn erm_objective(const Dataset& data, LossKind loss, double rho,
                   std::shared_ptr<ScoreCache> cache) {
  auto ctx = ensure_cache(std::move(cache), data);
  const int n = data.n();
  const int d = data.d();

  ConvexFn base;
  base.eval = [ctx, loss, n](const Vec& u) {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double h = (*scores)[i];
      const double z = ds.label(i);
      switch (loss) {
        case LossKind::Logistic: {
          const double m = -z * h;
          sum += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
          break;
        }
        case LossKind::Hinge:
          sum += std::max(1.0 - z * h, 0.0);
          break;
        case LossKind::Quadratic:
          sum += 0.5 * (h - z) * (h - z);
          break;
      }
    }
    return sum / n;
  };
  base.subgrad = [ctx, loss, n, d](const Vec& u) {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    Vec g(u.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double h = (*scores)[i];
      const double z = ds.label(i);
      double c = 0.0;
      switch (loss) {
        case LossKind::Logistic:
          c = -z * sigmoid_surrogate(-z * h).value;
          break;
        case LossKind::Hinge:
          c = (z * h <= 1.0) ? -z : 0.0;
          break;
        case LossKind::Quadratic:
          c = h - z;
          break;
      }
      if (c != 0.0) add_scaled_cross(g, d, ds.row(i), ds.group(i), c / n);
    }
    return g;
  };
  return mu_shift(base, constant_fn(0.0), rho);
}

DCFn auc_objective(const Dataset& data, LossKind loss, double rho,
                   std::shared_ptr<ScoreCache> cache) {
  auto ctx = ensure_cache(std::move(cache), data);
  auto pn = std::make_shared<PosNegRows>(pos_neg_rows(data));
  if (pn->pos.empty() || pn->neg.empty()) {
    throw ProblemError("auc objective needs both classes nonempty");
  }
  const int d = data.d();
  const double scale = 1.0 / (static_cast<double>(pn->pos.size()) * pn->neg.size());

  ConvexFn base;
  base.eval = [ctx, pn, loss, scale](const Vec& u) {
    const auto scores = ctx->scores(u);
    double sum = 0.0;
    for (int i : pn->pos) {
      const double hp = (*scores)[i];
      for (int j : pn->neg) sum += pair_loss(loss, hp - (*scores)[j]);
    }
    return sum * scale;
  };
  base.subgrad = [ctx, pn, loss, scale, d](const Vec& u) {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    Vec coeff(ds.n(), 0.0);
    for (int i : pn->pos) {
      const double hp = (*scores)[i];
      for (int j : pn->neg) {
        const double s = pair_loss_slope(loss, hp - (*scores)[j]);
        coeff[i] += s;
        coeff[j] -= s;
      }
    }
    Vec g(u.size(), 0.0);
    for (int i = 0; i < ds.n(); ++i) {
      if (coeff[i] != 0.0) {
        add_scaled_cross(g, d, ds.row(i), ds.group(i), coeff[i] * scale);
      }
    }
    return g;
  };
  return mu_shift(base, constant_fn(0.0), rho);
}

namespace {

// Sum over positives x (top-k negatives by current score, ties to lowest
// index) of the pairwise loss, divided by `denom`.
ConvexFn pauc_top_sum(std::shared_ptr<ScoreCache> ctx,
                      std::shared_ptr<PosNegRows> pn, LossKind loss, int top_k,
                      double denom, int d) {
  auto select_top = [ctx, pn, top_k](const Vec& u) {
    const auto scores = ctx->scores(u);
    std::vector<int> order = pn->neg;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if ((*scores)[a] != (*scores)[b]) return (*scores)[a] > (*scores)[b];
      return a < b;
    });
    order.resize(top_k);
    return std::make_pair(scores, order);
  };

  ConvexFn f;
  f.eval = [select_top, pn, loss, denom](const Vec& u) {
    const auto [scores, top] = select_top(u);
    double sum = 0.0;
    for (int i : pn->pos) {
      const double hp = (*scores)[i];
      for (int j : top) sum += pair_loss(loss, hp - (*scores)[j]);
    }
    return sum / denom;
  };
  f.subgrad = [select_top, ctx, pn, loss, denom, d](const Vec& u) {
    const auto [scores, top] = select_top(u);
    const Dataset& ds = ctx->data();
    Vec coeff(ds.n(), 0.0);
    for (int i : pn->pos) {
      const double hp = (*scores)[i];
      for (int j : top) {
        const double s = pair_loss_slope(loss, hp - (*scores)[j]);
        coeff[i] += s;
        coeff[j] -= s;
      }
    }
    Vec g(u.size(), 0.0);
    for (int i = 0; i < ds.n(); ++i) {
      if (coeff[i] != 0.0) {
        add_scaled_cross(g, d, ds.row(i), ds.group(i), coeff[i] / denom);
      }
    }
    return g;
  };
  return f;
}

}  // namespace

DCFn pauc_objective(const Dataset& data, const Interval& interval, LossKind loss,
                    double rho, std::shared_ptr<ScoreCache> cache) {
  auto ctx = ensure_cache(std::move(cache), data);
  auto pn = std::make_shared<PosNegRows>(pos_neg_rows(data));
  if (pn->pos.empty() || pn->neg.empty()) {
    throw ProblemError("pauc objective needs both classes nonempty");
  }
  const int n_neg = static_cast<int>(pn->neg.size());
  const int n_alpha = static_cast<int>(std::ceil(interval.alpha * n_neg - 1e-12));
  const int n_beta = static_cast<int>(std::ceil(interval.beta * n_neg - 1e-12));
  if (n_beta < 1) throw ProblemError("pauc window needs beta*n_- >= 1");
  if (n_beta == n_alpha) throw ProblemError("empty pauc window (ceil(alpha n) == ceil(beta n))");

  const double denom = static_cast<double>(pn->pos.size()) * (n_beta - n_alpha);
  const int d = data.d();
  ConvexFn plus = pauc_top_sum(ctx, pn, loss, n_beta, denom, d);
  ConvexFn minus = n_alpha > 0 ? pauc_top_sum(ctx, pn, loss, n_alpha, denom, d)
                               : constant_fn(0.0);
  return mu_shift(plus, minus, rho);
}

double sigmoid_curvature_bound(const Dataset& data, bool with_theta) {
  double worst = 0.0;
  Vec x(data.d());
  for (int i = 0; i < data.n(); ++i) {
    std::copy(data.row(i), data.row(i) + data.d(), x.begin());
    const Vec aug = featurize(x, data.group(i));
    worst = std::max(worst, sqnorm(aug));
  }
  return kSigmoidCurvature * (worst + (with_theta ? 1.0 : 0.0));
}

namespace {

// Group-mean surrogate sums shared by the pdp/wpdp builders. theta_index < 0
// means the threshold is the constant `theta_const` rather than a variable.
struct GroupSurrogate {
  std::shared_ptr<ScoreCache> ctx;
  std::vector<int> rows;
  int theta_index = -1;
  double theta_const = 0.0;
  int d = 0;

  double theta_of(const Vec& u) const {
    return theta_index >= 0 ? u[theta_index] : theta_const;
  }

  // mean of sigma_plus / sigma_minus (hinge split) over the group
  std::pair<double, double> hinge_means(const Vec& u) const {
    const auto scores = ctx->scores(u);
    const double th = theta_of(u);
    double sp = 0.0, sm = 0.0;
    for (int i : rows) {
      const auto s = hinge_surrogate((*scores)[i] - th);
      sp += s.plus_value;
      sm += s.minus_value;
    }
    const double inv = 1.0 / rows.size();
    return {sp * inv, sm * inv};
  }

  // adds the subgradient of mean sigma_plus (part=+1) or sigma_minus
  // (part=-1) scaled by c
  void add_hinge_grad(Vec& g, const Vec& u, int part, double c) const {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    const double th = theta_of(u);
    const double inv = c / rows.size();
    for (int i : rows) {
      const auto s = hinge_surrogate((*scores)[i] - th);
      const double slope = (part > 0 ? s.plus_slope : s.minus_slope) * inv;
      if (slope == 0.0) continue;
      add_scaled_cross(g, d, ds.row(i), ds.group(i), slope);
      if (theta_index >= 0) g[theta_index] -= slope;
    }
  }

  double sigmoid_mean(const Vec& u) const {
    const auto scores = ctx->scores(u);
    const double th = theta_of(u);
    double s = 0.0;
    for (int i : rows) s += sigmoid_surrogate((*scores)[i] - th).value;
    return s / rows.size();
  }

  void add_sigmoid_grad(Vec& g, const Vec& u, double c) const {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    const double th = theta_of(u);
    const double inv = c / rows.size();
    for (int i : rows) {
      const double der = sigmoid_surrogate((*scores)[i] - th).derivative * inv;
      add_scaled_cross(g, d, ds.row(i), ds.group(i), der);
      if (theta_index >= 0) g[theta_index] -= der;
    }
  }
};

}  // namespace

PdpConstraints pdp_constraints(const Dataset& data, const Interval& interval,
                               double kappa, const PGrid& pgrid,
                               SurrogateKind surrogate, double rho,
                               std::shared_ptr<ScoreCache> cache) {
  if (kappa < 0.0 || kappa > 1.0) throw ProblemError("kappa must lie in [0,1]");
  if (pgrid.values.empty()) throw ProblemError("empty pgrid");
  const double hi = interval.beta - kappa * interval.width();
  double prev = -1.0;
  for (double p : pgrid.values) {
    if (p < interval.alpha - 1e-12 || p >= hi + 1e-12 || p <= prev) {
      throw ProblemError("pgrid values must increase within [alpha, beta-kappa(beta-alpha))");
    }
    prev = p;
  }
  if (surrogate == SurrogateKind::QuadraticPairwise) {
    throw ProblemError("pdp constraints support hinge or sigmoid surrogates");
  }

  auto ctx = ensure_cache(std::move(cache), data);
  const int model_len = LinearCrossModel::weight_len(data.d());
  const auto rows = group_rows(data);
  const double margin = kappa * interval.width();
  const double shift =
      rho + (surrogate == SurrogateKind::Sigmoid ? sigmoid_curvature_bound(data, true) : 0.0);

  PdpConstraints out;
  out.theta_len = static_cast<int>(pgrid.values.size());

  for (int j = 0; j < out.theta_len; ++j) {
    const double p = pgrid.values[j];
    for (int k = 1; k <= data.num_groups(); ++k) {
      auto gs = std::make_shared<GroupSurrogate>();
      gs->ctx = ctx;
      gs->rows = rows[k - 1];
      gs->theta_index = model_len + j;
      gs->d = data.d();

      DCFn lower, upper;
      if (surrogate == SurrogateKind::HingeWindow) {
        ConvexFn sp, sm;
        sm.eval = [gs](const Vec& u) { return gs->hinge_means(u).second; };
        sm.subgrad = [gs](const Vec& u) {
          Vec g(u.size(), 0.0);
          gs->add_hinge_grad(g, u, -1, 1.0);
          return g;
        };
        sp.eval = [gs, p](const Vec& u) { return gs->hinge_means(u).first - p; };
        sp.subgrad = [gs](const Vec& u) {
          Vec g(u.size(), 0.0);
          gs->add_hinge_grad(g, u, +1, 1.0);
          return g;
        };
        lower = mu_shift(sm, sp, shift);

        ConvexFn up_plus, up_minus;
        up_plus.eval = [gs](const Vec& u) { return gs->hinge_means(u).first; };
        up_plus.subgrad = sp.subgrad;
        up_minus.eval = [gs, p, margin](const Vec& u) {
          return gs->hinge_means(u).second + p + margin;
        };
        up_minus.subgrad = sm.subgrad;
        upper = mu_shift(up_plus, up_minus, shift);
      } else {
        ConvexFn mean, zero = constant_fn(0.0);
        mean.eval = [gs](const Vec& u) { return gs->sigmoid_mean(u); };
        mean.subgrad = [gs](const Vec& u) {
          Vec g(u.size(), 0.0);
          gs->add_sigmoid_grad(g, u, 1.0);
          return g;
        };
        ConvexFn mean_minus_p = mean;
        mean_minus_p.eval = [gs, p](const Vec& u) { return gs->sigmoid_mean(u) - p; };
        lower = mu_shift(zero, mean_minus_p, shift);
        upper = mu_shift(mean, constant_fn(p + margin), shift);
      }
      lower.plus.mu = lower.minus.mu = rho;
      upper.plus.mu = upper.minus.mu = rho;
      out.constraints.push_back(std::move(lower));
      out.constraints.push_back(std::move(upper));
    }
  }
  return out;
}

std::vector<DCFn> wpdp_constraints(const Dataset& data, const Interval& interval,
                                   double kappa, double theta_hat,
                                   SurrogateKind surrogate, double rho,
                                   std::shared_ptr<ScoreCache> cache) {
  if (kappa < 0.0 || kappa > 1.0) throw ProblemError("kappa must lie in [0,1]");
  if (surrogate == SurrogateKind::QuadraticPairwise) {
    throw ProblemError("wpdp constraints support hinge or sigmoid surrogates");
  }
  auto ctx = ensure_cache(std::move(cache), data);
  const auto rows = group_rows(data);
  const double alpha = interval.alpha, beta = interval.beta;
  const double margin = kappa * interval.width();
  const double shift =
      rho + (surrogate == SurrogateKind::Sigmoid
                 ? 2.0 * sigmoid_curvature_bound(data, false)
                 : 0.0);

  auto make_gs = [&](int k) {
    auto gs = std::make_shared<GroupSurrogate>();
    gs->ctx = ctx;
    gs->rows = rows[k - 1];
    gs->theta_index = -1;
    gs->theta_const = theta_hat;
    gs->d = data.d();
    return gs;
  };

  std::vector<DCFn> out;
  for (int k = 1; k <= data.num_groups(); ++k) {
    for (int kp = 1; kp <= data.num_groups(); ++kp) {
      if (kp == k) continue;
      auto ga = make_gs(k);
      auto gb = make_gs(kp);

      DCFn c;
      if (surrogate == SurrogateKind::HingeWindow) {
        // side(g, u, cst) = mean sigma+ + max(mean sigma- + cst, mean sigma+);
        // ties in the max go to the first branch.
        auto side_eval = [](const GroupSurrogate& g, const Vec& u, double cst) {
          const auto [sp, sm] = g.hinge_means(u);
          return sp + std::max(sm + cst, sp);
        };
        auto side_grad = [](const GroupSurrogate& g, Vec& out_g, const Vec& u,
                            double cst) {
          const auto [sp, sm] = g.hinge_means(u);
          g.add_hinge_grad(out_g, u, +1, 1.0);
          if (sm + cst >= sp) {
            g.add_hinge_grad(out_g, u, -1, 1.0);
          } else {
            g.add_hinge_grad(out_g, u, +1, 1.0);
          }
        };
        ConvexFn plus, minus;
        plus.eval = [ga, gb, alpha, beta, side_eval](const Vec& u) {
          return side_eval(*ga, u, alpha) + side_eval(*gb, u, beta);
        };
        plus.subgrad = [ga, gb, alpha, beta, side_grad](const Vec& u) {
          Vec g(u.size(), 0.0);
          side_grad(*ga, g, u, alpha);
          side_grad(*gb, g, u, beta);
          return g;
        };
        minus.eval = [ga, gb, alpha, beta, margin, side_eval](const Vec& u) {
          return side_eval(*gb, u, alpha) + side_eval(*ga, u, beta) + margin;
        };
        minus.subgrad = [ga, gb, alpha, beta, side_grad](const Vec& u) {
          Vec g(u.size(), 0.0);
          side_grad(*gb, g, u, alpha);
          side_grad(*ga, g, u, beta);
          return g;
        };
        c = mu_shift(plus, minus, shift);
      } else {
        // max(-mean sigma, -cst); ties go to the first (mean) branch
        auto neg_eval = [](const GroupSurrogate& g, const Vec& u, double cst) {
          return std::max(-g.sigmoid_mean(u), -cst);
        };
        auto neg_grad = [](const GroupSurrogate& g, Vec& out_g, const Vec& u,
                           double cst) {
          if (-g.sigmoid_mean(u) >= -cst) g.add_sigmoid_grad(out_g, u, -1.0);
        };
        ConvexFn plus, minus;
        plus.eval = [ga, gb, alpha, beta, neg_eval](const Vec& u) {
          return neg_eval(*ga, u, alpha) + neg_eval(*gb, u, beta);
        };
        plus.subgrad = [ga, gb, alpha, beta, neg_grad](const Vec& u) {
          Vec g(u.size(), 0.0);
          neg_grad(*ga, g, u, alpha);
          neg_grad(*gb, g, u, beta);
          return g;
        };
        minus.eval = [ga, gb, alpha, beta, margin, neg_eval](const Vec& u) {
          return neg_eval(*ga, u, beta) + neg_eval(*gb, u, alpha) + margin;
        };
        minus.subgrad = [ga, gb, alpha, beta, neg_grad](const Vec& u) {
          Vec g(u.size(), 0.0);
          neg_grad(*ga, g, u, beta);
          neg_grad(*gb, g, u, alpha);
          return g;
        };
        c = mu_shift(plus, minus, shift);
      }
      c.plus.mu = c.minus.mu = rho;
      out.push_back(std::move(c));
    }
  }
  return out;
}

namespace {

// Mean of the quadratic surrogate (1+x)^2/2 over pairs (i in A, j in B)
// with x = h_i - h_j, reduced to first/second score moments: O(n) per eval.
struct QuadPairTerm {
  std::vector<int> a_rows, b_rows;

  double value(const Vec& scores) const {
    double ma = 0, qa = 0, mb = 0, qb = 0;
    for (int i : a_rows) {
      ma += scores[i];
      qa += scores[i] * scores[i];
    }
    for (int j : b_rows) {
      mb += scores[j];
      qb += scores[j] * scores[j];
    }
    ma /= a_rows.size();
    qa /= a_rows.size();
    mb /= b_rows.size();
    qb /= b_rows.size();
    return 0.5 * (1.0 + qa + qb + 2.0 * ma - 2.0 * mb - 2.0 * ma * mb);
  }

  // coeff[i] += d(mean sigma)/d h_i
  void add_score_grad(Vec& coeff, const Vec& scores) const {
    double ma = 0, mb = 0;
    for (int i : a_rows) ma += scores[i];
    for (int j : b_rows) mb += scores[j];
    ma /= a_rows.size();
    mb /= b_rows.size();
    const double inv_a = 1.0 / a_rows.size();
    const double inv_b = 1.0 / b_rows.size();
    for (int i : a_rows) coeff[i] += inv_a * (1.0 + scores[i] - mb);
    for (int j : b_rows) coeff[j] -= inv_b * (1.0 + ma - scores[j]);
  }
};

}  // namespace

std::vector<DCFn> baseline_constraints(const Dataset& data, BaselineFamily family,
                                       double kappa, double rho,
                                       std::shared_ptr<ScoreCache> cache) {
  if (kappa < 0.0) throw ProblemError("kappa must be nonnegative");
  auto ctx = ensure_cache(std::move(cache), data);
  const auto rows = group_rows(data);
  std::vector<PosNegRows> split_rows(data.num_groups());
  for (int k = 0; k < data.num_groups(); ++k) {
    split_rows[k] = pos_neg_rows(data, &rows[k]);
  }
  const int d = data.d();

  auto require = [&](const std::vector<int>& r, const std::string& what) {
    if (r.empty()) throw ProblemError("required subgroup empty: " + what);
  };

  std::vector<DCFn> out;
  for (int k = 1; k <= data.num_groups(); ++k) {
    for (int kp = 1; kp <= data.num_groups(); ++kp) {
      if (kp == k) continue;
      auto terms = std::make_shared<std::vector<QuadPairTerm>>();
      double constant = 0.0;
      switch (family) {
        case BaselineFamily::GroupAUC:
          terms->push_back({rows[k - 1], rows[kp - 1]});
          constant = -0.5 - kappa;
          break;
        case BaselineFamily::InterGroup: {
          const auto& sk = split_rows[k - 1];
          const auto& skp = split_rows[kp - 1];
          require(sk.pos, "positives of group " + std::to_string(k));
          require(skp.neg, "negatives of group " + std::to_string(kp));
          require(sk.neg, "negatives of group " + std::to_string(k));
          require(skp.pos, "positives of group " + std::to_string(kp));
          terms->push_back({sk.pos, skp.neg});
          terms->push_back({sk.neg, skp.pos});
          constant = -1.0 - kappa;
          break;
        }
        case BaselineFamily::IntraGroup: {
          const auto& sk = split_rows[k - 1];
          const auto& skp = split_rows[kp - 1];
          require(sk.pos, "positives of group " + std::to_string(k));
          require(sk.neg, "negatives of group " + std::to_string(k));
          require(skp.pos, "positives of group " + std::to_string(kp));
          require(skp.neg, "negatives of group " + std::to_string(kp));
          terms->push_back({sk.pos, sk.neg});
          terms->push_back({skp.neg, skp.pos});
          constant = -1.0 - kappa;
          break;
        }
      }

      ConvexFn plus;
      plus.eval = [ctx, terms, constant](const Vec& u) {
        const auto scores = ctx->scores(u);
        double v = constant;
        for (const auto& t : *terms) v += t.value(*scores);
        return v;
      };
      plus.subgrad = [ctx, terms, d](const Vec& u) {
        const auto scores = ctx->scores(u);
        const Dataset& ds = ctx->data();
        Vec coeff(ds.n(), 0.0);
        for (const auto& t : *terms) t.add_score_grad(coeff, *scores);
        Vec g(u.size(), 0.0);
        for (int i = 0; i < ds.n(); ++i) {
          if (coeff[i] != 0.0) add_scaled_cross(g, d, ds.row(i), ds.group(i), coeff[i]);
        }
        return g;
      };
      DCFn c = mu_shift(plus, constant_fn(0.0), rho);
      c.plus.mu = c.minus.mu = rho;
      out.push_back(std::move(c));
    }
  }
  return out;
}

DCFn regularized_objective(const Dataset& data, ConstraintFamily kind,
                           double lambda, const Interval& interval,
                           const std::optional<PGrid>& pgrid,
                           std::optional<double> theta_hat,
                           SurrogateKind surrogate, double rho, LossKind loss,
                           std::shared_ptr<ScoreCache> cache) {
  if (lambda < 0.0) throw ProblemError("lambda must be nonnegative");
  if (kind != ConstraintFamily::RegularizedPDP &&
      kind != ConstraintFamily::RegularizedWPDP) {
    throw ProblemError("regularized objective kind must be pdp or wpdp");
  }
  if (surrogate == SurrogateKind::QuadraticPairwise) {
    throw ProblemError("regularized penalties support hinge or sigmoid surrogates");
  }
  auto ctx = ensure_cache(std::move(cache), data);
  DCFn erm = erm_objective(data, loss, rho, ctx);

  const auto rows = group_rows(data);
  const int model_len = LinearCrossModel::weight_len(data.d());
  const int d = data.d();
  const int G = data.num_groups();
  const double width = interval.width();
  const double alpha = interval.alpha, beta = interval.beta;

  auto surrogate_mean = [ctx, surrogate](const std::vector<int>& r, double th,
                                         const Vec& u) {
    const auto scores = ctx->scores(u);
    double s = 0.0;
    for (int i : r) {
      s += surrogate == SurrogateKind::HingeWindow
               ? hinge_surrogate((*scores)[i] - th).value
               : sigmoid_surrogate((*scores)[i] - th).value;
    }
    return s / r.size();
  };
  // gradient of the group mean wrt (w, theta) scaled by c; theta_index < 0
  // when the threshold is constant
  auto add_mean_grad = [ctx, surrogate, d](Vec& g, const std::vector<int>& r,
                                           double th, int theta_index, double c,
                                           const Vec& u) {
    const auto scores = ctx->scores(u);
    const Dataset& ds = ctx->data();
    const double inv = c / r.size();
    for (int i : r) {
      double slope;
      if (surrogate == SurrogateKind::HingeWindow) {
        const auto s = hinge_surrogate((*scores)[i] - th);
        slope = s.plus_slope - s.minus_slope;
      } else {
        slope = sigmoid_surrogate((*scores)[i] - th).derivative;
      }
      if (slope == 0.0) continue;
      add_scaled_cross(g, d, ds.row(i), ds.group(i), slope * inv);
      if (theta_index >= 0) g[theta_index] -= slope * inv;
    }
  };

  ConvexFn whole;
  if (kind == ConstraintFamily::RegularizedPDP) {
    if (!pgrid || pgrid->values.empty()) {
      throw ProblemError("regularized pdp needs a pgrid");
    }
    const auto ps = pgrid->values;
    const double scale = 2.0 * lambda / width;
    whole.eval = [erm, rows, ps, scale, model_len, surrogate_mean](const Vec& u) {
      double pen = 0.0;
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const double th = u[model_len + static_cast<int>(j)];
        for (const auto& r : rows) {
          pen = std::max(pen, std::abs(surrogate_mean(r, th, u) - ps[j]));
        }
      }
      return erm.value(u) + scale * pen;
    };
    whole.subgrad = [erm, rows, ps, scale, model_len, surrogate_mean, add_mean_grad,
                     G](const Vec& u) {
      double best = -1.0;
      int best_j = 0, best_k = 0;
      double best_diff = 0.0;
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const double th = u[model_len + static_cast<int>(j)];
        for (int k = 0; k < G; ++k) {
          const double diff = surrogate_mean(rows[k], th, u) - ps[j];
          if (std::abs(diff) > best) {
            best = std::abs(diff);
            best_j = static_cast<int>(j);
            best_k = k;
            best_diff = diff;
          }
        }
      }
      Vec g = erm.subgrad(u);
      const double sign = best_diff > 0 ? 1.0 : (best_diff < 0 ? -1.0 : 0.0);
      if (sign != 0.0) {
        const double th = u[model_len + best_j];
        add_mean_grad(g, rows[best_k], th, model_len + best_j, scale * sign, u);
      }
      return g;
    };
  } else {
    const double th = theta_hat.value_or(0.0);
    const double scale = lambda / width;
    auto pair_value = [surrogate_mean, rows, th, alpha, beta](const Vec& u, int a,
                                                              int b) {
      const double ma = surrogate_mean(rows[a], th, u);
      const double mb = surrogate_mean(rows[b], th, u);
      return std::min(ma, beta) - std::min(ma, alpha) - std::min(mb, beta) +
             std::min(mb, alpha);
    };
    whole.eval = [erm, pair_value, scale, G](const Vec& u) {
      double pen = 0.0;
      for (int a = 0; a < G; ++a) {
        for (int b = a + 1; b < G; ++b) {
          pen = std::max(pen, std::abs(pair_value(u, a, b)));
        }
      }
      return erm.value(u) + scale * pen;
    };
    whole.subgrad = [erm, pair_value, surrogate_mean, add_mean_grad, rows, th,
                     alpha, beta, scale, G](const Vec& u) {
      double best = -1.0;
      int best_a = 0, best_b = 1;
      double best_val = 0.0;
      for (int a = 0; a < G; ++a) {
        for (int b = a + 1; b < G; ++b) {
          const double v = pair_value(u, a, b);
          if (std::abs(v) > best) {
            best = std::abs(v);
            best_a = a;
            best_b = b;
            best_val = v;
          }
        }
      }
      Vec g = erm.subgrad(u);
      const double sign = best_val > 0 ? 1.0 : (best_val < 0 ? -1.0 : 0.0);
      if (sign != 0.0) {
        // d/du [min(m,c)] = grad(m) when m <= c (ties take the mean branch)
        const double ma = surrogate_mean(rows[best_a], th, u);
        const double mb = surrogate_mean(rows[best_b], th, u);
        double ca = 0.0;
        if (ma <= beta) ca += 1.0;
        if (ma <= alpha) ca -= 1.0;
        double cb = 0.0;
        if (mb <= beta) cb -= 1.0;
        if (mb <= alpha) cb += 1.0;
        if (ca != 0.0) add_mean_grad(g, rows[best_a], th, -1, scale * sign * ca, u);
        if (cb != 0.0) add_mean_grad(g, rows[best_b], th, -1, scale * sign * cb, u);
      }
      return g;
    };
  }
  whole.mu = 0.0;
  return DCFn{std::move(whole), constant_fn(0.0)};
}

DecisionVector feasible_start(const DCProblem& parts) {
  const auto& meta = parts.meta;
  Vec w(parts.layout.model_len, 0.0);
  Vec thetas;
  if (meta.family == ConstraintFamily::PDP ||
      meta.family == ConstraintFamily::RegularizedPDP) {
    const double half_margin = meta.family == ConstraintFamily::PDP
                                   ? 0.5 * meta.kappa * meta.interval.width()
                                   : 0.0;
    if (meta.family == ConstraintFamily::PDP && meta.kappa == 0.0) {
      throw ProblemError("pdp with kappa = 0 admits only a boundary-tight start");
    }
    for (double p : meta.pgrid) {
      const double mass = p + half_margin;
      thetas.push_back(meta.surrogate == SurrogateKind::HingeWindow
                           ? 0.5 - mass
                           : -logit(mass));
    }
  }
  DecisionVector start = pack(w, thetas);
  if (start.layout.total() != parts.layout.total()) {
    throw ProblemError("feasible start layout mismatch");
  }

  const Vec projected = parts.domain.project(start.packed);
  if (projected != start.packed) {
    throw ProblemError("trivially fair start lies outside the feasible domain");
  }
  for (std::size_t i = 0; i < parts.constraints.size(); ++i) {
    const double v = parts.constraints[i].value(start.packed);
    if (!(v <= 1e-12)) {
      throw ProblemError("feasible start verification failed on constraint " +
                         std::to_string(i) + " (value " + std::to_string(v) + ")");
    }
  }
  return start;
}

DCProblem build_problem(std::shared_ptr<const Dataset> data, const BuildSpec& spec) {
  if (!data) throw ProblemError("null dataset");
  DCProblem prob;
  prob.layout.model_len = LinearCrossModel::weight_len(data->d());
  prob.layout.theta_len = 0;
  prob.domain = FeasibleDomain::all_space();
  prob.meta.family = spec.family;
  prob.meta.surrogate = spec.surrogate;
  prob.meta.kappa = spec.kappa;
  prob.meta.lambda = spec.lambda;
  prob.meta.interval = spec.interval;
  prob.meta.theta_hat = spec.theta_hat;
  prob.meta.rho = spec.rho;

  auto cache = std::make_shared<ScoreCache>(data, prob.layout.model_len);

  switch (spec.family) {
    case ConstraintFamily::PDP: {
      if (spec.kappa == 0.0) {
        throw ProblemError("pdp with kappa = 0 admits only a boundary-tight start");
      }
      const PGrid grid = make_pgrid(spec.interval, spec.kappa, spec.pgrid_count);
      prob.meta.pgrid = grid.values;
      auto built = pdp_constraints(*data, spec.interval, spec.kappa, grid,
                                   spec.surrogate, spec.rho, cache);
      prob.constraints = std::move(built.constraints);
      prob.layout.theta_len = built.theta_len;
      prob.objective = erm_objective(*data, spec.loss, spec.rho, cache);
      break;
    }
    case ConstraintFamily::WPDP:
      prob.constraints = wpdp_constraints(*data, spec.interval, spec.kappa,
                                          spec.theta_hat, spec.surrogate,
                                          spec.rho, cache);
      prob.objective = erm_objective(*data, spec.loss, spec.rho, cache);
      break;
    case ConstraintFamily::GroupAUC:
    case ConstraintFamily::InterGroup:
    case ConstraintFamily::IntraGroup: {
      const auto fam = spec.family == ConstraintFamily::GroupAUC
                           ? BaselineFamily::GroupAUC
                           : (spec.family == ConstraintFamily::InterGroup
                                  ? BaselineFamily::InterGroup
                                  : BaselineFamily::IntraGroup);
      prob.meta.surrogate = SurrogateKind::QuadraticPairwise;
      prob.constraints = baseline_constraints(*data, fam, spec.kappa, spec.rho, cache);
      prob.objective = erm_objective(*data, spec.loss, spec.rho, cache);
      break;
    }
    case ConstraintFamily::RegularizedPDP: {
      const PGrid grid = make_pgrid(spec.interval, 0.0, spec.pgrid_count);
      prob.meta.pgrid = grid.values;
      prob.layout.theta_len = static_cast<int>(grid.values.size());
      prob.objective = regularized_objective(*data, spec.family, spec.lambda,
                                             spec.interval, grid, std::nullopt,
                                             spec.surrogate, spec.rho, spec.loss,
                                             cache);
      break;
    }
    case ConstraintFamily::RegularizedWPDP:
      prob.objective = regularized_objective(*data, spec.family, spec.lambda,
                                             spec.interval, std::nullopt,
                                             spec.theta_hat, spec.surrogate,
                                             spec.rho, spec.loss, cache);
      break;
    case ConstraintFamily::Unconstrained:
      prob.objective = erm_objective(*data, spec.loss, spec.rho, cache);
      break;
  }
  prob.start = feasible_start(prob);
  return prob;
}

std::string meta_to_json(const ProblemMeta& meta) {
  char buf[64];
  auto f = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "{\"family\": \"" << to_string(meta.family) << "\", \"surrogate\": \""
     << to_string(meta.surrogate) << "\", \"kappa\": " << f(meta.kappa)
     << ", \"lambda\": " << f(meta.lambda) << ", \"interval\": ["
     << f(meta.interval.alpha) << ", " << f(meta.interval.beta)
     << "], \"theta_hat\": " << f(meta.theta_hat) << ", \"rho\": " << f(meta.rho)
     << ", \"pgrid\": [";
  for (std::size_t i = 0; i < meta.pgrid.size(); ++i) {
    os << (i ? ", " : "") << f(meta.pgrid[i]);
  }
  os << "]}";
  return os.str();
}

}  // namespace dcfair
