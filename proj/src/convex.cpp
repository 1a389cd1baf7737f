#include "dcfair/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcfair/prng.hpp"

namespace dcfair {

HingeSurrogate hinge_surrogate(double x) {
  HingeSurrogate s;
  s.plus_value = std::max(x + 0.5, 0.0);
  s.minus_value = std::max(x - 0.5, 0.0);
  s.value = s.plus_value - s.minus_value;
  s.plus_slope = (x >= -0.5) ? 1.0 : 0.0;
  s.minus_slope = (x >= 0.5) ? 1.0 : 0.0;
  return s;
}

SigmoidSurrogate sigmoid_surrogate(double x) {
  SigmoidSurrogate s;
  if (x >= 0.0) {
    s.value = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s.value = e / (1.0 + e);
  }
  s.derivative = s.value * (1.0 - s.value);
  return s;
}

ConvexFn add_quadratic(const ConvexFn& f, double rho) {
  if (rho < 0.0) throw ConvexError("negative quadratic shift");
  if (rho == 0.0) return f;
  ConvexFn out;
  out.eval = [f = f.eval, rho](const Vec& u) { return f(u) + 0.5 * rho * sqnorm(u); };
  out.subgrad = [g = f.subgrad, rho](const Vec& u) {
    Vec s = g(u);
    axpy(s, rho, u);
    return s;
  };
  out.mu = f.mu + rho;
  out.lipschitz_bound = std::nullopt;  // unbounded gradient on R^n
  return out;
}

DCFn mu_shift(const ConvexFn& f_plus, const ConvexFn& f_minus, double rho) {
  if (rho < 0.0) throw ConvexError("mu_shift requires rho >= 0");
  return DCFn{add_quadratic(f_plus, rho), add_quadratic(f_minus, rho)};
}

ConvexFn constant_fn(double c) {
  ConvexFn f;
  f.eval = [c](const Vec&) { return c; };
  f.subgrad = [](const Vec& u) { return Vec(u.size(), 0.0); };
  f.mu = 0.0;
  f.lipschitz_bound = 0.0;
  return f;
}

ConvexFn linearize_minus(const DCFn& f, const Vec& anchor) {
  for (double v : anchor) {
    if (!std::isfinite(v)) throw ConvexError("linearize_minus: non-finite anchor");
  }
  const double c = f.minus.eval(anchor);
  Vec s = f.minus.subgrad(anchor);
  const double offset = c - dot(s, anchor);  // minus(anchor) - <s, anchor>
  ConvexFn g;
  g.eval = [plus = f.plus.eval, s, offset](const Vec& v) {
    return plus(v) - offset - dot(s, v);
  };
  g.subgrad = [pg = f.plus.subgrad, s](const Vec& v) {
    Vec out = pg(v);
    axpy(out, -1.0, s);
    return out;
  };
  g.mu = f.plus.mu;
  return g;
}

MaxEval max_constraint(const std::vector<ConvexFn>& constraints, const Vec& v) {
  if (constraints.empty()) throw ConvexError("max_constraint: empty list");
  int best = 0;
  double best_val = constraints[0].eval(v);
  for (int i = 1; i < static_cast<int>(constraints.size()); ++i) {
    const double val = constraints[i].eval(v);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  return MaxEval{best_val, constraints[best].subgrad(v), best};
}

double max_value(const std::vector<ConvexFn>& constraints, const Vec& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) m = std::max(m, c.eval(v));
  return m;
}

double max_dc_value(const std::vector<DCFn>& constraints, const Vec& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) m = std::max(m, c.value(v));
  return m;
}

double estimate_lipschitz(const ConvexFn& f, const Vec& center, std::uint64_t seed) {
  if (f.lipschitz_bound) return *f.lipschitz_bound;
  Rng64 rng(seed ^ 0x4cf5ad432745937fULL);
  double worst = 0.0;
  Vec p(center.size());
  for (int trial = 0; trial < 256; ++trial) {
    Vec dir(center.size());
    for (auto& e : dir) e = rng.next_gaussian();
    const double nrm = norm2(dir);
    const double radius = 10.0 * rng.next_double();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = center[i] + (nrm > 0 ? radius * dir[i] / nrm : 0.0);
    }
    worst = std::max(worst, norm2(f.subgrad(p)));
  }
  return 2.0 * worst;
}

}  // namespace dcfair
