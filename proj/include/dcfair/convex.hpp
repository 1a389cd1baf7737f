#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dcfair/model.hpp"

namespace dcfair {

struct ConvexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Value + subgradient oracle of a convex function. `mu` is a strong
// convexity modulus the function is guaranteed to satisfy (0 = merely
// convex); `lipschitz_bound` is an optional bound on subgradient norms
// used by the theoretical schedule.
struct ConvexFn {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> subgrad;
  double mu = 0.0;
  std::optional<double> lipschitz_bound;
};

// Difference-of-convex pair f = plus - minus.
struct DCFn {
  ConvexFn plus;
  ConvexFn minus;

  double value(const Vec& v) const { return plus.eval(v) - minus.eval(v); }
  Vec subgrad(const Vec& v) const {
    Vec g = plus.subgrad(v);
    axpy(g, -1.0, minus.subgrad(v));
    return g;
  }
};

enum class SurrogateKind { HingeWindow, Sigmoid, QuadraticPairwise };

// Hinge-window surrogate sigma(x) = clamp(x+0.5, 0, 1) split into its
// convex parts sigma+ = max(x+0.5, 0) and sigma- = max(x-0.5, 0).
// Slopes are right derivatives (1 at the kinks).
struct HingeSurrogate {
  double value;
  double plus_value;
  double minus_value;
  double plus_slope;
  double minus_slope;
};
HingeSurrogate hinge_surrogate(double x);

struct SigmoidSurrogate {
  double value;
  double derivative;
};
// Numerically stable logistic sigma(x) = exp(x)/(1+exp(x)).
SigmoidSurrogate sigmoid_surrogate(double x);

// Shifts both components by (rho/2)||u||^2 over the full packed vector;
// the DC value is unchanged and each component's mu grows by rho.
DCFn mu_shift(const ConvexFn& f_plus, const ConvexFn& f_minus, double rho);

// Adds (rho/2)||u||^2 to a single convex oracle.
ConvexFn add_quadratic(const ConvexFn& f, double rho);

ConvexFn constant_fn(double c);

// Convex majorant of f at `anchor`: plus(v) - [minus(anchor) + <s, v-anchor>]
// with s an element of the minus subdifferential at the anchor. Touches f
// at the anchor and upper-bounds it everywhere.
ConvexFn linearize_minus(const DCFn& f, const Vec& anchor);

struct MaxEval {
  double value;
  Vec subgrad;
  int argmax_index;
};
// Pointwise max over the list; ties break to the lowest index.
MaxEval max_constraint(const std::vector<ConvexFn>& constraints, const Vec& v);

// Value-only scan (no subgradient) for trace bookkeeping.
double max_value(const std::vector<ConvexFn>& constraints, const Vec& v);
double max_dc_value(const std::vector<DCFn>& constraints, const Vec& v);

// Lipschitz estimate used when no bound is supplied: 2x the largest
// subgradient norm over 256 points in a radius-10 ball around `center`.
double estimate_lipschitz(const ConvexFn& f, const Vec& center,
                          std::uint64_t seed = 0);

}  // namespace dcfair
