#include <cmath>

#include "dcfair/convex.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dcfair;
using testutil::random_vec;

TEST_CASE("hinge surrogate: pointwise examples") {
  const auto c = hinge_surrogate(0.0);
  CHECK(c.value == 0.5);
  CHECK(c.plus_value == 0.5);
  CHECK(c.minus_value == 0.0);

  CHECK(hinge_surrogate(-0.5).value == 0.0);
  CHECK(hinge_surrogate(-0.5).plus_slope == 1.0);  // right derivative at the kink

  const auto d = hinge_surrogate(0.73);
  CHECK(d.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.plus_value == doctest::Approx(0.73 + 0.5).epsilon(1e-15));
  CHECK(d.minus_value == doctest::Approx(0.73 - 0.5).epsilon(1e-15));
}

TEST_CASE("hinge identity on 1000 points") {
  Rng64 rng(1);
  double prev_x = -4.0, prev_v = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double x = -3.0 + 6.0 * rng.next_double();
    const auto s = hinge_surrogate(x);
    const double clamp = std::min(std::max(x + 0.5, 0.0), 1.0);
    CHECK(s.plus_value - s.minus_value == clamp);  // exact
    CHECK(s.value >= 0.0);
    CHECK(s.value <= 1.0);
    if (x >= prev_x) CHECK(s.value >= prev_v - 1e-15);
    prev_x = x;
    prev_v = s.value;
  }
}

TEST_CASE("sigmoid surrogate") {
  CHECK(sigmoid_surrogate(0.0).value == 0.5);
  CHECK(sigmoid_surrogate(40.0).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::isfinite(sigmoid_surrogate(1000.0).value));
  CHECK(std::isfinite(sigmoid_surrogate(-1000.0).value));
  const double ref = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK(sigmoid_surrogate(1.0).value == doctest::Approx(ref).epsilon(1e-15));

  Rng64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const double x = 6.0 * rng.next_gaussian();
    const double h = 1e-5;
    const double fd =
        (sigmoid_surrogate(x + h).value - sigmoid_surrogate(x - h).value) / (2 * h);
    CHECK(sigmoid_surrogate(x).derivative ==
          doctest::Approx(fd).epsilon(1e-6));
  }
}

namespace {

ConvexFn affine_fn(const Vec& a, double b) {
  ConvexFn f;
  f.eval = [a, b](const Vec& u) { return dot(a, u) + b; };
  f.subgrad = [a](const Vec&) { return a; };
  return f;
}

ConvexFn quad_fn(const Vec& center, double scale) {
  ConvexFn f;
  f.eval = [center, scale](const Vec& u) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      s += (u[i] - center[i]) * (u[i] - center[i]);
    }
    return 0.5 * scale * s;
  };
  f.subgrad = [center, scale](const Vec& u) {
    Vec g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = scale * (u[i] - center[i]);
    return g;
  };
  f.mu = scale;
  return f;
}

}  // namespace

TEST_CASE("mu_shift") {
  Rng64 rng(3);
  const ConvexFn zero = constant_fn(0.0);

  SUBCASE("rho = 0 is the identity transform") {
    const DCFn f = mu_shift(quad_fn({0, 0}, 1.0), zero, 0.0);
    const Vec u = {1.5, -2.0};
    CHECK(f.plus.eval(u) == quad_fn({0, 0}, 1.0).eval(u));
    CHECK(f.minus.eval(u) == 0.0);
  }

  SUBCASE("zero pair with rho = 2") {
    const DCFn f = mu_shift(zero, zero, 2.0);
    const Vec u = {1.0, 1.0};
    CHECK(f.plus.eval(u) == 2.0);
    CHECK(f.minus.eval(u) == 2.0);
    CHECK(f.value(u) == 0.0);
    CHECK(f.plus.mu == 2.0);
  }

  SUBCASE("DC value unchanged on random pairs") {
    for (int t = 0; t < 30; ++t) {
      const Vec c1 = random_vec(3, rng), c2 = random_vec(3, rng);
      const DCFn raw{quad_fn(c1, 0.7), quad_fn(c2, 0.4)};
      const DCFn shifted = mu_shift(raw.plus, raw.minus, 1.3);
      const Vec u = random_vec(3, rng, 2.0);
      CHECK(shifted.value(u) == doctest::Approx(raw.value(u)).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(mu_shift(zero, zero, -0.1), ConvexError);
}

TEST_CASE("linearize_minus") {
  Rng64 rng(4);

  SUBCASE("affine minus reproduces f everywhere") {
    const Vec a = random_vec(3, rng);
    const DCFn f{quad_fn(random_vec(3, rng), 0.9), affine_fn(a, 0.3)};
    const Vec anchor = random_vec(3, rng);
    const ConvexFn g = linearize_minus(f, anchor);
    for (int t = 0; t < 50; ++t) {
      const Vec v = random_vec(3, rng, 2.0);
      CHECK(g.eval(v) == doctest::Approx(f.value(v)).epsilon(1e-12));
    }
  }

  SUBCASE("touches at the anchor and majorizes elsewhere") {
    for (int t = 0; t < 20; ++t) {
      const DCFn f{quad_fn(random_vec(3, rng), 1.2), quad_fn(random_vec(3, rng), 0.8)};
      const Vec anchor = random_vec(3, rng);
      const ConvexFn g = linearize_minus(f, anchor);
      CHECK(g.eval(anchor) == doctest::Approx(f.value(anchor)).epsilon(1e-12));
      for (int s = 0; s < 100; ++s) {
        const Vec v = random_vec(3, rng, 3.0);
        CHECK(g.eval(v) >= f.value(v) - 1e-10);
      }
      CHECK(g.mu == f.plus.mu);
    }
  }
}

TEST_CASE("max_constraint") {
  const Vec v = {0.5, -1.0};

  SUBCASE("single entry") {
    const auto m = max_constraint({affine_fn({1, 0}, 0.0)}, v);
    CHECK(m.value == 0.5);
    CHECK(m.argmax_index == 0);
    CHECK(m.subgrad == Vec{1, 0});
  }

  SUBCASE("exact tie picks the lowest index") {
    const auto m = max_constraint({constant_fn(1.0), constant_fn(1.0)}, v);
    CHECK(m.argmax_index == 0);
  }

  SUBCASE("five random affines match brute force") {
    Rng64 rng(6);
    for (int t = 0; t < 30; ++t) {
      std::vector<ConvexFn> fns;
      std::vector<std::pair<Vec, double>> raw;
      for (int i = 0; i < 5; ++i) {
        const Vec a = random_vec(2, rng);
        const double b = rng.next_gaussian();
        raw.push_back({a, b});
        fns.push_back(affine_fn(a, b));
      }
      const Vec x = random_vec(2, rng);
      double best = -1e300;
      int best_i = -1;
      for (int i = 0; i < 5; ++i) {
        const double val = dot(raw[i].first, x) + raw[i].second;
        if (val > best) {
          best = val;
          best_i = i;
        }
      }
      const auto m = max_constraint(fns, x);
      CHECK(m.value == doctest::Approx(best).epsilon(1e-12));
      CHECK(m.argmax_index == best_i);
    }
  }

  CHECK_THROWS_AS(max_constraint({}, v), ConvexError);
}
