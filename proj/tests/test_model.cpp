#include <filesystem>

#include "dcfair/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dcfair;
using testutil::random_vec;

TEST_CASE("featurize") {
  CHECK(featurize({2, -1}, 1) == Vec{1, 2, -1, 1, 2, -1});
  CHECK(featurize({0, 0, 0}, 5) == Vec{1, 0, 0, 0, 5, 0, 0, 0});
  CHECK(featurize({0.5}, 2) == Vec{1, 0.5, 2, 1.0});
}

TEST_CASE("score basics and dot-product oracle") {
  LinearCrossModel zero(2, Vec(6, 0.0));
  CHECK(score(zero, {3.0, 4.0}, 1) == 0.0);
  CHECK(score(zero, {-1.0, 7.0}, 2) == 0.0);

  Vec bias_only(6, 0.0);
  bias_only[0] = 1.0;
  LinearCrossModel biased(2, bias_only);
  CHECK(score(biased, {3.0, 4.0}, 2) == 1.0);

  Rng64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng.next_below(6));
    const Vec w = random_vec(2 * d + 2, rng);
    const Vec x = random_vec(d, rng);
    const int g = 1 + static_cast<int>(rng.next_below(3));
    LinearCrossModel m(d, w);
    CHECK(score(m, x, g) == doctest::Approx(testutil::naive_score(w, x, g)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(score(zero, {1.0}, 1), ModelError);
}

TEST_CASE("score is linear in the weights") {
  Rng64 rng(17);
  const int d = 4;
  for (int t = 0; t < 30; ++t) {
    const Vec w1 = random_vec(2 * d + 2, rng);
    const Vec w2 = random_vec(2 * d + 2, rng);
    const double a = rng.next_gaussian(), b = rng.next_gaussian();
    Vec wc(w1.size());
    for (std::size_t i = 0; i < wc.size(); ++i) wc[i] = a * w1[i] + b * w2[i];
    const Vec x = random_vec(d, rng);
    const int g = 1 + static_cast<int>(rng.next_below(2));
    const double lhs = score(LinearCrossModel(d, wc), x, g);
    const double rhs = a * score(LinearCrossModel(d, w1), x, g) +
                       b * score(LinearCrossModel(d, w2), x, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("pack/unpack") {
  const Vec w = {1, 2, 3, 4, 5, 6};
  const Vec th = {7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  const DecisionVector v = pack(w, th);
  CHECK(v.packed.size() == 16);
  CHECK(v.layout.model_len == 6);
  CHECK(v.layout.theta_len == 10);
  const auto [w2, t2] = unpack(v);
  CHECK(w2 == w);
  CHECK(t2 == th);

  const DecisionVector empty = pack(w, {});
  CHECK(empty.packed == w);

  Rng64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Vec a = random_vec(5, rng), b = random_vec(3, rng);
    const auto [ra, rb] = unpack(pack(a, b));
    CHECK(ra == a);
    CHECK(rb == b);
  }

  DecisionVector broken = v;
  broken.packed.pop_back();
  CHECK_THROWS_AS(unpack(broken), ModelError);
}

TEST_CASE("project") {
  const auto all = FeasibleDomain::all_space();
  CHECK(all.project({3, -4}) == Vec{3, -4});

  const auto ball = FeasibleDomain::l2_ball(1.0);
  const Vec p = ball.project({3, 4});
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.8));
  CHECK(ball.project({0.1, 0.2}) == Vec{0.1, 0.2});

  const auto box = FeasibleDomain::box({-1, -1}, {1, 1});
  CHECK(box.project({2, -0.5}) == Vec{1, -0.5});
}

TEST_CASE("project is idempotent and non-expansive") {
  Rng64 rng(11);
  const auto ball = FeasibleDomain::l2_ball(2.0);
  const auto box = FeasibleDomain::box({-1, -2, 0}, {1, 0, 3});
  for (int t = 0; t < 1000; ++t) {
    for (const FeasibleDomain* dom : {&ball, &box}) {
      const Vec u = random_vec(3, rng, 3.0);
      const Vec v = random_vec(3, rng, 3.0);
      const Vec pu = dom->project(u), pv = dom->project(v);
      const Vec ppu = dom->project(pu);
      for (std::size_t i = 0; i < pu.size(); ++i) {
        CHECK(ppu[i] == doctest::Approx(pu[i]).epsilon(1e-14));
      }
      double dp = 0, du = 0;
      for (std::size_t i = 0; i < pu.size(); ++i) {
        dp += (pu[i] - pv[i]) * (pu[i] - pv[i]);
        du += (u[i] - v[i]) * (u[i] - v[i]);
      }
      CHECK(dp <= du + 1e-12);
    }
  }
}

TEST_CASE("model json round-trip") {
  const auto path =
      (std::filesystem::temp_directory_path() / "dcfair_model_test.json").string();
  Rng64 rng(23);
  const Vec w = random_vec(8, rng);
  const Vec th = random_vec(4, rng);
  const DecisionVector v = pack(w, th);
  save_model_json(path, 3, v);
  const LoadedModel m = load_model_json(path);
  CHECK(m.d == 3);
  CHECK(m.decision.packed == v.packed);  // bit-exact via 17 significant digits
  CHECK(m.decision.layout.model_len == 8);
  CHECK(m.decision.layout.theta_len == 4);
  CHECK(m.model().weights == w);
}
