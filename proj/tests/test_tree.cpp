#include <doctest.h>

#include <random>

#include "hrg/error.hpp"
#include "hrg/mobius.hpp"
#include "hrg/tree.hpp"

using namespace hrg;

namespace {

// Points of the window ball p^S, one per draw.
PAdicPoint window_point(const Window& w, std::mt19937_64& rng) { return random_point(w.p(), w.d(), w.S(), rng); }

PAdicPoint scalar_point(int p, long long n, int m) { return shift(PAdicPoint::from_ints(p, {n}), m); }

}  // namespace

TEST_CASE("window shape") {
  const Window w(2, 3, 3);
  CHECK(w.branching() == 8);
  CHECK(w.leaf_count() == 512);
  CHECK(w.layer_size(3) == 1);
  CHECK(w.vertex_count() == 512 + 64 + 8 + 1);
  CHECK(w.children(w.root()).size() == 8);
  CHECK_THROWS_AS(Window(1, 1, 1), ConfigError);
  CHECK_THROWS_AS(w.parent(w.root()), DomainError);
}

TEST_CASE("ball_of, addresses and centers") {
  const Window w(2, 1, 3);
  CHECK(w.ball_of(PAdicPoint::origin(2, 1), 3) == w.root());
  // Digit at position -1 labels the step from layer 1 to layer 0.
  const BallAddress u = w.ball_of(scalar_point(2, 1, -1), 0);
  CHECK(u.path.back() == 1);
  CHECK(u.to_string() == "0:[0,0,1]");
  CHECK(BallAddress::parse(u.to_string()) == u);
  CHECK_THROWS_AS(BallAddress::parse("0:(1,2)"), ConfigError);
  CHECK_THROWS_AS(w.ball_of(scalar_point(2, 1, -4), 0), DomainError);

  const Window v(3, 2, 3);
  for (int k = 0; k <= 3; ++k)
    for (std::int64_t i = 0; i < v.layer_size(k); ++i) {
      const BallAddress b = v.address(k, i);
      CHECK(v.index(b) == i);
      CHECK(v.ball_of(v.center(b), k) == b);
      if (k < 3) CHECK(v.contains(v.parent(b), b));
    }
}

TEST_CASE("splitting layer equals the distance exponent") {
  std::mt19937_64 rng(17);
  for (int p : {2, 3, 5}) {
    for (int d : {1, 2}) {
      const Window w(p, d, 3);
      for (int t = 0; t < 1000; ++t) {
        const PAdicPoint x = window_point(w, rng), y = window_point(w, rng);
        const PNorm dist = distance(x, y);
        const int k = dist.zero ? INT_MIN : dist.exp;
        if (k < 1) {
          CHECK(w.ball_of(x, 0) == w.ball_of(y, 0));
          continue;
        }
        CHECK(w.ball_of(x, k) == w.ball_of(y, k));
        CHECK_FALSE(w.ball_of(x, k - 1) == w.ball_of(y, k - 1));
        CHECK(w.join_layer(w.ball_of(x, 0), w.ball_of(y, 0)) == k);
      }
    }
  }
}

TEST_CASE("ball_of commutes with isometries") {
  std::mt19937_64 rng(8);
  const Window w(3, 2, 3);
  for (int t = 0; t < 300; ++t) {
    const PAdicPoint x = window_point(w, rng), a = window_point(w, rng);
    const int k = std::uniform_int_distribution<int>(0, 3)(rng);
    const PAdicPoint c = w.center(w.ball_of(x, k));
    CHECK(w.ball_of(neg(x), k) == w.ball_of(neg(c), k));
    CHECK(w.ball_of(add(x, a), k) == w.ball_of(add(c, a), k));
    const MobiusWord swap = MobiusWord(3, 2).permute({1, 0});
    CHECK(w.ball_of(*swap.apply(x), k) == w.ball_of(*swap.apply(c), k));
  }
}

TEST_CASE("volumes and integrals of locally constant functions") {
  CHECK(ball_volume(2, 3, 0) == 1.0);
  CHECK(ball_volume(2, 3, 1) == 8.0);
  const Window w(2, 1, 3);
  for (int k = 1; k <= 3; ++k) {
    const BallAddress u = w.address(k, 0);
    double s = 0.0;
    for (const auto& c : w.children(u)) s += ball_volume(2, 1, c.k);
    CHECK(s == ball_volume(2, 1, k));
  }
  CHECK(integrate(w, BallFunction{{{w.address(0, 3), 1.0}}}) == 1.0);
  CHECK(integrate(w, BallFunction{{{w.address(2, 1), 2.0}}}) == 8.0);
  BallFunction diff{{{w.address(1, 0), 1.0}}};
  CHECK_THROWS_AS(integrate(w, BallFunction{{{w.address(1, 0), 1.0}, {w.address(0, 0), -1.0}}}), DomainError);
  // Indicator of a layer-1 ball minus its children, as disjoint pieces.
  BallFunction parts;
  for (const auto& c : w.children(w.address(1, 0))) parts.terms.emplace_back(c, -1.0);
  CHECK(integrate(w, diff) + integrate(w, parts) == 0.0);
}

TEST_CASE("path overlap on the worked quadruple") {
  const int p = 3;
  const ExtPoint x1 = scalar_point(p, 0, 0), x2 = scalar_point(p, 1, 0), x3 = scalar_point(p, 3, 0),
                 x4 = scalar_point(p, 4, 0);
  CHECK(cross_ratio_exponent(x1, x2, x3, x4) == -2);
  CHECK(path_overlap_delta(x1, x2, x3, x4) == 2);
  // Inside a window every finite point is scaled into its own unit ball.
  const Window w(p, 1, 2);
  auto in = [&](const ExtPoint& x) -> ExtPoint { return shift(*x, -2); };
  CHECK(path_overlap_delta(w, in(x1), in(x2), in(x3), in(x4)) == 2);
  CHECK(path_overlap_delta(w, in(x1), in(x2), in(x4), in(x3)) == -2);
}

TEST_CASE("path overlap: lengths, orientation, disjointness and additivity") {
  std::mt19937_64 rng(21);
  for (int p : {2, 3}) {
    for (int d : {1, 2}) {
      const Window w(p, d, 3);
      for (int t = 0; t < 300; ++t) {
        std::vector<ExtPoint> x;
        for (int i = 0; i < 4; ++i) x.push_back(window_point(w, rng));
        bool distinct = true;
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j) distinct = distinct && !(w.ball_of(*x[i], 0) == w.ball_of(*x[j], 0));
        if (!distinct) continue;
        const int k = w.join_layer(w.ball_of(*x[0], 0), w.ball_of(*x[1], 0));
        CHECK(path_overlap_delta(w, x[0], x[1], x[0], x[1]) == 2 * k);
        CHECK(path_overlap_delta(w, x[0], x[1], x[1], x[0]) == -2 * k);
        // Chains add: a -> b -> c equals a -> c edge by edge.
        CHECK(path_overlap_delta(w, x[0], x[2], x[3], x[1]) ==
              path_overlap_delta(w, x[0], x[1], x[3], x[1]) + path_overlap_delta(w, x[1], x[2], x[3], x[1]));
        // Window and full tree agree when the unit balls are distinct.
        CHECK(path_overlap_delta(w, x[0], x[1], x[2], x[3]) == path_overlap_delta(x[0], x[1], x[2], x[3]));
        CHECK(path_overlap_delta(w, x[0], std::nullopt, x[2], x[3]) ==
              path_overlap_delta(x[0], std::nullopt, x[2], x[3]));
      }
    }
  }
  // Two sibling pairs in different subtrees of the root share no edge.
  const Window w(2, 1, 3);
  auto leaf = [&](std::int64_t i) -> ExtPoint { return w.center(w.address(0, i)); };
  CHECK(path_overlap_delta(w, leaf(0), leaf(1), leaf(6), leaf(7)) == 0);
  CHECK(cross_ratio_exponent(leaf(0), leaf(1), leaf(6), leaf(7)) == 0);
}
