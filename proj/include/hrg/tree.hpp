#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hrg/padic.hpp"

namespace hrg {

// A point of Q_p^d or the point at infinity (nullopt).
using ExtPoint = std::optional<PAdicPoint>;

// Ball of radius p^k inside a window. path[i] labels the child taken when
// descending from layer S - i to layer S - i - 1; a label packs one digit per
// coordinate as sum_c digit_c * p^c.
struct BallAddress {
  int k = 0;
  std::vector<int> path;

  bool operator==(const BallAddress& o) const { return k == o.k && path == o.path; }
  std::string to_string() const;
  static BallAddress parse(const std::string& text);
};

// The ball of radius p^S around 0, cut at unit balls (layer 0).
class Window {
 public:
  Window(int p, int d, int S);

  int p() const { return p_; }
  int d() const { return d_; }
  int S() const { return s_; }
  int branching() const { return b_; }  // p^d
  std::int64_t leaf_count() const;
  std::int64_t vertex_count() const;
  std::int64_t layer_size(int k) const;  // number of balls at layer k

  bool contains(const PAdicPoint& x) const;
  BallAddress ball_of(const PAdicPoint& x, int k) const;
  BallAddress root() const { return BallAddress{s_, {}}; }
  BallAddress parent(const BallAddress& u) const;
  std::vector<BallAddress> children(const BallAddress& u) const;
  // Ancestor at layer k >= u.k.
  BallAddress ancestor(const BallAddress& u, int k) const;
  bool contains(const BallAddress& outer, const BallAddress& inner) const;
  bool disjoint(const BallAddress& a, const BallAddress& b) const;
  // Layer of the smallest common ancestor; all points of disjoint balls are at
  // distance p^join from each other.
  int join_layer(const BallAddress& a, const BallAddress& b) const;

  // Dense index of a ball among its layer, with paths read as base-p^d numbers.
  std::int64_t index(const BallAddress& u) const;
  BallAddress address(int k, std::int64_t index) const;
  // A representative point (all digits below the ball's scale are zero).
  PAdicPoint center(const BallAddress& u, int precision = PAdicScalar::kDefaultPrecision) const;
  void validate(const BallAddress& u) const;

 private:
  int p_, d_, s_, b_;
};

double ball_volume(int p, int d, int k);

// Locally constant function: coefficient on each listed ball.
struct BallFunction {
  std::vector<std::pair<BallAddress, double>> terms;
};

// Throws DomainError when two listed balls overlap.
void check_disjoint(const Window& w, const BallFunction& f);
double integrate(const Window& w, const BallFunction& f);

// Signed count of common edges of the geodesics x1 -> x2 and x3 -> x4 in the
// full tree of balls of Q_p^d. All four points must be pairwise distinct
// (infinity may appear once).
int path_overlap_delta(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4);

// The same count inside a window, where finite endpoints are replaced by the
// unit balls containing them and rays to infinity leave through the root.
// Only x1 != x2 and x3 != x4 (as unit balls) is required.
int path_overlap_delta(const Window& w, const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3,
                       const ExtPoint& x4);

}  // namespace hrg
