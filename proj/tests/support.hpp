#pragma once

// Shared test helpers: seeded generators and independent oracles. Nothing
// here calls the code under test except for building inputs.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "rrtlab/geometry.hpp"
#include "rrtlab/rng.hpp"

namespace rrtlab::test {

inline std::string data_path(const std::string& rel) {
  return std::string(RRTLAB_DATA_DIR) + "/" + rel;
}

// ------------------------------------------------------------ generators

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  Xoshiro256 rng;

  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * rng.uniform(); }
  long integer(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Point point(int d) {
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = uniform();
    return p;
  }
  AxisBox box(int d, double min_side = 0.02, double max_side = 0.4) {
    AxisBox b{Point(d), Point(d)};
    for (int k = 0; k < d; ++k) {
      const double side = uniform(min_side, max_side);
      b.lower[k] = uniform(0.0, 1.0 - side);
      b.upper[k] = b.lower[k] + side;
    }
    return b;
  }
  Polyline polyline(int d, int k) {
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) pts.push_back(point(d));
    return Polyline(pts);
  }
};

// --------------------------------------------------------------- oracles

/// Euclidean distance by explicit per-coordinate accumulation in long double.
inline double sumsq_dist(const Point& a, const Point& b) {
  long double s = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const long double d = static_cast<long double>(a[k]) - static_cast<long double>(b[k]);
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

/// Point strictly inside the open box.
inline bool strictly_inside(const Point& x, const AxisBox& b) {
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!(x[k] > b.lower[k] && x[k] < b.upper[k])) return false;
  return true;
}

/// Collision by sampling the segment at parametric step `step`.
inline bool sampled_collision_free(const Point& a, const Point& b,
                                   const std::vector<AxisBox>& boxes,
                                   double step = 1e-4) {
  const long n = static_cast<long>(std::ceil(1.0 / step));
  for (long i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    const Point x = a + t * (b - a);
    for (const auto& box : boxes)
      if (strictly_inside(x, box)) return false;
  }
  return true;
}

/// Smallest distance from the segment to the box surface when the segment
/// does not cross deep into the box: used to skip near-tangent cases.
inline double boundary_proximity(const Point& a, const Point& b, const AxisBox& box) {
  // Minimum over samples of the signed distance to the box boundary.
  double best = std::numeric_limits<double>::infinity();
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const Point x = a + (static_cast<double>(i) / n) * (b - a);
    double inside_depth = std::numeric_limits<double>::infinity();
    double outside_sq = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      inside_depth = std::min({inside_depth, x[k] - box.lower[k], box.upper[k] - x[k]});
      const double e = std::max({box.lower[k] - x[k], x[k] - box.upper[k], 0.0});
      outside_sq += e * e;
    }
    best = std::min(best, inside_depth > 0 ? inside_depth : std::sqrt(outside_sq));
  }
  return best;
}

/// 2D separating-axis test between a closed segment and an open box.
inline bool sat_segment_hits_open_box(const Point& a, const Point& b, const AxisBox& box) {
  for (int k = 0; k < 2; ++k) {
    const double lo = std::min(a[k], b[k]), hi = std::max(a[k], b[k]);
    if (!(lo < box.upper[k] && hi > box.lower[k])) return false;
  }
  const double nx = -(b[1] - a[1]), ny = b[0] - a[0];
  const double v = nx * a[0] + ny * a[1];
  double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      const double p = nx * (cx ? box.upper[0] : box.lower[0]) + ny * (cy ? box.upper[1] : box.lower[1]);
      pmin = std::min(pmin, p);
      pmax = std::max(pmax, p);
    }
  if (nx == 0.0 && ny == 0.0) return strictly_inside(a, box);
  return pmin < v && v < pmax;
}

/// Shortest path length among 2D axis boxes by Dijkstra on the visibility
/// graph of start, target and box corners.
inline double visibility_graph_shortest(const Point& s, const Point& t,
                                        const std::vector<AxisBox>& boxes) {
  std::vector<Point> nodes{s, t};
  for (const auto& b : boxes)
    for (int cx = 0; cx < 2; ++cx)
      for (int cy = 0; cy < 2; ++cy) {
        Point c(2);
        c << (cx ? b.upper[0] : b.lower[0]), (cy ? b.upper[1] : b.lower[1]);
        bool free = true;
        for (const auto& o : boxes) free = free && !strictly_inside(c, o);
        if (free) nodes.push_back(c);
      }
  const std::size_t n = nodes.size();
  auto visible = [&](std::size_t i, std::size_t j) {
    for (const auto& b : boxes)
      if (sat_segment_hits_open_box(nodes[i], nodes[j], b)) return false;
    return true;
  };
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0.0, 0});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > best[u]) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || !visible(u, v)) continue;
      const double nd = d + sumsq_dist(nodes[u], nodes[v]);
      if (nd < best[v]) {
        best[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return best[1];
}

/// Exhaustive search for an index-nondecreasing choice of one sample per
/// ball. samples[i] lists the indices of samples inside ball i.
inline bool brute_force_monotone(const std::vector<std::vector<long>>& per_ball) {
  std::vector<std::size_t> choice(per_ball.size(), 0);
  for (const auto& b : per_ball)
    if (b.empty()) return false;
  for (;;) {
    bool ok = true;
    for (std::size_t i = 1; i < per_ball.size() && ok; ++i)
      ok = per_ball[i - 1][choice[i - 1]] <= per_ball[i][choice[i]];
    if (ok) return true;
    std::size_t k = 0;
    for (; k < per_ball.size(); ++k) {
      if (++choice[k] < per_ball[k].size()) break;
      choice[k] = 0;
    }
    if (k == per_ball.size()) return false;
  }
}

// ------------------------------------------- high-precision formula oracles

using Mp = boost::multiprecision::cpp_bin_float_50;

inline Mp mp_pi() { return boost::math::constants::pi<Mp>(); }

/// Unit-ball volume from the two-step recurrence with exact seeds.
inline Mp mp_unit_ball_volume(int d) {
  Mp v = d % 2 ? Mp(2) : mp_pi();
  for (int k = d % 2 ? 3 : 4; k <= d; k += 2) v = v * 2 * mp_pi() / k;
  return v;
}

inline Mp mp_radius(double gamma, long n, int d, bool corrected) {
  const Mp nn(n);
  const Mp base = boost::multiprecision::log(nn) / nn;
  const Mp e = Mp(1) / Mp(corrected ? d + 1 : d);
  return Mp(gamma) * boost::multiprecision::pow(base, e);
}

inline Mp mp_gamma_lower_bound(double eps, double theta, double mu, int d,
                               double c_star, double free_volume) {
  const Mp inner = (Mp(1) + Mp(eps) / 4) * Mp(c_star) /
                   (Mp(d + 1) * Mp(theta) * (Mp(1) - Mp(mu))) * Mp(free_volume) /
                   mp_unit_ball_volume(d);
  return (Mp(2) + Mp(theta)) * boost::multiprecision::pow(inner, Mp(1) / Mp(d + 1));
}

inline long mp_ceil_Mn(double c, double r, double theta) {
  const Mp q = Mp(c) * (Mp(2) + Mp(theta)) / Mp(r);
  return static_cast<long>(boost::multiprecision::ceil(q));
}

inline double rel_err(double got, const Mp& want) {
  const Mp w = boost::multiprecision::abs(want);
  const Mp diff = boost::multiprecision::abs(Mp(got) - want);
  return static_cast<double>(w > 0 ? diff / w : diff);
}

}  // namespace rrtlab::test
