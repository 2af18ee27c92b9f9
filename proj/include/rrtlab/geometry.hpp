#pragma once

// Geometric primitives on the unit cube [0,1]^d: distances, steering,
// exact segment/box collision, polyline cost and clearance verification.
//
// Dense types are templated on the scalar; the `double` aliases are what the
// rest of the library uses. Free functions accept any Eigen expression.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rrtlab/errors.hpp"

namespace rrtlab {

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Point = PointT<double>;

/// Axis-aligned box; its open interior is the blocked region.
template <typename Scalar>
struct AxisBoxT {
  PointT<Scalar> lower;
  PointT<Scalar> upper;

  Eigen::Index dim() const { return lower.size(); }
  bool operator==(const AxisBoxT& o) const {
    return lower.size() == o.lower.size() && upper.size() == o.upper.size() &&
           lower == o.lower && upper == o.upper;
  }
};
using AxisBox = AxisBoxT<double>;

/// Ordered waypoints stored column-wise (d x k).
template <typename Scalar>
struct PolylineT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> waypoints;

  PolylineT() = default;
  explicit PolylineT(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w)
      : waypoints(std::move(w)) {}
  PolylineT(const std::vector<PointT<Scalar>>& pts) {  // NOLINT(implicit)
    if (pts.empty()) return;
    waypoints.resize(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].size() != pts.front().size())
        throw ContractViolation("polyline waypoints must share one dimension");
      waypoints.col(static_cast<Eigen::Index>(i)) = pts[i];
    }
  }

  Eigen::Index dim() const { return waypoints.rows(); }
  Eigen::Index size() const { return waypoints.cols(); }
  auto operator[](Eigen::Index i) const { return waypoints.col(i); }
  bool operator==(const PolylineT& o) const {
    return waypoints.rows() == o.waypoints.rows() &&
           waypoints.cols() == o.waypoints.cols() && waypoints == o.waypoints;
  }
};
using Polyline = PolylineT<double>;

template <typename Scalar>
struct BallT {
  PointT<Scalar> center;
  Scalar radius{};

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return (x - center).norm() <= radius;
  }
};
using Ball = BallT<double>;

namespace detail {

template <typename A, typename B>
void require_same_dim(const Eigen::MatrixBase<A>& a,
                      const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size())
    throw ContractViolation("dimension mismatch: " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
}

}  // namespace detail

/// Euclidean distance.
template <typename A, typename B>
typename A::Scalar dist(const Eigen::MatrixBase<A>& x,
                        const Eigen::MatrixBase<B>& y) {
  detail::require_same_dim(x, y);
  return (x - y).norm();
}

/// Length of a polyline (sum of consecutive segment lengths).
template <typename Scalar>
Scalar path_cost(const PolylineT<Scalar>& p) {
  Scalar total(0);
  for (Eigen::Index i = 1; i < p.size(); ++i)
    total += (p[i] - p[i - 1]).norm();
  return total;
}

/// Point on [x_near, x_rand] at distance at most eta from x_near.
template <typename A, typename B>
PointT<typename A::Scalar> steer(const Eigen::MatrixBase<A>& x_near,
                                 const Eigen::MatrixBase<B>& x_rand,
                                 typename A::Scalar eta) {
  detail::require_same_dim(x_near, x_rand);
  if (!(eta > 0)) throw ContractViolation("steer: eta must be positive");
  const auto d = (x_rand - x_near).norm();
  if (d <= eta) return x_rand;
  return x_near + (eta / d) * (x_rand - x_near);
}

/// True iff the closed segment [a,b] misses the open interior of `box`
/// (parametric slab clipping; faces and edges count as free).
template <typename A, typename B, typename Scalar>
bool segment_misses_box(const Eigen::MatrixBase<A>& a,
                        const Eigen::MatrixBase<B>& b,
                        const AxisBoxT<Scalar>& box) {
  Scalar t_enter(0), t_exit(1);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const Scalar lo = box.lower[k], hi = box.upper[k];
    const Scalar ak = a[k], dk = b[k] - a[k];
    if (dk == Scalar(0)) {
      if (!(ak > lo && ak < hi)) return true;
      continue;
    }
    Scalar t0 = (lo - ak) / dk, t1 = (hi - ak) / dk;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (!(t_enter < t_exit)) return true;
  }
  return false;
}

template <typename A, typename B, typename Scalar>
bool segment_collision_free(const Eigen::MatrixBase<A>& a,
                            const Eigen::MatrixBase<B>& b,
                            const std::vector<AxisBoxT<Scalar>>& obstacles) {
  detail::require_same_dim(a, b);
  for (const auto& box : obstacles)
    if (!segment_misses_box(a, b, box)) return false;
  return true;
}

/// True iff x is inside the open interior of some obstacle.
template <typename A, typename Scalar>
bool in_obstacle(const Eigen::MatrixBase<A>& x,
                 const std::vector<AxisBoxT<Scalar>>& obstacles) {
  for (const auto& box : obstacles) {
    bool inside = true;
    for (Eigen::Index k = 0; k < x.size() && inside; ++k)
      inside = x[k] > box.lower[k] && x[k] < box.upper[k];
    if (inside) return true;
  }
  return false;
}

/// Euclidean distance from x to the closed box (0 inside).
template <typename A, typename Scalar>
Scalar point_box_distance(const Eigen::MatrixBase<A>& x,
                          const AxisBoxT<Scalar>& box) {
  Scalar sq(0);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const Scalar e = std::max({box.lower[k] - x[k], x[k] - box.upper[k],
                               Scalar(0)});
    sq += e * e;
  }
  return std::sqrt(sq);
}

/// Distance from x to the complement of free space: nearest obstacle or the
/// cube boundary, whichever is closer.
template <typename A, typename Scalar>
Scalar clearance_at(const Eigen::MatrixBase<A>& x,
                    const std::vector<AxisBoxT<Scalar>>& obstacles) {
  Scalar c = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index k = 0; k < x.size(); ++k)
    c = std::min({c, x[k], Scalar(1) - x[k]});
  for (const auto& box : obstacles) c = std::min(c, point_box_distance(x, box));
  return c;
}

/// Conservative check that the delta-tube around p lies in free space.
///
/// Distance to the cube boundary is concave along a segment, so checking the
/// waypoints is exact. Distance to a box is 1-Lipschitz, so each segment is
/// sampled with step h <= delta/64 and the samples must clear delta + h/2,
/// which certifies delta at every point in between.
template <typename Scalar>
bool path_clearance_ok(const PolylineT<Scalar>& p, Scalar delta,
                       const std::vector<AxisBoxT<Scalar>>& obstacles) {
  if (!(delta > 0))
    throw ContractViolation("path_clearance_ok: delta must be positive");
  if (p.size() == 0) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    for (Eigen::Index k = 0; k < p.dim(); ++k)
      if (std::min(p[i][k], Scalar(1) - p[i][k]) < delta) return false;
  if (obstacles.empty()) return true;

  constexpr long kMaxStepsPerSegment = 1L << 20;
  auto boxes_clear = [&](const PointT<Scalar>& x, Scalar need) {
    for (const auto& box : obstacles)
      if (point_box_distance(x, box) < need) return false;
    return true;
  };
  if (!boxes_clear(p[0], delta)) return false;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    const PointT<Scalar> a = p[i - 1], b = p[i];
    const Scalar len = (b - a).norm();
    if (len == Scalar(0)) continue;
    const long steps = std::clamp(
        static_cast<long>(std::ceil(len / (delta / 64))), 1L, kMaxStepsPerSegment);
    const Scalar h = len / Scalar(steps);
    const Scalar need = delta + h / 2;
    for (long s = 0; s <= steps; ++s) {
      const Scalar t = Scalar(s) / Scalar(steps);
      if (!boxes_clear(PointT<Scalar>(a + t * (b - a)), need)) return false;
    }
  }
  return true;
}

/// Lebesgue volume of the unit d-ball.
template <typename Scalar = double>
Scalar unit_ball_volume(int d) {
  if (d < 1) throw ContractViolation("unit_ball_volume: d must be >= 1");
  using std::pow;
  using std::tgamma;
  const Scalar half_d = Scalar(d) / Scalar(2);
  return pow(std::numbers::pi_v<Scalar>, half_d) / tgamma(half_d + Scalar(1));
}

/// Volume of the unit cube minus the union of the obstacles (exact, by
/// coordinate compression over box faces).
double free_volume(int d, const std::vector<AxisBox>& obstacles);

}  // namespace rrtlab
