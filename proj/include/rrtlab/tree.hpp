#pragma once

// The search tree G = (V, E) grown by RRT / RRT*: vertex coordinates in a
// contiguous d x |V| matrix, parent links, cached cost-to-come, and a uniform
// grid index for nearest / near queries.

#include <optional>
#include <vector>

#include "rrtlab/geometry.hpp"

namespace rrtlab {

/// Uniform grid over [0,1]^d bucketing vertex ids. Buckets hold ids in
/// insertion (ascending) order.
class GridIndex {
 public:
  GridIndex(int d, double cell_size);

  void insert(int id, const Eigen::Ref<const Eigen::VectorXd>& x);
  /// Ids with dist <= r in ascending order.
  std::vector<int> near(const Eigen::MatrixXd& pts,
                        const Eigen::Ref<const Eigen::VectorXd>& x,
                        double r) const;
  /// Nearest id, ties to the smallest id. Requires at least one vertex.
  int nearest(const Eigen::MatrixXd& pts,
              const Eigen::Ref<const Eigen::VectorXd>& x) const;

  double cell_size() const { return h_; }

 private:
  long cell_coord(double v) const;
  std::size_t flat(const std::vector<long>& c) const;

  int d_;
  double h_;
  long cells_per_axis_;
  std::vector<std::vector<int>> buckets_;
};

class PlannerTree {
 public:
  /// Tree containing only the root. `cell_size` tunes the spatial index
  /// (it does not affect query results).
  explicit PlannerTree(const Point& root, double cell_size = 0.1);

  int size() const { return size_; }
  int dim() const { return static_cast<int>(points_.rows()); }

  auto point(int id) const { return points_.col(id); }
  /// Vertex coordinates, one column per vertex.
  auto points() const { return points_.leftCols(size_); }
  std::optional<int> parent(int id) const {
    return parent_[static_cast<std::size_t>(id)] < 0
               ? std::nullopt
               : std::optional<int>(parent_[static_cast<std::size_t>(id)]);
  }
  double cost(int id) const { return cost_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& children(int id) const {
    return children_[static_cast<std::size_t>(id)];
  }

  /// Appends x as a child of `parent`; returns the new id (= previous size).
  int add_vertex(const Point& x, int parent);
  /// Replaces id's parent. Cached costs of id and all of its descendants are
  /// recomputed; no other links change.
  void set_parent(int id, int new_parent);

  int nearest(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<int> near(const Eigen::Ref<const Eigen::VectorXd>& x,
                        double r) const;

  /// Vertex ids from the root to id.
  std::vector<int> path_ids(int id) const;
  Polyline path_to(int id) const;

  double edge_length(int a, int b) const {
    return (points_.col(a) - points_.col(b)).norm();
  }

 private:
  void update_subtree_costs(int id);

  Eigen::MatrixXd points_;
  int size_ = 0;
  std::vector<int> parent_;
  std::vector<double> cost_;
  std::vector<std::vector<int>> children_;
  GridIndex index_;
};

/// Reference implementations by linear scan (test oracles).
int linear_nearest(const PlannerTree& tree,
                   const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<int> linear_near(const PlannerTree& tree,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             double r);

}  // namespace rrtlab
