#include "rrtlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrtlab {
namespace {

constexpr long kMaxCells = 1L << 20;
constexpr int kLinearScanBelow = 32;

/// Odometer over the integer box [lo, hi] (inclusive, per axis).
template <typename F>
void for_each_cell(const std::vector<long>& lo, const std::vector<long>& hi,
                   F&& f) {
  std::vector<long> c = lo;
  const std::size_t d = lo.size();
  for (;;) {
    f(c);
    std::size_t k = 0;
    for (; k < d; ++k) {
      if (++c[k] <= hi[k]) break;
      c[k] = lo[k];
    }
    if (k == d) return;
  }
}

}  // namespace

GridIndex::GridIndex(int d, double cell_size) : d_(d) {
  if (d < 1) throw ContractViolation("GridIndex: dimension must be >= 1");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) cell_size = 1.0;
  long m = std::max(1L, static_cast<long>(std::ceil(1.0 / cell_size)));
  auto total = [&](long per_axis) {
    double t = 1.0;
    for (int k = 0; k < d; ++k) t *= static_cast<double>(per_axis);
    return t;
  };
  while (m > 1 && total(m) > static_cast<double>(kMaxCells)) --m;
  cells_per_axis_ = m;
  h_ = 1.0 / static_cast<double>(m);
  buckets_.resize(static_cast<std::size_t>(total(m)));
}

long GridIndex::cell_coord(double v) const {
  const long c = static_cast<long>(std::floor(v / h_));
  return std::clamp(c, 0L, cells_per_axis_ - 1);
}

std::size_t GridIndex::flat(const std::vector<long>& c) const {
  std::size_t f = 0;
  for (int k = d_ - 1; k >= 0; --k)
    f = f * static_cast<std::size_t>(cells_per_axis_) +
        static_cast<std::size_t>(c[static_cast<std::size_t>(k)]);
  return f;
}

void GridIndex::insert(int id, const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<long> c(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k) c[static_cast<std::size_t>(k)] = cell_coord(x[k]);
  buckets_[flat(c)].push_back(id);
}

std::vector<int> GridIndex::near(const Eigen::MatrixXd& pts,
                                 const Eigen::Ref<const Eigen::VectorXd>& x,
                                 double r) const {
  std::vector<long> lo(static_cast<std::size_t>(d_)), hi(lo.size());
  for (int k = 0; k < d_; ++k) {
    lo[static_cast<std::size_t>(k)] = cell_coord(x[k] - r);
    hi[static_cast<std::size_t>(k)] = cell_coord(x[k] + r);
  }
  std::vector<int> out;
  for_each_cell(lo, hi, [&](const std::vector<long>& c) {
    for (int id : buckets_[flat(c)])
      if ((pts.col(id) - x).norm() <= r) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

int GridIndex::nearest(const Eigen::MatrixXd& pts,
                       const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto d = static_cast<std::size_t>(d_);
  std::vector<long> center(d);
  for (std::size_t k = 0; k < d; ++k) center[k] = cell_coord(x[static_cast<Eigen::Index>(k)]);

  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<long> lo(d), hi(d);
  for (long ring = 0;; ++ring) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::max(0L, center[k] - ring);
      hi[k] = std::min(cells_per_axis_ - 1, center[k] + ring);
    }
    for_each_cell(lo, hi, [&](const std::vector<long>& c) {
      long cheb = 0;
      for (std::size_t k = 0; k < d; ++k) cheb = std::max(cheb, std::abs(c[k] - center[k]));
      if (cheb != ring) return;
      for (int id : buckets_[flat(c)]) {
        const double dd = (pts.col(id) - x).norm();
        if (dd < best_d || (dd == best_d && id < best)) {
          best_d = dd;
          best = id;
        }
      }
    });
    // Any vertex outside the searched block is at least `bound` away.
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d; ++k) {
      const double xk = x[static_cast<Eigen::Index>(k)];
      if (center[k] - ring > 0)
        bound = std::min(bound, xk - static_cast<double>(center[k] - ring) * h_);
      if (center[k] + ring < cells_per_axis_ - 1)
        bound = std::min(bound, static_cast<double>(center[k] + ring + 1) * h_ - xk);
    }
    if (std::isinf(bound)) break;
    if (best >= 0 && best_d < bound) break;
  }
  return best;
}

PlannerTree::PlannerTree(const Point& root, double cell_size)
    : points_(root.size(), 64), index_(static_cast<int>(root.size()), cell_size) {
  points_.col(0) = root;
  size_ = 1;
  parent_.push_back(-1);
  cost_.push_back(0.0);
  children_.emplace_back();
  index_.insert(0, root);
}

int PlannerTree::add_vertex(const Point& x, int parent) {
  if (x.size() != points_.rows())
    throw ContractViolation("add_vertex: dimension mismatch");
  if (parent < 0 || parent >= size_)
    throw ContractViolation("add_vertex: parent id out of range");
  if (size_ == points_.cols()) points_.conservativeResize(Eigen::NoChange, 2 * size_);
  const int id = size_++;
  points_.col(id) = x;
  parent_.push_back(parent);
  cost_.push_back(cost_[static_cast<std::size_t>(parent)] + edge_length(parent, id));
  children_.emplace_back();
  children_[static_cast<std::size_t>(parent)].push_back(id);
  index_.insert(id, x);
  return id;
}

void PlannerTree::set_parent(int id, int new_parent) {
  if (id <= 0 || id >= size_ || new_parent < 0 || new_parent >= size_ ||
      new_parent == id)
    throw ContractViolation("set_parent: invalid vertex ids");
  auto& old_children = children_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(id)])];
  old_children.erase(std::find(old_children.begin(), old_children.end(), id));
  parent_[static_cast<std::size_t>(id)] = new_parent;
  children_[static_cast<std::size_t>(new_parent)].push_back(id);
  update_subtree_costs(id);
}

void PlannerTree::update_subtree_costs(int id) {
  std::vector<int> stack{id};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const int p = parent_[static_cast<std::size_t>(v)];
    cost_[static_cast<std::size_t>(v)] = cost_[static_cast<std::size_t>(p)] + edge_length(p, v);
    for (int c : children_[static_cast<std::size_t>(v)]) stack.push_back(c);
  }
}

int PlannerTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != points_.rows())
    throw ContractViolation("nearest: dimension mismatch");
  if (size_ < kLinearScanBelow) return linear_nearest(*this, x);
  return index_.nearest(points_, x);
}

std::vector<int> PlannerTree::near(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   double r) const {
  if (x.size() != points_.rows()) throw ContractViolation("near: dimension mismatch");
  if (!(r >= 0.0)) throw ContractViolation("near: radius must be nonnegative");
  if (size_ < kLinearScanBelow) return linear_near(*this, x, r);
  return index_.near(points_, x, r);
}

std::vector<int> PlannerTree::path_ids(int id) const {
  std::vector<int> ids;
  for (int v = id; v >= 0; v = parent_[static_cast<std::size_t>(v)]) {
    ids.push_back(v);
    if (ids.size() > static_cast<std::size_t>(size_))
      throw ContractViolation("path_ids: parent links contain a cycle");
  }
  std::reverse(ids.begin(), ids.end());
  return ids;
}

Polyline PlannerTree::path_to(int id) const {
  const auto ids = path_ids(id);
  Eigen::MatrixXd w(points_.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i)
    w.col(static_cast<Eigen::Index>(i)) = points_.col(ids[i]);
  return Polyline(std::move(w));
}

int linear_nearest(const PlannerTree& tree,
                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  int best = 0;
  double best_d = (tree.point(0) - x).norm();
  for (int id = 1; id < tree.size(); ++id) {
    const double dd = (tree.point(id) - x).norm();
    if (dd < best_d) {
      best_d = dd;
      best = id;
    }
  }
  return best;
}

std::vector<int> linear_near(const PlannerTree& tree,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             double r) {
  std::vector<int> out;
  for (int id = 0; id < tree.size(); ++id)
    if ((tree.point(id) - x).norm() <= r) out.push_back(id);
  return out;
}

}  // namespace rrtlab
