#include "rrtlab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "json.hpp"

namespace rrtlab {
namespace {

using nlohmann::json;

bool same_point(const Point& a, const Point& b) {
  return a.size() == b.size() && a == b;
}

/// Grid cell size for a run: about half the final query radius so a near()
/// query touches a handful of cells.
double cell_size_for(double radius) {
  return std::isfinite(radius) && radius > 0.0 ? radius / 2.0 : 1.0;
}

IterationRecord begin_iteration(const PlannerTree& tree, const Scenario& sc,
                                long j, double eta, Sampler& sampler) {
  IterationRecord rec;
  rec.iteration = static_cast<int>(j);
  rec.x_rand = sampler.next(sc);
  if (rec.x_rand.size() != sc.dimension)
    throw RunError("sample " + std::to_string(j) + " has wrong dimension");
  rec.nearest_id = tree.nearest(rec.x_rand);
  rec.x_near = tree.point(rec.nearest_id);
  rec.x_new = steer(rec.x_near, rec.x_rand, eta);
  return rec;
}

void check_run_args(long n, double eta) {
  if (n < 1) throw ContractViolation("run length n must be >= 1");
  if (!(eta > 0.0)) throw ContractViolation("eta must be positive");
}

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p[k]);
  return a;
}

Point point_from(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where, "expected an array of numbers");
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ParseError(where, "expected a number");
    p[static_cast<Eigen::Index>(k)] = v[k].get<double>();
  }
  return p;
}

}  // namespace

bool IterationRecord::operator==(const IterationRecord& o) const {
  return iteration == o.iteration && same_point(x_rand, o.x_rand) &&
         same_point(x_near, o.x_near) && nearest_id == o.nearest_id &&
         same_point(x_new, o.x_new) && accepted == o.accepted &&
         vertex_id == o.vertex_id && chosen_parent == o.chosen_parent &&
         rewired == o.rewired && radius_used == o.radius_used;
}

Sampler Sampler::uniform_free(std::uint64_t seed) {
  return Sampler(Kind::uniform_free, seed, {});
}

Sampler Sampler::scripted(std::vector<Point> script) {
  return Sampler(Kind::scripted, 0, std::move(script));
}

Point Sampler::next(const Scenario& sc) {
  if (kind_ == Kind::scripted) {
    if (cursor_ >= script_.size())
      throw RunError("scripted sampler exhausted after " +
                     std::to_string(script_.size()) + " samples");
    return script_[cursor_++];
  }
  constexpr long kMaxAttempts = 100'000'000;
  Point x(sc.dimension);
  for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (int k = 0; k < sc.dimension; ++k) x[k] = rng_.uniform();
    if (!in_obstacle(x, sc.obstacles)) return x;
  }
  throw RunError("uniform sampler found no free point");
}

RunResult rrt_run(const Scenario& sc, long n, double eta, Sampler sampler) {
  check_run_args(n, eta);
  const double h = std::pow(1.0 / static_cast<double>(n), 1.0 / sc.dimension);
  RunResult res{PlannerTree(sc.start, cell_size_for(2.0 * h)), {}};
  auto& tree = res.tree;
  res.trace.records.reserve(static_cast<std::size_t>(n));
  for (long j = 1; j <= n; ++j) {
    IterationRecord rec = begin_iteration(tree, sc, j, eta, sampler);
    if (segment_collision_free(rec.x_near, rec.x_new, sc.obstacles)) {
      rec.accepted = true;
      rec.chosen_parent = rec.nearest_id;
      rec.vertex_id = tree.add_vertex(rec.x_new, rec.nearest_id);
    }
    res.trace.records.push_back(std::move(rec));
  }
  return res;
}

RunResult rrt_star_run(const Scenario& sc, long n, double eta,
                       const RadiusScheduleSpec& schedule, Sampler sampler) {
  check_run_args(n, eta);
  schedule.validate();
  const int d = sc.dimension;
  const double final_radius = std::min(radius_value(schedule, n, d), eta);
  RunResult res{PlannerTree(sc.start, cell_size_for(final_radius)), {}};
  auto& tree = res.tree;
  res.trace.records.reserve(static_cast<std::size_t>(n));

  for (long j = 1; j <= n; ++j) {
    IterationRecord rec = begin_iteration(tree, sc, j, eta, sampler);
    if (!segment_collision_free(rec.x_near, rec.x_new, sc.obstacles)) {
      res.trace.records.push_back(std::move(rec));
      continue;
    }
    rec.accepted = true;
    // The near set is taken over V before x_new joins it.
    rec.radius_used = std::min(radius_value(schedule, tree.size(), d), eta);
    const std::vector<int> x_near_set = tree.near(rec.x_new, rec.radius_used);

    // Best parent: start from the nearest vertex, switch only on a strict
    // improvement, scanning candidates in ascending id order.
    int x_min = rec.nearest_id;
    double c_min = tree.cost(x_min) + (rec.x_new - rec.x_near).norm();
    for (int v : x_near_set) {
      const double c = tree.cost(v) + (rec.x_new - tree.point(v)).norm();
      if (c < c_min && segment_collision_free(tree.point(v), rec.x_new, sc.obstacles)) {
        x_min = v;
        c_min = c;
      }
    }
    const int id = tree.add_vertex(rec.x_new, x_min);
    rec.vertex_id = id;
    rec.chosen_parent = x_min;

    // Local rewiring: re-parent a neighbour through x_new only when that is
    // strictly cheaper. Descendants keep their parents; only cached costs
    // below the rewired vertex are refreshed.
    for (int v : x_near_set) {
      const double c = tree.cost(id) + tree.edge_length(id, v);
      if (c < tree.cost(v) && segment_collision_free(rec.x_new, tree.point(v), sc.obstacles)) {
        const int old_parent = *tree.parent(v);
        tree.set_parent(v, id);
        rec.rewired.push_back({v, old_parent, id});
      }
    }
    res.trace.records.push_back(std::move(rec));
  }
  return res;
}

std::optional<Solution> solution_path(const PlannerTree& tree,
                                      const Scenario& sc,
                                      double connect_radius) {
  for (int id = 0; id < tree.size(); ++id) {
    if (same_point(Point(tree.point(id)), sc.target)) {
      Solution s{tree.path_to(id), tree.path_ids(id), tree.cost(id)};
      return s;
    }
  }
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int id : tree.near(sc.target, connect_radius)) {
    const double c = tree.cost(id) + (tree.point(id) - sc.target).norm();
    if (c < best_cost && segment_collision_free(tree.point(id), sc.target, sc.obstacles)) {
      best = id;
      best_cost = c;
    }
  }
  if (best < 0) return std::nullopt;
  Solution s;
  s.vertex_ids = tree.path_ids(best);
  const Polyline to_vertex = tree.path_to(best);
  Eigen::MatrixXd w(to_vertex.dim(), to_vertex.size() + 1);
  w.leftCols(to_vertex.size()) = to_vertex.waypoints;
  w.col(to_vertex.size()) = sc.target;
  s.path = Polyline(std::move(w));
  s.cost = best_cost;
  return s;
}

void write_trace_jsonl(const RunTrace& trace, std::ostream& out) {
  for (const auto& r : trace.records) {
    json o = json::object();
    o["iteration"] = r.iteration;
    o["x_rand"] = point_json(r.x_rand);
    o["x_near"] = point_json(r.x_near);
    o["nearest_id"] = r.nearest_id;
    o["x_new"] = point_json(r.x_new);
    o["accepted"] = r.accepted;
    o["vertex_id"] = r.vertex_id ? json(*r.vertex_id) : json(nullptr);
    o["chosen_parent"] = r.chosen_parent ? json(*r.chosen_parent) : json(nullptr);
    json rw = json::array();
    for (const auto& w : r.rewired)
      rw.push_back({{"child", w.child}, {"old_parent", w.old_parent},
                    {"new_parent", w.new_parent}});
    o["rewired"] = rw;
    o["radius_used"] = r.radius_used;
    out << o.dump() << '\n';
  }
}

RunTrace read_trace_jsonl(std::istream& in) {
  RunTrace trace;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json o;
    try {
      o = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError(where, "malformed JSON");
    }
    try {
      IterationRecord r;
      r.iteration = o.at("iteration").get<int>();
      r.x_rand = point_from(o.at("x_rand"), where + " x_rand");
      r.x_near = point_from(o.at("x_near"), where + " x_near");
      r.nearest_id = o.at("nearest_id").get<int>();
      r.x_new = point_from(o.at("x_new"), where + " x_new");
      r.accepted = o.at("accepted").get<bool>();
      if (!o.at("vertex_id").is_null()) r.vertex_id = o.at("vertex_id").get<int>();
      if (!o.at("chosen_parent").is_null())
        r.chosen_parent = o.at("chosen_parent").get<int>();
      for (const auto& w : o.at("rewired"))
        r.rewired.push_back({w.at("child").get<int>(), w.at("old_parent").get<int>(),
                             w.at("new_parent").get<int>()});
      r.radius_used = o.at("radius_used").get<double>();
      trace.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(where, e.what());
    }
  }
  return trace;
}

}  // namespace rrtlab
