#pragma once

// RRT and RRT* with per-iteration tracing, samplers, and goal attachment.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrtlab/rng.hpp"
#include "rrtlab/scenario.hpp"
#include "rrtlab/schedule.hpp"
#include "rrtlab/tree.hpp"

namespace rrtlab {

struct Rewire {
  int child;
  int old_parent;
  int new_parent;
  bool operator==(const Rewire&) const = default;
};

/// What happened in iteration j.
struct IterationRecord {
  int iteration = 0;     ///< j, 1-based
  Point x_rand;          ///< sample
  Point x_near;          ///< nearest vertex to x_rand
  int nearest_id = 0;    ///< its id
  Point x_new;           ///< steered point
  bool accepted = false; ///< x_new was inserted
  std::optional<int> vertex_id;      ///< id given to x_new when accepted
  std::optional<int> chosen_parent;  ///< parent given to x_new when accepted
  std::vector<Rewire> rewired;       ///< in the order performed
  double radius_used = 0.0;          ///< near-query radius (0 for RRT)

  bool operator==(const IterationRecord& o) const;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::size_t size() const { return records.size(); }
  const IterationRecord& operator[](std::size_t j1) const { return records[j1 - 1]; }
  bool operator==(const RunTrace&) const = default;
};

struct RunResult {
  PlannerTree tree;
  RunTrace trace;
};

class Sampler {
 public:
  enum class Kind { uniform_free, scripted };

  /// Uniform over free space (rejection against obstacle interiors).
  static Sampler uniform_free(std::uint64_t seed);
  /// Returns script[j-1] at iteration j.
  static Sampler scripted(std::vector<Point> script);

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Point>& script() const { return script_; }

  /// Next sample; throws RunError when a script is exhausted.
  Point next(const Scenario& sc);

 private:
  Sampler(Kind kind, std::uint64_t seed, std::vector<Point> script)
      : kind_(kind), seed_(seed), rng_(seed), script_(std::move(script)) {}

  Kind kind_;
  std::uint64_t seed_;
  Xoshiro256 rng_;
  std::vector<Point> script_;
  std::size_t cursor_ = 0;
};

/// Algorithm 1 for n iterations.
RunResult rrt_run(const Scenario& sc, long n, double eta, Sampler sampler);

/// Algorithm 2 for n iterations with near radius min{r(|V|), eta}.
RunResult rrt_star_run(const Scenario& sc, long n, double eta,
                       const RadiusScheduleSpec& schedule, Sampler sampler);

struct Solution {
  Polyline path;
  std::vector<int> vertex_ids;  ///< tree path (excludes an appended target)
  double cost = 0.0;
};

/// Tree path to the target if it is a vertex; otherwise the cheapest
/// collision-free attachment of the target to a vertex within
/// connect_radius (ties to the smallest id). nullopt when none exists.
std::optional<Solution> solution_path(const PlannerTree& tree,
                                      const Scenario& sc,
                                      double connect_radius);

/// JSON-lines trace: one object per iteration.
void write_trace_jsonl(const RunTrace& trace, std::ostream& out);
RunTrace read_trace_jsonl(std::istream& in);

}  // namespace rrtlab
