#pragma once

// Planning problem instances (free space, start, target, optional robust
// reference path) and their canonical JSON file format.

#include <optional>
#include <string>
#include <vector>

#include "rrtlab/geometry.hpp"

namespace rrtlab {

struct Scenario {
  int dimension = 2;
  std::vector<AxisBox> obstacles;
  Point start;
  Point target;
  std::optional<Polyline> reference_path;  ///< robust path s -> t
  std::optional<double> clearance;         ///< its clearance delta
  std::optional<double> stretch;           ///< c(reference) / c*, bookkeeping

  bool operator==(const Scenario& o) const {
    auto same = [](const Point& a, const Point& b) {
      return a.size() == b.size() && a == b;
    };
    return dimension == o.dimension && obstacles == o.obstacles &&
           same(start, o.start) && same(target, o.target) &&
           reference_path == o.reference_path && clearance == o.clearance &&
           stretch == o.stretch;
  }

  /// Lebesgue measure of free space.
  double free_volume() const { return rrtlab::free_volume(dimension, obstacles); }
};

/// Parse and validate scenario text. Throws ParseError (malformed text or
/// missing/mistyped field) or ValidationError (domain invariant broken).
Scenario load_scenario(const std::string& text);

/// Read a scenario file; a missing file is reported as ValidationError
/// naming the path.
Scenario load_scenario_file(const std::string& path);

/// Canonical text: sorted keys, shortest round-trip doubles, trailing newline.
std::string save_scenario(const Scenario& sc);

/// Throws ValidationError naming the first violated invariant.
void validate_scenario(const Scenario& sc);

}  // namespace rrtlab
