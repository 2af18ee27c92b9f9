#pragma once

// A scripted 23-sample RRT* run in which every pair of consecutive covering
// balls is hit in the right order, yet no single index-monotone chain through
// all balls exists, and the returned path keeps a long detour.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rrtlab/proof_lab.hpp"

namespace rrtlab {

struct CounterexampleFixture {
  Scenario scenario;
  std::vector<Point> script;  ///< X_1..X_23; X_3 is the target
  double eta = 2.0;
  RadiusScheduleSpec radius = RadiusScheduleSpec::constant(0.125);
  BallChain balls;            ///< b_1..b_12 along the segment s -> t
  /// Ball (1-based) each sample X_4..X_23 is meant to land in; index j-1.
  std::vector<int> designated_ball;
};

/// The frozen, verified instance.
CounterexampleFixture build_fixture();

/// Same fixture read from a scene file and a script file.
CounterexampleFixture load_fixture(const std::string& scene_path,
                                   const std::string& script_path);
/// Script file text: the points plus eta and radius.
std::string save_fixture_script(const CounterexampleFixture& fx);

/// Copy with every scripted point moved by `magnitude` in a pseudo-random
/// direction (deterministic in `seed`), clamped to the unit cube.
CounterexampleFixture perturb_fixture(const CounterexampleFixture& fx,
                                      double magnitude, std::uint64_t seed = 1);

/// True iff indices j_1 <= ... <= j_M exist with sample j_i inside ball i.
/// Samples are (index, point) pairs in any order.
bool monotone_chain_exists(const std::vector<std::pair<long, Point>>& samples,
                           const BallChain& balls);
/// Samples are the accepted x_new of the trace at their iteration index,
/// plus `root` (typically s) at index 0 when given.
bool monotone_chain_exists(const RunTrace& trace, const BallChain& balls,
                           const std::optional<Point>& root = std::nullopt);

struct Milestone {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<Milestone> milestones;
  std::vector<bool> pair_ok;  ///< conditions (i)+(ii) for pairs (b_i, b_i+1)
  bool chain_exists = true;   ///< condition (iii)
  std::vector<std::string> path_labels;  ///< returned path, e.g. s,X1,X2,t
  double path_cost = 0.0;
  double reference_cost = 0.0;

  bool passed() const;
  const Milestone* first_failure() const;
  /// "(i)&(ii): PASS for all 11 pairs; (iii): ABSENT; path: s,X1,X2,t"
  std::string summary() const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Replays the script through RRT* and checks the fixture invariants, the
/// per-pair conditions, absence of a monotone chain, the wiring milestones
/// and the returned path.
VerificationReport verify_fixture(const CounterexampleFixture& fx);

}  // namespace rrtlab
