#pragma once

// Executable versions of the optimality-proof constructions: covering balls
// along a robust path, time windows, the events E1/E2/E3, the assembled path
// sigma'_n with its cost bound, and Monte Carlo estimates of event rates.

#include <cstdint>
#include <optional>
#include <vector>

#include "rrtlab/planner.hpp"

namespace rrtlab {

/// Constants of the analysis. Ranges: eps in (0,1), theta in (0,1/4),
/// mu in (0,1), alpha and beta in (0, theta*eps/16), eta > 0, gamma > 0.
struct ProofParams {
  double eps = 0.5;
  double theta = 0.2;
  double mu = 0.5;
  double alpha = 0.2 * 0.5 / 32;
  double beta = 0.2 * 0.5 / 32;
  double eta = 0.3;
  double gamma = 1.0;

  /// Throws ContractViolation naming the violated range.
  void validate() const;
};

/// M_n = ceil(c_sigma (2+theta) / r_n): the number of radius-r_n/(2+theta)
/// intervals needed to cover length c_sigma.
long compute_Mn(double c_sigma, double r_n, double theta);

/// Waypoints x_1 = s, ..., x_M = t along the reference path, spaced
/// theta*r/(2+theta) by arc length, with balls of radius r/(2+theta) and
/// shrunken balls of radius beta*r/(2+theta).
struct BallChain {
  Eigen::MatrixXd waypoints;  ///< d x M
  double radius = 0.0;
  double beta_radius = 0.0;
  double spacing = 0.0;  ///< nominal spacing (the last step may be shorter)
  double r_n = 0.0;

  int M() const { return static_cast<int>(waypoints.cols()); }
  /// 1-based ball index, as in the analysis.
  auto center(int i) const { return waypoints.col(i - 1); }
  bool in_ball(int i, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - center(i)).norm() <= radius;
  }
  bool in_beta_ball(int i, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - center(i)).norm() <= beta_radius;
  }
};

/// Chain for radius r_n. Throws ValidationError("balls not guaranteed inside
/// F ...") unless r_n/(2+theta) < clearance.
BallChain build_ball_chain_for_radius(const Polyline& sigma_eps,
                                      double clearance, double theta,
                                      double beta, double r_n);

/// Chain for the corrected radius r(n) = gamma (log n / n)^(1/(d+1)).
BallChain build_ball_chain(const Polyline& sigma_eps, double clearance,
                           const ProofParams& params, long n);

/// Inclusive iteration range; empty when last < first.
struct IndexRange {
  long first = 1;
  long last = 0;
  long size() const { return last >= first ? last - first + 1 : 0; }
  bool contains(long j) const { return j >= first && j <= last; }
  bool operator==(const IndexRange&) const = default;
};

/// windows[0] = T_0 = {1..n'}, windows[i] = T_i for i = 1..M.
struct TimeWindows {
  long n = 0;
  long n_prime = 0;
  long width = 0;
  std::vector<IndexRange> windows;

  long M() const { return static_cast<long>(windows.size()) - 1; }
  /// Window index i >= 1 containing iteration j, or 0 if j is in T_0 or past
  /// the last window.
  long window_of(long j) const;
};

/// n' = floor(mu n), width w = floor((n - n')/M), T_i = {n'+(i-1)w+1 .. n'+iw}.
/// Throws ContractViolation("n too small for M_n") when w < 1.
TimeWindows build_time_windows(long n, double mu, long M);

/// dist(x_i, x_{i+1}) + 2 * radius for 1 <= i < M: the largest distance
/// between points of consecutive balls.
double claim1_max_pair_distance(const BallChain& chain, int i);

struct EventReport {
  bool e1 = false;
  bool e2 = false;
  bool e3 = false;
  int k_beta = 0;
  std::vector<int> per_ball_hits;       ///< |V_i intersect B_i|, i = 1..M
  std::vector<int> per_ball_beta_hits;  ///< |V_i intersect B^beta_i|
  /// Iterations j in the closed range [n', n] (starting at 1) whose x_rand
  /// lies in some ball but differs from x_new.
  long e1_violations = 0;
  /// Same count restricted to the half-open range (n', n].
  long e1_violations_open = 0;
};

/// E1: every j in [n', n] with x_rand in some ball has x_rand == x_new.
/// E2: every ball B_i holds a vertex accepted during T_i.
/// E3: at most alpha*M shrunken balls B^beta_i miss V_i.
/// V_i counts accepted iterations only. The E1 range is the closed one;
/// the half-open count used in the probabilistic argument is also reported.
EventReport detect_events(const RunTrace& trace, const BallChain& chain,
                          const TimeWindows& windows, const ProofParams& params);

struct SigmaPrime {
  Polyline path;
  /// Vertex id per waypoint; the final waypoint t carries -1 unless it is a
  /// vertex of the run.
  std::vector<int> vertex_ids;
};

/// One representative per ball: s, then for 1 < i < M the smallest-id vertex
/// of V_i in B^beta_i if any, else of V_i in B_i, then t. nullopt if E2 fails.
std::optional<SigmaPrime> assemble_sigma_prime(const RunTrace& trace,
                                               const BallChain& chain,
                                               const TimeWindows& windows);

/// Upper bound on the cost of sigma'_n when k_beta shrunken balls are missed,
/// maximised over which balls miss: each segment costs at most the spacing
/// plus the radii of its two end balls, and each missed ball raises the two
/// segments it touches from beta*radius to radius at that end.
double lemma4_cost_bound(const BallChain& chain, const ProofParams& params,
                         int k_beta);

/// xi = theta zeta_d (1-mu) / (c_sigma (2+theta)^(d+1) |F|).
double xi_constant(double theta, double mu, int d, double c_sigma,
                   double free_volume);

struct WilsonInterval {
  long successes = 0;
  long trials = 0;
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
/// Wilson score interval at 95% confidence.
WilsonInterval wilson_interval(long successes, long trials);

struct TrialOutcome {
  std::uint64_t seed = 0;  ///< sub-seed actually used by the sampler
  long n = 0;
  long trial = 0;
  EventReport events;
  long M = 0;
  double r_n = 0.0;
  double cost = 0.0;  ///< solution cost (+inf when no solution)
  std::optional<double> sigma_prime_cost;
  double cost_bound = 0.0;  ///< lemma4_cost_bound at the observed k_beta
  long e1_window = 0;       ///< n - n'
};

struct EventRates {
  WilsonInterval e1, e2, e3, e2e3;
  std::vector<TrialOutcome> trials;  ///< ordered by trial index
};

/// Sub-seed for a trial; independent of how trials are scheduled.
std::uint64_t trial_seed(std::uint64_t seed, long trial);

/// Runs RRT* `trials` times on uniform samples with sub-seeds
/// trial_seed(seed, i); the ball chain uses r(n) of `schedule` and the
/// scenario's reference path. threads <= 0 means RRTLAB_THREADS.
EventRates estimate_event_rates(const Scenario& sc, const ProofParams& params,
                                const RadiusScheduleSpec& schedule, long n,
                                long trials, std::uint64_t seed,
                                int threads = 0);

}  // namespace rrtlab
