#include "rrtlab/proof_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rrtlab/parallel.hpp"

namespace rrtlab {

void ProofParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw ContractViolation("eps must lie in (0, 1)");
  if (!(theta > 0.0 && theta < 0.25))
    throw ContractViolation("theta must lie in (0, 1/4)");
  if (!(mu > 0.0 && mu < 1.0)) throw ContractViolation("mu must lie in (0, 1)");
  const double cap = theta * eps / 16.0;
  if (!(alpha > 0.0 && alpha < cap))
    throw ContractViolation("alpha must lie in (0, theta*eps/16)");
  if (!(beta > 0.0 && beta < cap))
    throw ContractViolation("beta must lie in (0, theta*eps/16)");
  if (!(eta > 0.0)) throw ContractViolation("eta must be positive");
  if (!(gamma > 0.0)) throw ContractViolation("gamma must be positive");
}

long compute_Mn(double c_sigma, double r_n, double theta) {
  if (!(r_n > 0.0)) throw ContractViolation("compute_Mn: r_n must be positive");
  if (!(c_sigma >= 0.0)) throw ContractViolation("compute_Mn: c_sigma must be >= 0");
  return ceil_snapped(c_sigma * (2.0 + theta) / r_n);
}

BallChain build_ball_chain_for_radius(const Polyline& sigma_eps,
                                      double clearance, double theta,
                                      double beta, double r_n) {
  if (sigma_eps.size() < 1)
    throw ContractViolation("build_ball_chain: reference path is empty");
  if (!(theta > 0.0)) throw ContractViolation("build_ball_chain: theta must be positive");
  if (!(r_n > 0.0)) throw ContractViolation("build_ball_chain: r(n) must be positive");
  BallChain chain;
  chain.r_n = r_n;
  chain.radius = r_n / (2.0 + theta);
  chain.beta_radius = beta * chain.radius;
  chain.spacing = theta * chain.radius;
  if (!(chain.radius < clearance))
    throw ValidationError(
        "balls not guaranteed inside F: r(n)/(2+theta) must be below the "
        "reference path clearance");

  const Eigen::Index segs = sigma_eps.size() - 1;
  std::vector<double> cum(static_cast<std::size_t>(segs) + 1, 0.0);
  for (Eigen::Index i = 0; i < segs; ++i)
    cum[static_cast<std::size_t>(i) + 1] =
        cum[static_cast<std::size_t>(i)] + (sigma_eps[i + 1] - sigma_eps[i]).norm();
  const double length = cum.back();

  std::vector<Point> pts;
  const double stop = length - 1e-12 * std::max(1.0, length);
  Eigen::Index seg = 0;
  for (long k = 0;; ++k) {
    const double a = static_cast<double>(k) * chain.spacing;
    if (k > 0 && !(a < stop)) break;
    while (seg < segs - 1 && a > cum[static_cast<std::size_t>(seg) + 1]) ++seg;
    if (segs == 0 || k == 0) {
      pts.emplace_back(sigma_eps[0]);
      if (length == 0.0) break;
      continue;
    }
    const double len = cum[static_cast<std::size_t>(seg) + 1] - cum[static_cast<std::size_t>(seg)];
    const double t = len > 0.0 ? std::clamp((a - cum[static_cast<std::size_t>(seg)]) / len, 0.0, 1.0) : 0.0;
    pts.emplace_back(sigma_eps[seg] + t * (sigma_eps[seg + 1] - sigma_eps[seg]));
  }
  if (length > 0.0) pts.emplace_back(sigma_eps[sigma_eps.size() - 1]);
  chain.waypoints = Polyline(pts).waypoints;
  return chain;
}

BallChain build_ball_chain(const Polyline& sigma_eps, double clearance,
                           const ProofParams& params, long n) {
  const auto d = static_cast<int>(sigma_eps.dim());
  const double r_n = radius_value(RadiusScheduleSpec::corrected(params.gamma), n, d);
  return build_ball_chain_for_radius(sigma_eps, clearance, params.theta,
                                     params.beta, r_n);
}

long TimeWindows::window_of(long j) const {
  if (j <= n_prime || width < 1) return 0;
  const long i = (j - n_prime - 1) / width + 1;
  return i <= M() ? i : 0;
}

TimeWindows build_time_windows(long n, double mu, long M) {
  if (n < 1) throw ContractViolation("build_time_windows: n must be >= 1");
  if (M < 1) throw ContractViolation("build_time_windows: M_n must be >= 1");
  if (!(mu >= 0.0 && mu < 1.0))
    throw ContractViolation("build_time_windows: mu must lie in [0, 1)");
  TimeWindows tw;
  tw.n = n;
  tw.n_prime = floor_snapped(mu * static_cast<double>(n));
  tw.width = (n - tw.n_prime) / M;
  if (tw.width < 1) throw ContractViolation("n too small for M_n");
  tw.windows.push_back({1, tw.n_prime});
  for (long i = 1; i <= M; ++i)
    tw.windows.push_back({tw.n_prime + (i - 1) * tw.width + 1, tw.n_prime + i * tw.width});
  return tw;
}

double claim1_max_pair_distance(const BallChain& chain, int i) {
  if (i < 1 || i >= chain.M())
    throw ContractViolation("claim1_max_pair_distance: need 1 <= i < M");
  return (chain.center(i + 1) - chain.center(i)).norm() + 2.0 * chain.radius;
}

EventReport detect_events(const RunTrace& trace, const BallChain& chain,
                          const TimeWindows& windows, const ProofParams& params) {
  if (static_cast<long>(trace.size()) != windows.n)
    throw ContractViolation("detect_events: trace length differs from windows.n");
  if (windows.M() != chain.M())
    throw ContractViolation("detect_events: windows and chain disagree on M");
  const int M = chain.M();
  EventReport rep;

  // E1 only needs checking where steering moved the sample.
  for (long j = std::max(1L, windows.n_prime); j <= windows.n; ++j) {
    const auto& rec = trace[static_cast<std::size_t>(j)];
    if (rec.x_rand.size() == rec.x_new.size() && rec.x_rand == rec.x_new) continue;
    for (int i = 1; i <= M; ++i) {
      if (chain.in_ball(i, rec.x_rand)) {
        ++rep.e1_violations;
        if (j > windows.n_prime) ++rep.e1_violations_open;
        break;
      }
    }
  }
  rep.e1 = rep.e1_violations == 0;

  rep.per_ball_hits.assign(static_cast<std::size_t>(M), 0);
  rep.per_ball_beta_hits.assign(static_cast<std::size_t>(M), 0);
  for (int i = 1; i <= M; ++i) {
    const IndexRange& T = windows.windows[static_cast<std::size_t>(i)];
    for (long j = T.first; j <= T.last; ++j) {
      const auto& rec = trace[static_cast<std::size_t>(j)];
      if (!rec.accepted) continue;
      if (chain.in_ball(i, rec.x_new)) ++rep.per_ball_hits[static_cast<std::size_t>(i - 1)];
      if (chain.in_beta_ball(i, rec.x_new))
        ++rep.per_ball_beta_hits[static_cast<std::size_t>(i - 1)];
    }
  }
  rep.e2 = std::all_of(rep.per_ball_hits.begin(), rep.per_ball_hits.end(),
                       [](int h) { return h > 0; });
  rep.k_beta = static_cast<int>(std::count(rep.per_ball_beta_hits.begin(),
                                           rep.per_ball_beta_hits.end(), 0));
  rep.e3 = static_cast<double>(rep.k_beta) <= params.alpha * M;
  return rep;
}

std::optional<SigmaPrime> assemble_sigma_prime(const RunTrace& trace,
                                               const BallChain& chain,
                                               const TimeWindows& windows) {
  if (static_cast<long>(trace.size()) != windows.n)
    throw ContractViolation("assemble_sigma_prime: trace length differs from windows.n");
  if (windows.M() != chain.M())
    throw ContractViolation("assemble_sigma_prime: windows and chain disagree on M");
  const int M = chain.M();
  const Eigen::Index d = chain.waypoints.rows();

  // First accepted vertex of T_i inside B^beta_i and inside B_i. Vertex ids
  // grow with the iteration index, so the first hit has the smallest id.
  std::vector<const IterationRecord*> in_beta(static_cast<std::size_t>(M), nullptr);
  std::vector<const IterationRecord*> in_ball(static_cast<std::size_t>(M), nullptr);
  for (int i = 1; i <= M; ++i) {
    const IndexRange& T = windows.windows[static_cast<std::size_t>(i)];
    for (long j = T.first; j <= T.last; ++j) {
      const auto& rec = trace[static_cast<std::size_t>(j)];
      if (!rec.accepted) continue;
      auto& b = in_beta[static_cast<std::size_t>(i - 1)];
      auto& a = in_ball[static_cast<std::size_t>(i - 1)];
      if (!b && chain.in_beta_ball(i, rec.x_new)) b = &rec;
      if (!a && chain.in_ball(i, rec.x_new)) a = &rec;
    }
    if (!in_ball[static_cast<std::size_t>(i - 1)]) return std::nullopt;
  }

  SigmaPrime sp;
  Eigen::MatrixXd w(d, M);
  sp.vertex_ids.resize(static_cast<std::size_t>(M));
  for (int i = 1; i <= M; ++i) {
    if (i == 1) {
      w.col(0) = chain.center(1);
      sp.vertex_ids[0] = 0;
    } else if (i == M) {
      w.col(M - 1) = chain.center(M);
      sp.vertex_ids[static_cast<std::size_t>(M - 1)] = -1;
    } else {
      const IterationRecord* rep = in_beta[static_cast<std::size_t>(i - 1)];
      if (!rep) rep = in_ball[static_cast<std::size_t>(i - 1)];
      w.col(i - 1) = rep->x_new;
      sp.vertex_ids[static_cast<std::size_t>(i - 1)] = *rep->vertex_id;
    }
  }
  sp.path = Polyline(std::move(w));
  return sp;
}

double lemma4_cost_bound(const BallChain& chain, const ProofParams& params,
                         int k_beta) {
  if (k_beta < 0 || k_beta > chain.M())
    throw ContractViolation("lemma4_cost_bound: need 0 <= k_beta <= M_n");
  const long segments = chain.M() - 1;
  if (segments <= 0) return 0.0;
  const double u = chain.radius;
  // Interior balls only: the endpoints of sigma'_n are s and t themselves.
  const long misses = std::min<long>(k_beta, std::max(0L, segments - 1));
  const double base = static_cast<double>(segments) * (params.theta + 2.0 * params.beta) * u;
  return base + 2.0 * static_cast<double>(misses) * (1.0 - params.beta) * u;
}

double xi_constant(double theta, double mu, int d, double c_sigma,
                   double free_volume) {
  return theta * unit_ball_volume(d) * (1.0 - mu) /
         (c_sigma * std::pow(2.0 + theta, d + 1) * free_volume);
}

WilsonInterval wilson_interval(long successes, long trials) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw ContractViolation("wilson_interval: need 0 <= successes <= trials, trials >= 1");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {successes, trials, p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::uint64_t trial_seed(std::uint64_t seed, long trial) {
  return derive_seed(seed, static_cast<std::uint64_t>(trial));
}

EventRates estimate_event_rates(const Scenario& sc, const ProofParams& params,
                                const RadiusScheduleSpec& schedule, long n,
                                long trials, std::uint64_t seed, int threads) {
  params.validate();
  schedule.validate();
  if (trials < 1) throw ContractViolation("estimate_event_rates: trials must be >= 1");
  if (!sc.reference_path || !sc.clearance)
    throw ValidationError("scenario has no reference_path with clearance");
  const double r_n = radius_value(schedule, n, sc.dimension);
  const BallChain chain = build_ball_chain_for_radius(
      *sc.reference_path, *sc.clearance, params.theta, params.beta, r_n);
  const TimeWindows windows = build_time_windows(n, params.mu, chain.M());

  EventRates out;
  out.trials.resize(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials),
               threads > 0 ? threads : thread_count_from_env(),
               [&](std::size_t t) {
    TrialOutcome& o = out.trials[t];
    o.trial = static_cast<long>(t);
    o.seed = trial_seed(seed, o.trial);
    o.n = n;
    o.M = chain.M();
    o.r_n = r_n;
    o.e1_window = n - windows.n_prime;
    const RunResult run =
        rrt_star_run(sc, n, params.eta, schedule, Sampler::uniform_free(o.seed));
    o.events = detect_events(run.trace, chain, windows, params);
    const auto sol = solution_path(run.tree, sc, r_n);
    o.cost = sol ? sol->cost : std::numeric_limits<double>::infinity();
    if (const auto sp = assemble_sigma_prime(run.trace, chain, windows))
      o.sigma_prime_cost = path_cost(sp->path);
    o.cost_bound = lemma4_cost_bound(chain, params, o.events.k_beta);
  });

  long e1 = 0, e2 = 0, e3 = 0, e23 = 0;
  for (const auto& o : out.trials) {
    e1 += o.events.e1;
    e2 += o.events.e2;
    e3 += o.events.e3;
    e23 += o.events.e2 && o.events.e3;
  }
  out.e1 = wilson_interval(e1, trials);
  out.e2 = wilson_interval(e2, trials);
  out.e3 = wilson_interval(e3, trials);
  out.e2e3 = wilson_interval(e23, trials);
  return out;
}

}  // namespace rrtlab
