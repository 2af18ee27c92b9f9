#include "rrtlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rrtlab/counterexample.hpp"
#include "rrtlab/format.hpp"
#include "rrtlab/parallel.hpp"
#include "rrtlab/proof_lab.hpp"

namespace rrtlab {

const char* const kPlanCsvHeader =
    "algo,schedule,gamma,n,seed,eta,success,cost,vertices";
const char* const kEventsCsvHeader =
    "schedule,n,trials,M_n,r_n,"
    "e1_rate,e1_lo,e1_hi,e2_rate,e2_lo,e2_hi,e3_rate,e3_lo,e3_hi,"
    "e2e3_rate,e2e3_lo,e2e3_hi";
const char* const kEventTrialsCsvHeader =
    "seed,n,trial,e1,e2,e3,k_beta,M_n,r_n,cost";
const char* const kBenchCsvHeader =
    "kind,schedule,n,seed,success,cost,median,q1,q3";

namespace {

using nlohmann::json;

/// Usage problems detected after CLI11 parsing (exit 64).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return format_double(v); }

/// JSON has no infinities: non-finite values become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write output file '" + path + "'");
  f << text;
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-')
    throw UsageError("invalid seed '" + s + "' (expected an unsigned 64-bit integer)");
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& raw) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : raw) seeds.push_back(parse_seed(s));
  return seeds;
}

/// Robust optimum estimate: reference cost divided by its declared stretch,
/// or the straight-line distance without a reference path.
double c_star_of(const Scenario& sc) {
  if (sc.reference_path) return path_cost(*sc.reference_path) / sc.stretch.value_or(1.0);
  return dist(sc.start, sc.target);
}

struct GammaDefaults {
  double eps = 0.5, theta = 0.2, mu = 0.5;
};

double default_gamma(const Scenario& sc, const GammaDefaults& g = {}) {
  return gamma_lower_bound(g.eps, g.theta, g.mu, sc.dimension, c_star_of(sc),
                           sc.free_volume());
}

RadiusScheduleSpec make_schedule(const std::string& name, double gamma,
                                 std::optional<double> constant_radius) {
  const ScheduleKind kind = parse_schedule_kind(name);
  if (kind == ScheduleKind::constant) {
    if (!constant_radius) throw UsageError("--schedule const requires --radius");
    return RadiusScheduleSpec::constant(*constant_radius);
  }
  return {kind, gamma, std::nullopt};
}

/// Linear-interpolation quantile of sorted values; infinities propagate.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  const double a = sorted[lo], b = sorted[lo + 1];
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) ? a : b;
  return a + frac * (b - a);
}

// ---------------------------------------------------------------- plan ---

struct PlanOptions {
  std::string scenario;
  std::string algo = "rrtstar";
  std::string schedule = "corrected";
  std::optional<double> gamma;
  std::optional<double> radius;
  std::vector<long> n{5000};
  std::vector<std::string> seeds{"1"};
  double eta = 0.3;
  std::optional<double> connect_radius;
  std::string out;
  std::string trace;
  bool json = false;
  bool timing = false;
};

struct PlanRow {
  long n = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double cost = 0.0;
  int vertices = 0;
  double runtime_ms = 0.0;
};

int cmd_plan(const PlanOptions& o, std::ostream& out, int threads) {
  const Scenario sc = load_scenario_file(o.scenario);
  if (o.algo != "rrt" && o.algo != "rrtstar")
    throw UsageError("--algo must be rrt or rrtstar");
  const double gamma = o.gamma.value_or(default_gamma(sc));
  const RadiusScheduleSpec schedule = make_schedule(o.schedule, gamma, o.radius);
  schedule.validate();
  const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds);
  if (!o.trace.empty() && o.n.size() * seeds.size() != 1)
    throw UsageError("--trace needs exactly one n and one seed");

  std::vector<PlanRow> rows;
  for (long n : o.n)
    for (std::uint64_t s : seeds) rows.push_back({n, s});
  std::vector<std::string> traces(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    PlanRow& row = rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    const Sampler sampler = Sampler::uniform_free(row.seed);
    RunResult run = o.algo == "rrt" ? rrt_run(sc, row.n, o.eta, sampler)
                                    : rrt_star_run(sc, row.n, o.eta, schedule, sampler);
    const double radius =
        o.connect_radius.value_or(radius_value(schedule, row.n, sc.dimension));
    const auto sol = solution_path(run.tree, sc, radius);
    row.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0).count();
    row.success = sol.has_value();
    row.cost = sol ? sol->cost : std::numeric_limits<double>::infinity();
    row.vertices = run.tree.size();
    if (!o.trace.empty()) {
      std::ostringstream t;
      write_trace_jsonl(run.trace, t);
      traces[i] = t.str();
    }
  });
  std::sort(rows.begin(), rows.end(), [](const PlanRow& a, const PlanRow& b) {
    return std::tie(a.n, a.seed) < std::tie(b.n, b.seed);
  });
  if (!o.trace.empty()) emit(traces.front(), o.trace, out);

  std::ostringstream text;
  if (o.json) {
    json arr = json::array();
    for (const auto& r : rows) {
      json j = {{"algo", o.algo}, {"schedule", to_string(schedule.kind)},
                {"gamma", schedule.gamma}, {"n", r.n}, {"seed", r.seed},
                {"eta", o.eta}, {"success", r.success},
                {"cost", r.success ? json(r.cost) : json(nullptr)},
                {"vertices", r.vertices}};
      if (o.timing) j["runtime_ms"] = r.runtime_ms;
      arr.push_back(j);
    }
    text << arr.dump(2) << '\n';
  } else {
    text << kPlanCsvHeader << (o.timing ? ",runtime_ms" : "") << '\n';
    for (const auto& r : rows) {
      text << o.algo << ',' << to_string(schedule.kind) << ',' << fmt(schedule.gamma)
           << ',' << r.n << ',' << r.seed << ',' << fmt(o.eta) << ','
           << (r.success ? 1 : 0) << ',' << fmt(r.cost) << ',' << r.vertices;
      if (o.timing) text << ',' << fmt(r.runtime_ms);
      text << '\n';
    }
  }
  emit(text.str(), o.out, out);
  return kExitOk;
}

// -------------------------------------------------------------- events ---

struct EventsOptions {
  std::string scenario;
  std::vector<std::string> schedules{"corrected"};
  std::optional<double> gamma;
  std::vector<long> n{2000};
  long trials = 50;
  std::string seed = "1";
  double eta = 0.3;
  double eps = 0.5, theta = 0.2, mu = 0.5;
  std::optional<double> alpha, beta;
  std::string out;
  std::string trials_out;
  bool json = false;
};

int cmd_events(const EventsOptions& o, std::ostream& out, int threads) {
  const Scenario sc = load_scenario_file(o.scenario);
  ProofParams p;
  p.eps = o.eps;
  p.theta = o.theta;
  p.mu = o.mu;
  p.alpha = o.alpha.value_or(o.theta * o.eps / 32.0);
  p.beta = o.beta.value_or(o.theta * o.eps / 32.0);
  p.eta = o.eta;
  p.gamma = 1.0;
  p.validate();  // ranges first, so a bad theta is reported as such
  p.gamma = o.gamma.value_or(default_gamma(sc, {o.eps, o.theta, o.mu}));
  p.validate();
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const std::uint64_t seed = parse_seed(o.seed);

  struct Cell {
    RadiusScheduleSpec schedule;
    long n;
    EventRates rates;
  };
  std::vector<Cell> cells;
  for (const auto& name : o.schedules)
    for (long n : o.n)
      cells.push_back({make_schedule(name, p.gamma, std::nullopt), n, {}});
  for (auto& c : cells)
    c.rates = estimate_event_rates(sc, p, c.schedule, c.n, o.trials, seed, threads);
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::make_pair(to_string(a.schedule.kind), a.n) <
           std::make_pair(to_string(b.schedule.kind), b.n);
  });

  std::ostringstream text;
  auto rate_csv = [&](const WilsonInterval& w) {
    return fmt(w.p) + ',' + fmt(w.lo) + ',' + fmt(w.hi);
  };
  auto rate_json = [](const WilsonInterval& w) {
    return json{{"successes", w.successes}, {"rate", w.p}, {"lo", w.lo}, {"hi", w.hi}};
  };
  if (o.json) {
    json arr = json::array();
    for (const auto& c : cells) {
      const auto& t0 = c.rates.trials.front();
      arr.push_back({{"schedule", to_string(c.schedule.kind)}, {"n", c.n},
                     {"trials", o.trials}, {"M_n", t0.M}, {"r_n", t0.r_n},
                     {"e1", rate_json(c.rates.e1)}, {"e2", rate_json(c.rates.e2)},
                     {"e3", rate_json(c.rates.e3)}, {"e2e3", rate_json(c.rates.e2e3)}});
    }
    text << arr.dump(2) << '\n';
  } else {
    text << kEventsCsvHeader << '\n';
    for (const auto& c : cells) {
      const auto& t0 = c.rates.trials.front();
      text << to_string(c.schedule.kind) << ',' << c.n << ',' << o.trials << ','
           << t0.M << ',' << fmt(t0.r_n) << ',' << rate_csv(c.rates.e1) << ','
           << rate_csv(c.rates.e2) << ',' << rate_csv(c.rates.e3) << ','
           << rate_csv(c.rates.e2e3) << '\n';
    }
  }
  emit(text.str(), o.out, out);

  if (!o.trials_out.empty()) {
    std::ostringstream t;
    t << kEventTrialsCsvHeader << '\n';
    for (const auto& c : cells)
      for (const auto& r : c.rates.trials)
        t << r.seed << ',' << r.n << ',' << r.trial << ',' << r.events.e1 << ','
          << r.events.e2 << ',' << r.events.e3 << ',' << r.events.k_beta << ','
          << r.M << ',' << fmt(r.r_n) << ',' << fmt(r.cost) << '\n';
    emit(t.str(), o.trials_out, out);
  }
  return kExitOk;
}

// ------------------------------------------------------ counterexample ---

struct CounterexampleOptions {
  std::optional<double> perturb;
  std::string scene;
  std::string script;
  std::string out;
  bool json = false;
};

int cmd_counterexample(const CounterexampleOptions& o, std::ostream& out,
                       std::ostream& err) {
  if (o.scene.empty() != o.script.empty())
    throw UsageError("--scene and --script must be given together");
  CounterexampleFixture fx =
      o.scene.empty() ? build_fixture() : load_fixture(o.scene, o.script);
  if (o.perturb) fx = perturb_fixture(fx, *o.perturb);
  const VerificationReport rep = verify_fixture(fx);
  emit(o.json ? rep.to_json() : rep.to_text(), o.out, out);
  if (const Milestone* f = rep.first_failure()) {
    err << "verification failed: " << f->name;
    if (!f->detail.empty()) err << " (" << f->detail << ")";
    err << '\n';
    return kExitVerificationFailed;
  }
  return kExitOk;
}

// --------------------------------------------------------------- bench ---

struct BenchOptions {
  std::string config;
  std::string scenario;
  std::vector<std::string> schedules{"kf", "corrected"};
  std::optional<double> gamma;
  std::vector<long> n;
  std::vector<std::string> seeds;
  double eta = 0.3;
  std::string out;
  bool json = false;
};

/// Fills unset options from a JSON config file. Relative scenario paths are
/// resolved against the config file's directory.
void apply_bench_config(BenchOptions& o) {
  std::ifstream in(o.config, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + o.config + "'");
  json cfg;
  try {
    cfg = json::parse(in);
    if (o.scenario.empty()) {
      std::filesystem::path p = cfg.at("scenario").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(o.config).parent_path() / p;
      o.scenario = p.string();
    }
    if (auto it = cfg.find("schedules"); it != cfg.end())
      o.schedules = it->get<std::vector<std::string>>();
    if (auto it = cfg.find("gamma"); it != cfg.end() && !o.gamma) o.gamma = it->get<double>();
    if (auto it = cfg.find("n"); it != cfg.end() && o.n.empty())
      o.n = it->get<std::vector<long>>();
    if (auto it = cfg.find("seeds"); it != cfg.end() && o.seeds.empty())
      for (const auto& s : *it)
        o.seeds.push_back(s.is_string() ? s.get<std::string>()
                                        : std::to_string(s.get<std::uint64_t>()));
    if (auto it = cfg.find("eta"); it != cfg.end()) o.eta = it->get<double>();
    if (auto it = cfg.find("out"); it != cfg.end() && o.out.empty())
      o.out = it->get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(o.config, e.what());
  }
}

int cmd_bench(BenchOptions o, std::ostream& out, int threads) {
  if (!o.config.empty()) apply_bench_config(o);
  if (o.scenario.empty()) throw UsageError("bench needs --scenario or --config");
  if (o.n.empty() || o.seeds.empty())
    throw UsageError("bench needs a nonempty n grid and seed list");
  const Scenario sc = load_scenario_file(o.scenario);
  const double gamma = o.gamma.value_or(default_gamma(sc));
  const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds);

  struct Row {
    std::string schedule;
    RadiusScheduleSpec spec;
    long n;
    std::uint64_t seed;
    double cost = 0.0;
  };
  std::vector<Row> rows;
  for (const auto& name : o.schedules) {
    const RadiusScheduleSpec spec = make_schedule(name, gamma, std::nullopt);
    for (long n : o.n)
      for (std::uint64_t s : seeds) rows.push_back({to_string(spec.kind), spec, n, s});
  }
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    Row& r = rows[i];
    const RunResult run = rrt_star_run(sc, r.n, o.eta, r.spec, Sampler::uniform_free(r.seed));
    const auto sol = solution_path(run.tree, sc, radius_value(r.spec, r.n, sc.dimension));
    r.cost = sol ? sol->cost : std::numeric_limits<double>::infinity();
  });
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.schedule, a.n, a.seed) < std::tie(b.schedule, b.n, b.seed);
  });

  std::ostringstream text;
  json arr = json::array();
  if (!o.json) text << kBenchCsvHeader << '\n';
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    std::vector<double> costs;
    for (; j < rows.size() && rows[j].schedule == rows[i].schedule && rows[j].n == rows[i].n; ++j) {
      const Row& r = rows[j];
      costs.push_back(r.cost);
      const bool ok = std::isfinite(r.cost);
      if (o.json)
        arr.push_back({{"kind", "run"}, {"schedule", r.schedule}, {"n", r.n},
                       {"seed", r.seed}, {"success", ok},
                       {"cost", ok ? json(r.cost) : json(nullptr)}});
      else
        text << "run," << r.schedule << ',' << r.n << ',' << r.seed << ','
             << (ok ? 1 : 0) << ',' << fmt(r.cost) << ",,,\n";
    }
    std::sort(costs.begin(), costs.end());
    const long successes =
        std::count_if(costs.begin(), costs.end(), [](double c) { return std::isfinite(c); });
    const double med = quantile(costs, 0.5), q1 = quantile(costs, 0.25),
                 q3 = quantile(costs, 0.75);
    if (o.json)
      arr.push_back({{"kind", "aggregate"}, {"schedule", rows[i].schedule},
                     {"n", rows[i].n}, {"successes", successes},
                     {"median", number_or_null(med)}, {"q1", number_or_null(q1)},
                     {"q3", number_or_null(q3)}});
    else
      text << "aggregate," << rows[i].schedule << ',' << rows[i].n << ",," << successes
           << ",," << fmt(med) << ',' << fmt(q1) << ',' << fmt(q3) << '\n';
    i = j;
  }
  if (o.json) text << arr.dump(2) << '\n';
  emit(text.str(), o.out, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, int threads) {
  if (threads <= 0) threads = thread_count_from_env();

  CLI::App app{"rrtlab: RRT / RRT* laboratory"};
  app.require_subcommand(1);

  PlanOptions plan;
  auto* p = app.add_subcommand("plan", "run RRT* (or RRT) and report solution cost");
  p->add_option("--scenario", plan.scenario, "scenario file (.scene.json)")->required();
  p->add_option("--algo", plan.algo, "rrtstar or rrt")->check(CLI::IsMember({"rrt", "rrtstar"}));
  p->add_option("--schedule", plan.schedule, "kf, corrected or const")
      ->check(CLI::IsMember({"kf", "corrected", "const"}));
  p->add_option("--gamma", plan.gamma, "radius constant (default: lower bound for eps=0.5, theta=0.2, mu=0.5)");
  p->add_option("--radius", plan.radius, "radius for --schedule const");
  p->add_option("--n", plan.n, "iteration counts")->delimiter(',');
  p->add_option("--seeds", plan.seeds, "seeds")->delimiter(',');
  p->add_option("--eta", plan.eta, "steering distance");
  p->add_option("--connect-radius", plan.connect_radius, "goal attachment radius (default r(n))");
  p->add_option("--out", plan.out, "output file (default stdout)");
  p->add_option("--trace", plan.trace, "write the JSON-lines trace of the single run here");
  p->add_flag("--json", plan.json, "JSON instead of CSV");
  p->add_flag("--timing", plan.timing, "add a runtime_ms column (not reproducible)");

  EventsOptions ev;
  auto* e = app.add_subcommand("events", "estimate event rates of the proof construction");
  e->add_option("--scenario", ev.scenario, "scenario file with a reference path")->required();
  e->add_option("--schedule", ev.schedules, "kf and/or corrected")->delimiter(',')
      ->check(CLI::IsMember({"kf", "corrected"}));
  e->add_option("--gamma", ev.gamma, "radius constant (default: lower bound)");
  e->add_option("--n", ev.n, "iteration counts")->delimiter(',');
  e->add_option("--trials", ev.trials, "runs per (schedule, n)");
  e->add_option("--seed,--seeds", ev.seed, "base seed for the per-trial sub-seeds");
  e->add_option("--eta", ev.eta, "steering distance");
  e->add_option("--eps", ev.eps, "eps in (0,1)");
  e->add_option("--theta", ev.theta, "theta in (0,1/4)");
  e->add_option("--mu", ev.mu, "mu in (0,1)");
  e->add_option("--alpha", ev.alpha, "alpha in (0, theta*eps/16) (default theta*eps/32)");
  e->add_option("--beta", ev.beta, "beta in (0, theta*eps/16) (default theta*eps/32)");
  e->add_option("--out", ev.out, "rates output file (default stdout)");
  e->add_option("--trials-out", ev.trials_out, "per-trial CSV output file");
  e->add_flag("--json", ev.json, "JSON instead of CSV");

  CounterexampleOptions cx;
  auto* c = app.add_subcommand("counterexample", "replay and verify the frozen counterexample");
  c->add_option("--perturb", cx.perturb, "move every scripted point by this distance");
  c->add_option("--scene", cx.scene, "fixture scene file (default: compiled-in)");
  c->add_option("--script", cx.script, "fixture script file (default: compiled-in)");
  c->add_option("--out", cx.out, "report file (default stdout)");
  c->add_flag("--json", cx.json, "machine-readable report");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "compare radius schedules over an n grid and seeds");
  b->add_option("--config", bench.config, "JSON config file");
  b->add_option("--scenario", bench.scenario, "scenario file");
  b->add_option("--schedule", bench.schedules, "schedules")->delimiter(',')
      ->check(CLI::IsMember({"kf", "corrected"}));
  b->add_option("--gamma", bench.gamma, "radius constant (default: lower bound)");
  b->add_option("--n", bench.n, "iteration counts")->delimiter(',');
  b->add_option("--seeds", bench.seeds, "seeds")->delimiter(',');
  b->add_option("--eta", bench.eta, "steering distance");
  b->add_option("--out", bench.out, "output file (default stdout)");
  b->add_flag("--json", bench.json, "JSON instead of CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (p->parsed()) return cmd_plan(plan, out, threads);
    if (e->parsed()) return cmd_events(ev, out, threads);
    if (c->parsed()) return cmd_counterexample(cx, out, err);
    if (b->parsed()) return cmd_bench(bench, out, threads);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& ex) {
    err << "parse error: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& ex) {
    err << "validation error: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const ContractViolation& ex) {
    err << "invalid parameter: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const RunError& ex) {
    err << "run error: " << ex.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace rrtlab
