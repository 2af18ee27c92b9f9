#include "rrtlab/counterexample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rrtlab/format.hpp"

namespace rrtlab {
namespace {

using nlohmann::json;

// Frozen coordinates. All are multiples of 1/4096, so the distances that
// must tie (X5 reached via t or via X4) are computed exactly. X4 and X5 lie
// on the ray from t in direction (-4/5, 3/5).
constexpr std::array<std::array<double, 2>, 23> kScript{{
    {0.125, 0.9375},                       // X1: far above s
    {0.875, 0.9375},                       // X2: far above t
    {0.875, 0.5},                          // X3 = t
    {0.84375, 0.5234375},                  // X4
    {0.828125, 0.53515625},                // X5
    {0.74609375, 0.46630859375},           // X6
    {0.760009765625, 0.513916015625},      // X7
    {0.63671875, 0.461181640625},          // X8
    {0.727294921875, 0.446044921875},      // X9
    {0.593994140625, 0.465087890625},      // X10
    {0.67333984375, 0.546142578125},       // X11
    {0.50146484375, 0.482666015625},       // X12
    {0.619873046875, 0.55224609375},       // X13
    {0.4521484375, 0.49951171875},         // X14
    {0.501708984375, 0.4619140625},        // X15
    {0.35986328125, 0.48486328125},        // X16
    {0.47705078125, 0.54638671875},        // X17
    {0.29052734375, 0.507568359375},       // X18
    {0.35498046875, 0.46875},              // X19
    {0.246337890625, 0.552978515625},      // X20
    {0.349365234375, 0.449462890625},      // X21
    {0.224609375, 0.5380859375},           // X22
    {0.242431640625, 0.4921875},           // X23
}};

// Ball each sample is placed in (0: X1 and X2 lie outside every ball).
constexpr std::array<int, 23> kDesignated{0,  0,  12, 11, 12, 10, 11, 9,
                                          10, 8,  9,  7,  8,  6,  7,  5,
                                          6,  4,  5,  3,  4,  2,  3};

constexpr double kRadius = 0.125;
constexpr double kEta = 2.0;
constexpr int kBalls = 12;

Point p2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

BallChain fixture_balls(const Point& s, const Point& t) {
  BallChain chain;
  chain.waypoints.resize(2, kBalls);
  for (int i = 0; i < kBalls; ++i)
    chain.waypoints.col(i) = s + (static_cast<double>(i) / (kBalls - 1)) * (t - s);
  chain.r_n = kRadius;
  chain.radius = kRadius / 2.0;  // ball diameter equals the radius r
  chain.beta_radius = 0.0;
  chain.spacing = (t - s).norm() / (kBalls - 1);
  return chain;
}

std::string label(const CounterexampleFixture& fx, int vertex_id) {
  if (vertex_id == 0) return "s";
  const Point& x = fx.script[static_cast<std::size_t>(vertex_id - 1)];
  if (x.size() == fx.scenario.target.size() && x == fx.scenario.target) return "t";
  return "X" + std::to_string(vertex_id);
}

std::string ids_text(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i)
    s += (i ? "," : "") + std::to_string(ids[i]);
  return "{" + s + "}";
}

}  // namespace

CounterexampleFixture build_fixture() {
  CounterexampleFixture fx;
  Scenario& sc = fx.scenario;
  sc.dimension = 2;
  sc.start = p2(0.125, 0.5);
  sc.target = p2(0.875, 0.5);
  // Two boxes leave a horizontal corridor around y = 0.5 between x = 0.25
  // and x = 0.75, plus open lanes above and below them.
  sc.obstacles.push_back({p2(0.25, 0.0625), p2(0.75, 0.40625)});
  sc.obstacles.push_back({p2(0.25, 0.59375), p2(0.75, 0.84375)});
  sc.reference_path = Polyline(std::vector<Point>{sc.start, sc.target});
  sc.clearance = 0.078125;
  sc.stretch = 1.0;
  validate_scenario(sc);

  for (const auto& xy : kScript) fx.script.push_back(p2(xy[0], xy[1]));
  fx.eta = kEta;
  fx.radius = RadiusScheduleSpec::constant(kRadius);
  fx.balls = fixture_balls(sc.start, sc.target);
  fx.designated_ball.assign(kDesignated.begin(), kDesignated.end());
  return fx;
}

CounterexampleFixture load_fixture(const std::string& scene_path,
                                   const std::string& script_path) {
  CounterexampleFixture fx = build_fixture();
  fx.scenario = load_scenario_file(scene_path);

  std::ifstream in(script_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open script file '" + script_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json root;
  try {
    root = json::parse(buf.str());
    fx.eta = root.at("eta").get<double>();
    fx.radius = RadiusScheduleSpec::constant(root.at("radius").get<double>());
    fx.script.clear();
    for (const auto& p : root.at("points")) {
      Point x(static_cast<Eigen::Index>(p.size()));
      for (std::size_t k = 0; k < p.size(); ++k)
        x[static_cast<Eigen::Index>(k)] = p.at(k).get<double>();
      fx.script.push_back(std::move(x));
    }
  } catch (const json::exception& e) {
    throw ParseError(script_path, e.what());
  }
  fx.balls = fixture_balls(fx.scenario.start, fx.scenario.target);
  return fx;
}

std::string save_fixture_script(const CounterexampleFixture& fx) {
  json root = json::object();
  root["eta"] = fx.eta;
  root["radius"] = *fx.radius.constant_value;
  json pts = json::array();
  for (const auto& x : fx.script) {
    json p = json::array();
    for (Eigen::Index k = 0; k < x.size(); ++k) p.push_back(x[k]);
    pts.push_back(p);
  }
  root["points"] = pts;
  return root.dump(2) + "\n";
}

CounterexampleFixture perturb_fixture(const CounterexampleFixture& fx,
                                      double magnitude, std::uint64_t seed) {
  CounterexampleFixture out = fx;
  Xoshiro256 rng(seed);
  for (auto& x : out.script) {
    const double angle = 2.0 * std::acos(-1.0) * rng.uniform();
    x[0] = std::clamp(x[0] + magnitude * std::cos(angle), 0.0, 1.0);
    x[1] = std::clamp(x[1] + magnitude * std::sin(angle), 0.0, 1.0);
  }
  return out;
}

bool monotone_chain_exists(const std::vector<std::pair<long, Point>>& samples,
                           const BallChain& balls) {
  std::vector<std::pair<long, Point>> sorted = samples;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  // Greedy over balls: the smallest feasible index for ball i is the first
  // sample at or after the index chosen for ball i-1 that lies in ball i.
  long cursor = std::numeric_limits<long>::min();
  for (int i = 1; i <= balls.M(); ++i) {
    auto it = std::find_if(sorted.begin(), sorted.end(), [&](const auto& s) {
      return s.first >= cursor && balls.in_ball(i, s.second);
    });
    if (it == sorted.end()) return false;
    cursor = it->first;
  }
  return true;
}

bool monotone_chain_exists(const RunTrace& trace, const BallChain& balls,
                           const std::optional<Point>& root) {
  std::vector<std::pair<long, Point>> samples;
  if (root) samples.emplace_back(0, *root);
  for (const auto& rec : trace.records)
    if (rec.accepted) samples.emplace_back(rec.iteration, rec.x_new);
  return monotone_chain_exists(samples, balls);
}

bool VerificationReport::passed() const { return first_failure() == nullptr; }

const Milestone* VerificationReport::first_failure() const {
  for (const auto& m : milestones)
    if (!m.passed) return &m;
  return nullptr;
}

std::string VerificationReport::summary() const {
  const auto ok = static_cast<std::size_t>(std::count(pair_ok.begin(), pair_ok.end(), true));
  std::string s = "(i)&(ii): ";
  s += ok == pair_ok.size() ? "PASS for all " + std::to_string(pair_ok.size()) + " pairs"
                            : "FAIL (" + std::to_string(ok) + " of " +
                                  std::to_string(pair_ok.size()) + " pairs)";
  s += "; (iii): ";
  s += chain_exists ? "PRESENT" : "ABSENT";
  s += "; path: ";
  if (path_labels.empty()) s += "none";
  for (std::size_t i = 0; i < path_labels.size(); ++i)
    s += (i ? "," : "") + path_labels[i];
  return s;
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  for (const auto& m : milestones) {
    out << (m.passed ? "[PASS] " : "[FAIL] ") << m.name;
    if (!m.detail.empty()) out << " -- " << m.detail;
    out << '\n';
  }
  out << summary() << '\n';
  out << "path cost " << format_double(path_cost) << " vs reference "
      << format_double(reference_cost) << '\n';
  out << (passed() ? "verdict: PASS" : "verdict: FAIL at '" + first_failure()->name + "'")
      << '\n';
  return out.str();
}

std::string VerificationReport::to_json() const {
  json root = json::object();
  json ms = json::array();
  for (const auto& m : milestones)
    ms.push_back({{"name", m.name}, {"passed", m.passed}, {"detail", m.detail}});
  root["milestones"] = ms;
  root["pairs"] = pair_ok;
  const bool all_pairs =
      !pair_ok.empty() && std::all_of(pair_ok.begin(), pair_ok.end(), [](bool b) { return b; });
  root["conditions_i_ii"] = all_pairs ? "PASS" : "FAIL";
  root["condition_iii"] = chain_exists ? "PRESENT" : "ABSENT";
  root["path"] = path_labels;
  root["path_cost"] = path_cost;
  root["reference_cost"] = reference_cost;
  root["summary"] = summary();
  root["passed"] = passed();
  if (const Milestone* f = first_failure()) root["first_failure"] = f->name;
  return root.dump(2) + "\n";
}

VerificationReport verify_fixture(const CounterexampleFixture& fx) {
  VerificationReport rep;
  auto check = [&](std::string name, bool ok, std::string detail = {}) {
    rep.milestones.push_back({std::move(name), ok, std::move(detail)});
  };
  const Scenario& sc = fx.scenario;
  const BallChain& balls = fx.balls;
  const double r = *fx.radius.constant_value;
  const auto X = [&](int j) -> const Point& { return fx.script[static_cast<std::size_t>(j - 1)]; };
  const int n = static_cast<int>(fx.script.size());

  // Fixture invariants.
  check("23 scripted samples with X3 = t",
        n == 23 && X(3).size() == sc.target.size() && X(3) == sc.target);
  if (n != 23) return rep;
  check("12 balls of diameter r centred on the segment s -> t",
        balls.M() == 12 && std::abs(2.0 * balls.radius - r) <= 1e-12 &&
            balls.center(1) == sc.start && balls.center(12) == sc.target);
  check("radius below |X2 - X3|", r < dist(X(2), X(3)),
        "r = " + format_double(r) + ", |X2 - X3| = " + format_double(dist(X(2), X(3))));
  check("X22 and X23 within r of s",
        dist(sc.start, X(22)) <= r && dist(sc.start, X(23)) <= r);
  {
    std::string misplaced;
    for (int j = 1; j <= n; ++j) {
      const int b = fx.designated_ball.size() == 23
                        ? fx.designated_ball[static_cast<std::size_t>(j - 1)]
                        : 0;
      if (b > 0 && !balls.in_ball(b, X(j)))
        misplaced += " X" + std::to_string(j) + "!in b" + std::to_string(b);
    }
    check("each sample lies in its designated ball", misplaced.empty(), misplaced);
  }

  const RunResult run = rrt_star_run(sc, n, fx.eta, fx.radius, Sampler::scripted(fx.script));
  const PlannerTree& tree = run.tree;
  const RunTrace& trace = run.trace;
  {
    bool identity = true, all_accepted = true;
    for (const auto& rec : trace.records) {
      identity = identity && rec.x_new == rec.x_rand;
      all_accepted = all_accepted && rec.accepted;
    }
    check("steering leaves every sample unchanged", identity);
    check("every sample accepted (24 vertices)", all_accepted && tree.size() == 24,
          std::to_string(tree.size()) + " vertices");
  }

  // (i)+(ii): for each pair of consecutive balls, some sample in b_i was
  // drawn strictly before some sample in b_{i+1}. s counts as sample 0.
  std::vector<std::pair<long, Point>> samples{{0, sc.start}};
  for (const auto& rec : trace.records)
    if (rec.accepted) samples.emplace_back(rec.iteration, rec.x_new);
  for (int i = 1; i < balls.M(); ++i) {
    long first_in_i = std::numeric_limits<long>::max();
    long last_in_next = std::numeric_limits<long>::min();
    for (const auto& [j, x] : samples) {
      if (balls.in_ball(i, x)) first_in_i = std::min(first_in_i, j);
      if (balls.in_ball(i + 1, x)) last_in_next = std::max(last_in_next, j);
    }
    rep.pair_ok.push_back(first_in_i < last_in_next);
  }
  const auto pairs_ok = std::count(rep.pair_ok.begin(), rep.pair_ok.end(), true);
  check("conditions (i)+(ii) hold for every consecutive ball pair",
        pairs_ok == static_cast<long>(rep.pair_ok.size()),
        std::to_string(pairs_ok) + " of " + std::to_string(rep.pair_ok.size()) + " pairs");

  // (iii): no index-monotone chain through all balls.
  rep.chain_exists = monotone_chain_exists(samples, balls);
  check("condition (iii) fails: no monotone chain through the balls", !rep.chain_exists);

  // Wiring milestones.
  auto parent_at = [&](int j) {
    const auto& rec = trace[static_cast<std::size_t>(j)];
    return rec.chosen_parent ? *rec.chosen_parent : -1;
  };
  auto rewired_children = [&](int j) {
    std::vector<int> ids;
    for (const auto& w : trace[static_cast<std::size_t>(j)].rewired) ids.push_back(w.child);
    return ids;
  };
  auto rewires_all_to = [&](int j) {
    const auto& rw = trace[static_cast<std::size_t>(j)].rewired;
    return std::all_of(rw.begin(), rw.end(), [&](const Rewire& w) { return w.new_parent == j; });
  };
  check("iterations 1-3 add edges (s,X1), (X1,X2), (X2,X3)",
        parent_at(1) == 0 && parent_at(2) == 1 && parent_at(3) == 2);
  check("iteration 4 adds edge (X3,X4)", parent_at(4) == 3,
        "parent of X4 is " + std::to_string(parent_at(4)));
  check("iteration 5 adds edge (X4,X5)", parent_at(5) == 4,
        "parent of X5 is " + std::to_string(parent_at(5)));
  {
    bool chain = parent_at(6) == 4;
    std::string detail;
    for (int j = 8; j <= 20; j += 2) {
      if (parent_at(j) != j - 2) {
        chain = false;
        detail += " X" + std::to_string(j) + "<-" + std::to_string(parent_at(j));
      }
    }
    chain = chain && parent_at(22) == 0;
    check("backward chain X4,X6,...,X20 grows, then X22 attaches to s", chain, detail);
  }
  {
    std::string detail;
    for (int j = 1; j <= 21; ++j)
      if (!trace[static_cast<std::size_t>(j)].rewired.empty())
        detail += " iteration " + std::to_string(j) + " rewired " + ids_text(rewired_children(j));
    check("no rewiring before iteration 22", detail.empty(), detail);
  }
  check("iteration 22 rewires X18 and X20 to X22",
        rewired_children(22) == std::vector<int>{18, 20} && rewires_all_to(22),
        "rewired " + ids_text(rewired_children(22)));
  check("iteration 23 connects X23 to s and rewires X16, X18, X19, X21 to it",
        parent_at(23) == 0 && rewired_children(23) == std::vector<int>{16, 18, 19, 21} &&
            rewires_all_to(23),
        "rewired " + ids_text(rewired_children(23)));
  {
    // Replaying only the recorded edges must reproduce the final tree: no
    // vertex was re-parented except the rewired ones.
    std::vector<int> parent(static_cast<std::size_t>(tree.size()), -1);
    for (const auto& rec : trace.records) {
      if (rec.accepted) parent[static_cast<std::size_t>(*rec.vertex_id)] = *rec.chosen_parent;
      for (const auto& w : rec.rewired) parent[static_cast<std::size_t>(w.child)] = w.new_parent;
    }
    bool same = true, costs = true;
    for (int v = 0; v < tree.size(); ++v) {
      same = same && parent[static_cast<std::size_t>(v)] == tree.parent(v).value_or(-1);
      if (v > 0) {
        const int p = *tree.parent(v);
        costs = costs && std::abs(tree.cost(v) - tree.cost(p) - tree.edge_length(p, v)) <= 1e-9;
      }
    }
    check("no rewire propagates beyond the rewired vertices", same && costs);
  }

  // Returned path.
  const auto sol = solution_path(tree, sc, r);
  rep.reference_cost = path_cost(*sc.reference_path);
  if (sol) {
    for (int id : sol->vertex_ids) rep.path_labels.push_back(label(fx, id));
    rep.path_cost = sol->cost;
  }
  check("returned path is s,X1,X2,t",
        sol && sol->vertex_ids == std::vector<int>{0, 1, 2, 3} && rep.path_labels.back() == "t");
  check("returned path costs at least 1.5x the reference path",
        sol && rep.path_cost >= 1.5 * rep.reference_cost,
        "ratio " + format_double(rep.path_cost / rep.reference_cost));
  return rep;
}

}  // namespace rrtlab
