#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rrtlab/cli.hpp"
#include "support.hpp"

using namespace rrtlab;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, int threads = 1) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, threads);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  f.push_back(cur);
  return f;
}

std::string scenario(const char* name) {
  return test::data_path(std::string("scenarios/") + name + ".scene.json");
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "rrtlab_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("plan: one row with a finite cost, pinned header, determinism") {
  const std::vector<std::string> args{"plan", "--scenario", scenario("empty_square"),
                                      "--schedule", "corrected", "--n", "5000", "--seeds", "3"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  const auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "algo,schedule,gamma,n,seed,eta,success,cost,vertices");
  CHECK(lines[0] == kPlanCsvHeader);
  const auto f = split(lines[1]);
  REQUIRE(f.size() == 9);
  CHECK(f[0] == "rrtstar");
  CHECK(f[1] == "corrected");
  CHECK(f[3] == "5000");
  CHECK(f[6] == "1");
  const double cost = std::stod(f[7]);
  CHECK(std::isfinite(cost));
  CHECK(cost >= 0.6 - 1e-12);
  CHECK(run(args).out == a.out);
  CHECK(run(args, 3).out == a.out);
}

TEST_CASE("plan: rows sorted by (n, seed) and thread count does not matter") {
  const std::vector<std::string> args{"plan", "--scenario", scenario("two_boxes"), "--n",
                                      "800,400", "--seeds", "5,2,9", "--algo", "rrtstar"};
  const auto a = run(args, 1), b = run(args, 4);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 7);
  CHECK(split(lines[1])[3] == "400");
  CHECK(split(lines[1])[4] == "2");
  CHECK(split(lines[6])[3] == "800");
  CHECK(split(lines[6])[4] == "9");
}

TEST_CASE("plan: rrt, const schedule, json, trace and timing") {
  auto rrt = run({"plan", "--scenario", scenario("empty_square"), "--algo", "rrt", "--n", "500"});
  CHECK(rrt.code == 0);
  CHECK(rrt.out.find("\nrrt,") != std::string::npos);
  auto konst = run({"plan", "--scenario", scenario("empty_square"), "--schedule", "const",
                    "--radius", "0.1", "--n", "500"});
  CHECK(konst.code == 0);
  CHECK(run({"plan", "--scenario", scenario("empty_square"), "--schedule", "const"}).code == 64);
  auto js = run({"plan", "--scenario", scenario("empty_square"), "--n", "500", "--json"});
  REQUIRE(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j.size() == 1);
  CHECK(j[0]["n"] == 500);
  auto timed = run({"plan", "--scenario", scenario("empty_square"), "--n", "300", "--timing"});
  CHECK(lines_of(timed.out)[0] == std::string(kPlanCsvHeader) + ",runtime_ms");

  const auto trace = scratch_dir() / "plan_trace.jsonl";
  auto tr = run({"plan", "--scenario", scenario("empty_square"), "--n", "300", "--trace",
                 trace.string()});
  CHECK(tr.code == 0);
  CHECK(lines_of(slurp(trace)).size() == 300);
}

TEST_CASE("plan: error exits") {
  const auto missing = run({"plan", "--scenario", "/no/such/file.scene.json"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/no/such/file.scene.json") != std::string::npos);
  CHECK(run({"plan"}).code == 64);
  CHECK(run({"plan", "--scenario", scenario("empty_square"), "--bogus"}).code == 64);
  CHECK(run({"plan", "--scenario", scenario("empty_square"), "--seeds", "x1"}).code == 64);
  CHECK(run({"plan", "--scenario", scenario("empty_square"), "--eta", "-1"}).code == 2);
  CHECK(run({}).code == 64);
  CHECK(run({"frobnicate"}).code == 64);
}

TEST_CASE("events: schema, trials = 1, theta out of range") {
  const std::vector<std::string> args{"events", "--scenario", scenario("empty_square"),
                                      "--n", "2000", "--trials", "1", "--seed", "4"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  const auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] ==
        "schedule,n,trials,M_n,r_n,e1_rate,e1_lo,e1_hi,e2_rate,e2_lo,e2_hi,e3_rate,e3_lo,e3_hi,"
        "e2e3_rate,e2e3_lo,e2e3_hi");
  const auto f = split(lines[1]);
  REQUIRE(f.size() == 17);
  for (int k : {5, 8, 11, 14}) CHECK((f[static_cast<std::size_t>(k)] == "0" ||
                                      f[static_cast<std::size_t>(k)] == "1"));

  const auto bad = run({"events", "--scenario", scenario("empty_square"), "--theta", "0.3"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("(0, 1/4)") != std::string::npos);
  CHECK(run({"events", "--scenario", scenario("empty_square"), "--eps", "1.5"}).code == 2);
}

TEST_CASE("events: per-trial CSV and determinism across threads") {
  const auto dir = scratch_dir();
  const auto t1 = dir / "trials1.csv", t4 = dir / "trials4.csv";
  const std::vector<std::string> base{"events", "--scenario", scenario("empty_square"),
                                      "--n", "1000,2000", "--trials", "4", "--seed", "8",
                                      "--schedule", "kf,corrected"};
  auto args1 = base, args4 = base;
  args1.insert(args1.end(), {"--trials-out", t1.string()});
  args4.insert(args4.end(), {"--trials-out", t4.string()});
  const auto a = run(args1, 1), b = run(args4, 4);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(t1) == slurp(t4));
  const auto lines = lines_of(slurp(t1));
  REQUIRE(lines.size() == 1 + 2 * 2 * 4);
  CHECK(lines[0] == "seed,n,trial,e1,e2,e3,k_beta,M_n,r_n,cost");
  CHECK(lines_of(a.out).size() == 5);
  CHECK(split(lines_of(a.out)[1])[0] == "corrected");
}

TEST_CASE("counterexample: exit codes and report formats") {
  const auto ok = run({"counterexample"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("(i)&(ii): PASS for all 11 pairs; (iii): ABSENT; path: s,X1,X2,t") !=
        std::string::npos);
  const auto js = run({"counterexample", "--json"});
  CHECK(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["conditions_i_ii"] == "PASS");
  CHECK(j["condition_iii"] == "ABSENT");
  const auto bad = run({"counterexample", "--perturb", "0.05"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("verification failed: ") == 0);
  const auto files = run({"counterexample", "--scene", test::data_path("counterexample.scene.json"),
                          "--script", test::data_path("counterexample.script.json")});
  CHECK(files.code == 0);
  CHECK(files.out == ok.out);
  CHECK(run({"counterexample", "--scene", test::data_path("counterexample.scene.json")}).code ==
        64);
}

TEST_CASE("bench: 2 schedules x 3 n x 20 seeds gives 120 + 6 rows") {
  const auto dir = scratch_dir();
  const auto cfg = dir / "bench.json";
  {
    std::ofstream f(cfg);
    nlohmann::json c = {{"scenario", scenario("empty_square")},
                        {"schedules", {"kf", "corrected"}},
                        {"n", {100, 200, 300}},
                        {"seeds", nlohmann::json::array()}};
    for (int s = 1; s <= 20; ++s) c["seeds"].push_back(s);
    f << c.dump();
  }
  const auto a = run({"bench", "--config", cfg.string()}, 1);
  REQUIRE(a.code == 0);
  const auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 1 + 120 + 6);
  CHECK(lines[0] == "kind,schedule,n,seed,success,cost,median,q1,q3");
  long runs = 0, aggregates = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    REQUIRE(f.size() == 9);
    runs += f[0] == "run";
    aggregates += f[0] == "aggregate";
  }
  CHECK(runs == 120);
  CHECK(aggregates == 6);

  // Aggregates computed independently from the run rows.
  std::map<std::pair<std::string, std::string>, std::vector<double>> costs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    if (f[0] == "run") costs[{f[1], f[2]}].push_back(std::stod(f[5]));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    if (f[0] != "aggregate") continue;
    auto v = costs[{f[1], f[2]}];
    REQUIRE(v.size() == 20);
    std::sort(v.begin(), v.end());
    CHECK(std::stod(f[6]) == doctest::Approx(0.5 * (v[9] + v[10])).epsilon(1e-15));
  }

  // Seed order and thread count do not change a byte.
  std::vector<std::string> rev{"bench", "--scenario", scenario("empty_square"), "--n",
                               "300,100,200", "--seeds"};
  std::string seeds;
  for (int s = 20; s >= 1; --s) seeds += std::to_string(s) + (s > 1 ? "," : "");
  rev.push_back(seeds);
  const auto b = run(rev, 4);
  REQUIRE(b.code == 0);
  CHECK(b.out == a.out);
}

TEST_CASE("bench: corrected median at n = 20000 is at least the straight-line distance") {
  const auto a = run({"bench", "--scenario", scenario("empty_square"), "--schedule",
                      "corrected", "--n", "20000", "--seeds", "1,2,3"});
  REQUIRE(a.code == 0);
  const auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 5);
  const auto agg = split(lines.back());
  CHECK(agg[0] == "aggregate");
  const double median = std::stod(agg[6]);
  CHECK(median >= 0.6 - 1e-12);
  CHECK(median <= 0.6 * 1.05);
}

TEST_CASE("bench: usage errors") {
  CHECK(run({"bench"}).code == 64);
  CHECK(run({"bench", "--scenario", scenario("empty_square"), "--n", "100"}).code == 64);
  CHECK(run({"bench", "--config", "/no/such/config.json"}).code == 2);
}
