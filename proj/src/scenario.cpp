#include "rrtlab/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rrtlab {
namespace {

using nlohmann::json;

bool same_point(const Point& a, const Point& b) {
  return a.size() == b.size() && a == b;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(),
                                         text.begin() + static_cast<long>(byte),
                                         '\n'));
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key))
      throw ParseError(where, "unknown field '" + key + "'");
}

const json& field(const json& obj, const std::string& key,
                  const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(where, "missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where, "expected a number");
  return v.get<double>();
}

Point point(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw ParseError(where, "expected a non-empty array of numbers");
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k)
    p[static_cast<Eigen::Index>(k)] =
        number(v[k], where + "[" + std::to_string(k) + "]");
  return p;
}

json to_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p[k]);
  return a;
}

void require_dim(const Point& p, int d, const std::string& what) {
  if (p.size() != d)
    throw ValidationError(what + " has " + std::to_string(p.size()) +
                          " coordinates but dimension is " + std::to_string(d));
}

void require_in_cube(const Point& p, const std::string& what) {
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (!(p[k] >= 0.0 && p[k] <= 1.0))
      throw ValidationError(what + " has coordinates outside [0,1]");
}

}  // namespace

void validate_scenario(const Scenario& sc) {
  const int d = sc.dimension;
  if (d < 2) throw ValidationError("dimension must be >= 2");
  require_dim(sc.start, d, "start");
  require_dim(sc.target, d, "target");
  require_in_cube(sc.start, "start");
  require_in_cube(sc.target, "target");
  for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
    const auto& b = sc.obstacles[i];
    const std::string name = "obstacle " + std::to_string(i);
    require_dim(b.lower, d, name + " lower");
    require_dim(b.upper, d, name + " upper");
    require_in_cube(b.lower, name + " lower");
    require_in_cube(b.upper, name + " upper");
    for (int k = 0; k < d; ++k)
      if (!(b.lower[k] < b.upper[k]))
        throw ValidationError(name + ": lower must be < upper on every axis");
  }
  if (!(clearance_at(sc.start, sc.obstacles) > 0.0))
    throw ValidationError("start not in free space");
  if (!(clearance_at(sc.target, sc.obstacles) > 0.0))
    throw ValidationError("target not in free space");

  if (sc.clearance && !sc.reference_path)
    throw ValidationError("clearance given without reference_path");
  if (sc.stretch && !sc.reference_path)
    throw ValidationError("stretch given without reference_path");
  if (sc.reference_path) {
    const Polyline& p = *sc.reference_path;
    if (!sc.clearance)
      throw ValidationError("reference_path present without clearance");
    if (!(*sc.clearance > 0.0))
      throw ValidationError("reference_path clearance must be positive");
    if (sc.stretch && !(*sc.stretch > 0.0))
      throw ValidationError("reference_path stretch must be positive");
    if (p.size() < 1)
      throw ValidationError("reference_path needs at least one waypoint");
    if (p.dim() != d)
      throw ValidationError("reference_path waypoints have wrong dimension");
    for (Eigen::Index i = 0; i < p.size(); ++i)
      require_in_cube(Point(p[i]), "reference_path waypoint " + std::to_string(i));
    if (!same_point(p[0], sc.start))
      throw ValidationError("reference_path must start at start");
    if (!same_point(p[p.size() - 1], sc.target))
      throw ValidationError("reference_path must end at target");
    if (!path_clearance_ok(p, *sc.clearance, sc.obstacles))
      throw ValidationError(
          "reference_path does not keep the declared clearance from obstacles "
          "and the cube boundary");
  }
}

Scenario load_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte)),
                     "malformed JSON");
  }
  if (!root.is_object()) throw ParseError("line 1", "expected a JSON object");
  reject_unknown_keys(root, {"dimension", "obstacles", "start", "target",
                             "reference_path"},
                      "scenario");

  Scenario sc;
  const json& dim = field(root, "dimension", "scenario");
  if (!dim.is_number_integer())
    throw ParseError("field 'dimension'", "expected an integer");
  sc.dimension = dim.get<int>();
  sc.start = point(field(root, "start", "scenario"), "field 'start'");
  sc.target = point(field(root, "target", "scenario"), "field 'target'");

  if (auto it = root.find("obstacles"); it != root.end()) {
    if (!it->is_array())
      throw ParseError("field 'obstacles'", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "field 'obstacles[" + std::to_string(i) + "]'";
      const json& o = (*it)[i];
      if (!o.is_object()) throw ParseError(where, "expected an object");
      reject_unknown_keys(o, {"lower", "upper"}, where);
      sc.obstacles.push_back({point(field(o, "lower", where), where + ".lower"),
                              point(field(o, "upper", where), where + ".upper")});
    }
  }

  if (auto it = root.find("reference_path"); it != root.end()) {
    const std::string where = "field 'reference_path'";
    if (!it->is_object()) throw ParseError(where, "expected an object");
    reject_unknown_keys(*it, {"waypoints", "clearance", "stretch"}, where);
    const json& w = field(*it, "waypoints", where);
    if (!w.is_array() || w.empty())
      throw ParseError(where + ".waypoints", "expected a non-empty array");
    std::vector<Point> pts;
    for (std::size_t i = 0; i < w.size(); ++i) {
      pts.push_back(point(w[i], where + ".waypoints[" + std::to_string(i) + "]"));
      if (pts.back().size() != pts.front().size())
        throw ValidationError("reference_path waypoints have mixed dimensions");
    }
    sc.reference_path = Polyline(pts);
    if (auto c = it->find("clearance"); c != it->end())
      sc.clearance = number(*c, where + ".clearance");
    if (auto s = it->find("stretch"); s != it->end())
      sc.stretch = number(*s, where + ".stretch");
  }

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.where(), e.detail());
  }
}

std::string save_scenario(const Scenario& sc) {
  json root = json::object();
  root["dimension"] = sc.dimension;
  json obstacles = json::array();
  for (const auto& b : sc.obstacles)
    obstacles.push_back({{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}});
  root["obstacles"] = obstacles;
  root["start"] = to_json(sc.start);
  root["target"] = to_json(sc.target);
  if (sc.reference_path) {
    json ref = json::object();
    json w = json::array();
    for (Eigen::Index i = 0; i < sc.reference_path->size(); ++i)
      w.push_back(to_json(Point((*sc.reference_path)[i])));
    ref["waypoints"] = w;
    if (sc.clearance) ref["clearance"] = *sc.clearance;
    if (sc.stretch) ref["stretch"] = *sc.stretch;
    root["reference_path"] = ref;
  }
  return root.dump(2) + "\n";
}

}  // namespace rrtlab
