#include "rrtlab/schedule.hpp"

#include <cmath>

#include "rrtlab/errors.hpp"
#include "rrtlab/geometry.hpp"

namespace rrtlab {

void RadiusScheduleSpec::validate() const {
  if (kind == ScheduleKind::constant) {
    if (!constant_value || !(*constant_value > 0.0))
      throw ContractViolation("constant schedule requires a positive constant_value");
    return;
  }
  if (!(gamma > 0.0)) throw ContractViolation("schedule gamma must be positive");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::original_kf: return "kf";
    case ScheduleKind::corrected: return "corrected";
    case ScheduleKind::constant: return "const";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "kf" || name == "original_kf") return ScheduleKind::original_kf;
  if (name == "corrected") return ScheduleKind::corrected;
  if (name == "const" || name == "constant") return ScheduleKind::constant;
  throw ContractViolation("unknown schedule '" + name +
                          "' (expected kf, corrected or const)");
}

double radius_value(const RadiusScheduleSpec& spec, long n, int d) {
  if (n < 1) throw ContractViolation("radius_value: n must be >= 1");
  if (d < 2) throw ContractViolation("radius_value: d must be >= 2");
  if (spec.kind == ScheduleKind::constant) {
    spec.validate();
    return *spec.constant_value;
  }
  const double nn = static_cast<double>(n);
  const double base = std::log(nn) / nn;
  const double exponent =
      spec.kind == ScheduleKind::original_kf ? 1.0 / d : 1.0 / (d + 1);
  return spec.gamma * std::pow(base, exponent);
}

double gamma_lower_bound(double eps, double theta, double mu, int d,
                         double c_star, double free_volume) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ContractViolation("eps must lie in (0, 1)");
  if (!(theta > 0.0 && theta < 0.25))
    throw ContractViolation("theta must lie in (0, 1/4)");
  if (!(mu > 0.0 && mu < 1.0)) throw ContractViolation("mu must lie in (0, 1)");
  if (d < 2) throw ContractViolation("d must be >= 2");
  if (!(c_star > 0.0)) throw ContractViolation("c_star must be positive");
  if (!(free_volume > 0.0))
    throw ContractViolation("free_volume must be positive");
  const double inner = (1.0 + eps / 4.0) * c_star /
                       ((d + 1) * theta * (1.0 - mu)) * free_volume /
                       unit_ball_volume(d);
  return (2.0 + theta) * std::pow(inner, 1.0 / (d + 1));
}

namespace {
double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)) ? r : x;
}
}  // namespace

long ceil_snapped(double x) { return static_cast<long>(std::ceil(snap(x))); }
long floor_snapped(double x) { return static_cast<long>(std::floor(snap(x))); }

}  // namespace rrtlab
