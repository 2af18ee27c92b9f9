#pragma once

// Connection-radius schedules n -> r(n) and the lower bound on gamma that
// makes the corrected schedule sufficient.

#include <optional>
#include <string>

namespace rrtlab {

enum class ScheduleKind {
  original_kf,  ///< gamma (log n / n)^(1/d)
  corrected,    ///< gamma (log n / n)^(1/(d+1))
  constant,     ///< fixed radius
};

struct RadiusScheduleSpec {
  ScheduleKind kind = ScheduleKind::corrected;
  double gamma = 1.0;
  std::optional<double> constant_value;

  static RadiusScheduleSpec original_kf(double gamma) {
    return {ScheduleKind::original_kf, gamma, std::nullopt};
  }
  static RadiusScheduleSpec corrected(double gamma) {
    return {ScheduleKind::corrected, gamma, std::nullopt};
  }
  static RadiusScheduleSpec constant(double value) {
    return {ScheduleKind::constant, value, value};
  }

  /// Throws ContractViolation on a non-positive gamma or a constant
  /// schedule without a positive value.
  void validate() const;
};

/// Short names used on the command line and in CSV: kf, corrected, const.
std::string to_string(ScheduleKind kind);
/// Accepts the short names and original_kf / constant.
ScheduleKind parse_schedule_kind(const std::string& name);

/// r(n) for dimension d. Formula kinds give 0 at n = 1; the constant kind
/// returns its value for every n.
double radius_value(const RadiusScheduleSpec& spec, long n, int d);

/// Smallest gamma for which the corrected schedule carries the optimality
/// guarantee, for tolerance eps in (0,1), theta in (0,1/4), mu in (0,1),
/// robust optimum c_star and free-space volume free_volume.
double gamma_lower_bound(double eps, double theta, double mu, int d,
                         double c_star, double free_volume);

/// Integer ceiling/floor of a quotient that should land on an integer when
/// the decimal inputs say so: values within 1e-12 (relative) of an integer
/// snap to it before rounding.
long ceil_snapped(double x);
long floor_snapped(double x);

}  // namespace rrtlab
