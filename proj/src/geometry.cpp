#include "rrtlab/geometry.hpp"

#include <algorithm>

namespace rrtlab {

double free_volume(int d, const std::vector<AxisBox>& obstacles) {
  if (d < 1) throw ContractViolation("free_volume: d must be >= 1");
  if (obstacles.empty()) return 1.0;

  // Compress coordinates per axis; every grid cell is either fully covered
  // by some box or disjoint from all box interiors.
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    auto& c = cuts[static_cast<std::size_t>(k)];
    c = {0.0, 1.0};
    for (const auto& b : obstacles) {
      c.push_back(std::clamp(b.lower[k], 0.0, 1.0));
      c.push_back(std::clamp(b.upper[k], 0.0, 1.0));
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Point mid(d);
  double covered = 0.0;
  for (;;) {
    double vol = 1.0;
    for (int k = 0; k < d; ++k) {
      const auto& c = cuts[static_cast<std::size_t>(k)];
      const std::size_t i = idx[static_cast<std::size_t>(k)];
      vol *= c[i + 1] - c[i];
      mid[k] = 0.5 * (c[i] + c[i + 1]);
    }
    if (in_obstacle(mid, obstacles)) covered += vol;

    int k = 0;
    for (; k < d; ++k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i + 1 < cuts[static_cast<std::size_t>(k)].size()) break;
      i = 0;
    }
    if (k == d) break;
  }
  return 1.0 - covered;
}

}  // namespace rrtlab
