#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace testing_support {

// Kendall tau-b by enumerating all pairs.
inline double brute_force_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::int64_t s = 0, tied_x = 0, tied_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tied_x;
      if (dy == 0) ++tied_y;
      if (dx != 0 && dy != 0) s += (dx > 0) == (dy > 0) ? 1 : -1;
    }
  const std::int64_t n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const double tau = static_cast<double>(s) /
                     std::sqrt(static_cast<double>(n0 - tied_x) * static_cast<double>(n0 - tied_y));
  return std::clamp(tau, -1.0, 1.0);
}

}  // namespace testing_support
