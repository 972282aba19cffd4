#include "aberrate/zernike.hpp"

#include <array>
#include <cmath>
#include <string>

#include "aberrate/error.hpp"

namespace aberrate::zernike {
namespace {

struct Entry {
  int n;
  int m;
  Angular angular;
  std::string_view name;
};

using enum Angular;

// clang-format off
constexpr std::array<Entry, kMaxFringe> kFringe{{
    {0, 0, constant, "Piston"},
    {1, 1, cosine, "Tilt X"},
    {1, 1, sine, "Tilt Y"},
    {2, 0, constant, "Defocus"},
    {2, 2, cosine, "Astigmatism (straight)"},
    {2, 2, sine, "Astigmatism (oblique)"},
    {3, 1, cosine, "Coma (horizontal)"},
    {3, 1, sine, "Coma (vertical)"},
    {4, 0, constant, "Primary Spherical"},
    {3, 3, cosine, "Trefoil (horizontal)"},
    {3, 3, sine, "Trefoil (vertical)"},
    {4, 2, cosine, "2nd Astigmatism (straight)"},
    {4, 2, sine, "2nd Astigmatism (oblique)"},
    {5, 1, cosine, "2nd Coma (horizontal)"},
    {5, 1, sine, "2nd Coma (vertical)"},
    {6, 0, constant, "2nd Spherical"},
    {4, 4, cosine, "Tetrafoil (straight)"},
    {4, 4, sine, "Tetrafoil (oblique)"},
    {5, 3, cosine, "2nd Trefoil (horizontal)"},
    {5, 3, sine, "2nd Trefoil (vertical)"},
    {6, 2, cosine, "3rd Astigmatism (straight)"},
    {6, 2, sine, "3rd Astigmatism (oblique)"},
    {7, 1, cosine, "3rd Coma (horizontal)"},
    {7, 1, sine, "3rd Coma (vertical)"},
    {8, 0, constant, "3rd Spherical"},
    {5, 5, cosine, "Pentafoil (horizontal)"},
    {5, 5, sine, "Pentafoil (vertical)"},
    {6, 4, cosine, "2nd Tetrafoil (straight)"},
    {6, 4, sine, "2nd Tetrafoil (oblique)"},
    {7, 3, cosine, "3rd Trefoil (horizontal)"},
    {7, 3, sine, "3rd Trefoil (vertical)"},
    {8, 2, cosine, "4th Astigmatism (straight)"},
    {8, 2, sine, "4th Astigmatism (oblique)"},
    {9, 1, cosine, "4th Coma (horizontal)"},
    {9, 1, sine, "4th Coma (vertical)"},
    {10, 0, constant, "4th Spherical"},
    {12, 0, constant, "5th Spherical"},
}};
// clang-format on

const Entry& entry(int fringe) {
  if (fringe < 1 || fringe > kMaxFringe) {
    throw Error("range", "Fringe index " + std::to_string(fringe) + " outside supported range [1, " +
                             std::to_string(kMaxFringe) + "]");
  }
  return kFringe[static_cast<std::size_t>(fringe - 1)];
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

ZernikeIndex fringe_to_nm(int fringe) {
  const auto& e = entry(fringe);
  return {fringe, e.n, e.m, e.angular};
}

std::string_view label(int fringe) { return entry(fringe).name; }

std::string_view family_label(int fringe) {
  switch (fringe) {
    case 1: return "Piston";
    case 2: case 3: return "Tilt";
    case 4: return "Defocus";
    case 5: case 6: return "Astigmatism";
    case 7: case 8: return "Coma";
    case 9: return "Spherical";
    case 10: case 11: return "Trefoil";
    default: return entry(fringe).name;
  }
}

double radial(int n, int m_abs, double rho) {
  if (n < 0 || m_abs < 0 || m_abs > n || (n - m_abs) % 2 != 0) {
    throw Error("invalid_order", "invalid Zernike order (n=" + std::to_string(n) +
                                     ", m=" + std::to_string(m_abs) + ")");
  }
  const int half_diff = (n - m_abs) / 2;
  const int half_sum = (n + m_abs) / 2;
  double value = 0.0;
  for (int s = 0; s <= half_diff; ++s) {
    const double coeff = (s % 2 == 0 ? 1.0 : -1.0) * factorial(n - s) /
                         (factorial(s) * factorial(half_sum - s) * factorial(half_diff - s));
    value += coeff * std::pow(rho, n - 2 * s);
  }
  return value;
}

double evaluate(const ZernikeIndex& index, UnitDiskPoint point) {
  const double r = radial(index.n, index.m_abs, point.rho);
  switch (index.angular) {
    case Angular::constant: return r;
    case Angular::cosine: return r * std::cos(index.m_abs * point.phi);
    case Angular::sine: return r * std::sin(index.m_abs * point.phi);
  }
  return r;
}

}  // namespace aberrate::zernike
