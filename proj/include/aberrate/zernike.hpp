#pragma once

// Zernike polynomials on the unit disk, Fringe (University of Arizona) single-index ordering.
//
// Polynomials are unnormalized: Z = R_n^m(rho) * {1, cos(m phi), sin(m phi)}, so R_n^m(1) = 1.
// Each cosine/sine pair shares (n, m); the cosine member is the lower Fringe index. With this
// convention Fringe 5 is straight (0/90 deg) astigmatism, 6 oblique (45 deg) astigmatism, 7 and
// 8 horizontal and vertical coma, 10 and 11 horizontal and vertical trefoil.

#include <string_view>

namespace aberrate::zernike {

inline constexpr int kMaxFringe = 37;

enum class Angular { constant, cosine, sine };

struct ZernikeIndex {
  int fringe = 1;
  int n = 0;
  int m_abs = 0;
  Angular angular = Angular::constant;

  bool operator==(const ZernikeIndex&) const = default;
};

struct UnitDiskPoint {
  double rho = 0.0;
  double phi = 0.0;
};

// Throws Error{"range"} outside [1, kMaxFringe].
ZernikeIndex fringe_to_nm(int fringe);

// Aberration name for a Fringe index ("Defocus", "Astigmatism (straight)", ...).
std::string_view label(int fringe);

// Coarse family name shared by both members of a pair ("Astigmatism", "Coma", ...).
std::string_view family_label(int fringe);

// Radial polynomial R_n^m(rho) as the finite alternating factorial sum.
// Throws Error{"invalid_order"} when m > n or (n - m) is odd.
double radial(int n, int m_abs, double rho);

double evaluate(const ZernikeIndex& index, UnitDiskPoint point);

}  // namespace aberrate::zernike
