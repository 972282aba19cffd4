#pragma once

#include <span>
#include <vector>

#include "aberrate/image.hpp"

namespace aberrate::resampling {

// Keys cubic convolution kernel with a = -0.5 (Catmull-Rom), support [-2, 2].
double cubic(double x);

// Output sample j of an axis reads input coordinate origin + j * step (in input pixel units).
// For step > 1 the cubic is stretched by step, which low-pass filters before decimation.
struct AxisMap {
  int out_size = 0;
  double origin = 0.0;
  double step = 1.0;
};

// Separable cubic resampling of one row-major plane. Taps falling outside the input are
// dropped and the remaining weights renormalized, so constant planes stay constant.
std::vector<double> resample_plane(std::span<const double> in, int height, int width, const AxisMap& rows,
                                   const AxisMap& cols);

// Pixel-center aligned resize of every channel (antialiased when shrinking).
Image resize(const Image& image, int out_height, int out_width);

}  // namespace aberrate::resampling
