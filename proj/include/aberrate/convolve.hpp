#pragma once

#include <string_view>

#include "aberrate/image.hpp"

namespace aberrate {

// zero: samples outside the image are 0. reflect: mirror without repeating the edge sample.
enum class Boundary { zero, reflect };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary boundary);

// True 2D convolution of each image channel with the matching kernel channel (a single-channel
// kernel is applied to every channel). Kernel dimensions must be odd; the output keeps the image size.
Image convolve_direct(const Image& image, const Image& kernel, Boundary boundary);
Image convolve_fft(const Image& image, const Image& kernel, Boundary boundary);

// Picks the direct path for small kernels and the FFT path otherwise.
Image convolve(const Image& image, const Image& kernel, Boundary boundary);

}  // namespace aberrate
