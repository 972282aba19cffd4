#pragma once

#include "aberrate/image.hpp"

namespace aberrate {

// Mean SSIM over all channels: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, computed
// over the valid window positions. `dynamic_range` is the data range of the inputs (255 for 8-bit).
double ssim(const Image& a, const Image& b, double dynamic_range = 255.0);

// Peak signal-to-noise ratio in dB; +infinity for identical inputs.
double psnr(const Image& a, const Image& b, double dynamic_range = 255.0);

}  // namespace aberrate
