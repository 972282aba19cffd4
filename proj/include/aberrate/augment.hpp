#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "aberrate/convolve.hpp"
#include "aberrate/psf.hpp"

namespace aberrate::augment {

// Images are float RGB in [0, 1]; mean/std are per-channel dataset statistics on that scale.
struct AugmentConfig {
  std::vector<NamedKernel> bank;
  double alpha = 1.0;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
  std::uint64_t seed = 0;
  Boundary boundary = Boundary::reflect;

  void validate() const;
};

struct Draw {
  int kernel_index = 0;
  double m = 0.0;
};

// Kernel index uniform over the bank and m ~ Beta(alpha, alpha), keyed by (seed, image index).
Draw draw(const AugmentConfig& config, std::uint64_t image_index);

// m * (image convolved with kernel) + (1 - m) * image.
Image blend(const Image& image, const Psf& kernel, double m, Boundary boundary);

// (x - mean_c) / std_c per channel.
Image normalize_channels(Image image, const std::array<double, 3>& mean, const std::array<double, 3>& std);

struct BatchOutput {
  std::vector<Image> images;   // normalized
  std::vector<Image> blended;  // before normalization
  std::vector<Draw> draws;
};

// Image i of the batch uses draw index first_index + i. `forced_m` overrides the Beta draw.
BatchOutput augment_batch(const std::vector<Image>& batch, const AugmentConfig& config, std::uint64_t first_index = 0,
                          std::optional<double> forced_m = std::nullopt, int workers = 1);

struct CascadeGates {
  double p_external = 0.0;
  double p_optics = 0.0;
};

// First two components of a flat four-dimensional Dirichlet draw.
CascadeGates cascade_gates(std::uint64_t seed, std::uint64_t image_index);

// Stand-in for an external augmentation (for example AugMix) supplied by the caller.
using ExternalHook = std::function<Image(const Image&, std::mt19937_64&)>;

struct CascadeResult {
  Image image;  // normalized
  CascadeGates gates;
  bool external_applied = false;
  bool optics_applied = false;
  Draw draw;
};

// Each branch fires independently with its gate probability; the external hook runs first.
CascadeResult cascade(const Image& image, const AugmentConfig& config, std::uint64_t image_index,
                      const ExternalHook& external);

}  // namespace aberrate::augment
