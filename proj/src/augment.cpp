#include "aberrate/augment.hpp"

#include <cmath>

#include "aberrate/error.hpp"
#include "aberrate/parallel.hpp"
#include "aberrate/rng.hpp"

namespace aberrate::augment {

void AugmentConfig::validate() const {
  if (bank.empty()) throw Error("empty_bank", "augmentation bank is empty");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("config", "beta shape alpha must be positive");
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(mean[static_cast<std::size_t>(c)]) || !(std[static_cast<std::size_t>(c)] > 0.0) ||
        !std::isfinite(std[static_cast<std::size_t>(c)])) {
      throw Error("config", "channel means must be finite and deviations positive");
    }
  }
}

Draw draw(const AugmentConfig& config, std::uint64_t image_index) {
  auto gen = rng::keyed(config.seed, image_index, rng::Purpose::augment);
  Draw d;
  d.kernel_index = rng::choose(gen, static_cast<int>(config.bank.size()));
  d.m = rng::beta(gen, config.alpha, config.alpha);
  return d;
}

Image blend(const Image& image, const Psf& kernel, double m, Boundary boundary) {
  if (m == 0.0) return image;
  const Image blurred = convolve(image, kernel.kernel, boundary);
  Image out = image;
  auto dst = out.data();
  const auto src = blurred.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = m * src[i] + (1.0 - m) * dst[i];
  return out;
}

Image normalize_channels(Image image, const std::array<double, 3>& mean, const std::array<double, 3>& std) {
  if (image.channels() != 3) throw Error("channel_mismatch", "expected a 3-channel image");
  for (int c = 0; c < 3; ++c)
    for (double& v : image.plane(c)) v = (v - mean[static_cast<std::size_t>(c)]) / std[static_cast<std::size_t>(c)];
  return image;
}

BatchOutput augment_batch(const std::vector<Image>& batch, const AugmentConfig& config, std::uint64_t first_index,
                          std::optional<double> forced_m, int workers) {
  config.validate();
  if (batch.empty()) throw Error("range", "empty batch");
  if (forced_m && (!(*forced_m >= 0.0) || *forced_m > 1.0)) throw Error("range", "mixing weight must be in [0, 1]");
  BatchOutput out;
  out.images.resize(batch.size());
  out.blended.resize(batch.size());
  out.draws.resize(batch.size());
  parallel_for(batch.size(), workers, [&](std::size_t i) {
    Draw d = draw(config, first_index + i);
    if (forced_m) d.m = *forced_m;
    out.draws[i] = d;
    out.blended[i] = blend(batch[i], config.bank[static_cast<std::size_t>(d.kernel_index)].kernel, d.m, config.boundary);
    out.images[i] = normalize_channels(out.blended[i], config.mean, config.std);
  });
  return out;
}

CascadeGates cascade_gates(std::uint64_t seed, std::uint64_t image_index) {
  auto gen = rng::keyed(seed, image_index, rng::Purpose::cascade);
  const auto p = rng::flat_dirichlet4(gen);
  return {p[0], p[1]};
}

CascadeResult cascade(const Image& image, const AugmentConfig& config, std::uint64_t image_index,
                      const ExternalHook& external) {
  config.validate();
  CascadeResult r;
  r.gates = cascade_gates(config.seed, image_index);
  // Gate coins come from the cascade stream after the Dirichlet draw.
  auto gen = rng::keyed(config.seed, image_index, rng::Purpose::cascade);
  rng::flat_dirichlet4(gen);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double u_external = coin(gen), u_optics = coin(gen);
  r.external_applied = external && u_external < r.gates.p_external;
  r.optics_applied = u_optics < r.gates.p_optics;

  Image current = r.external_applied ? external(image, gen) : image;
  if (r.optics_applied) {
    r.draw = draw(config, image_index);
    current = blend(current, config.bank[static_cast<std::size_t>(r.draw.kernel_index)].kernel, r.draw.m, config.boundary);
  }
  r.image = normalize_channels(std::move(current), config.mean, config.std);
  return r;
}

}  // namespace aberrate::augment
