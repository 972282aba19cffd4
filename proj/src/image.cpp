#include "aberrate/image.hpp"

#include <numeric>
#include <stdexcept>

namespace aberrate {

Image::Image(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw std::invalid_argument("negative image dimension");
  data_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

double Image::channel_sum(int c) const noexcept {
  auto p = plane(c);
  return std::accumulate(p.begin(), p.end(), 0.0);
}

double Image::total_sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

}  // namespace aberrate
