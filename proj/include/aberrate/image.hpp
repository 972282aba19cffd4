#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aberrate {

// Planar multi-channel array of doubles; each channel is a row-major height x width plane.
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, double fill = 0.0);

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }

  std::span<double> plane(int c) noexcept { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const noexcept {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double channel_sum(int c) const noexcept;
  double total_sum() const noexcept;

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

}  // namespace aberrate
