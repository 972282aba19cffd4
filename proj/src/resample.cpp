#include "aberrate/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aberrate::resampling {
namespace {

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

std::vector<Taps> build_taps(int in_size, const AxisMap& map) {
  const double scale = std::max(map.step, 1.0);
  const double support = 2.0 * scale;
  std::vector<Taps> taps(static_cast<std::size_t>(map.out_size));
  for (int j = 0; j < map.out_size; ++j) {
    const double center = map.origin + j * map.step;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(in_size - 1, static_cast<int>(std::ceil(center + support)));
    auto& t = taps[static_cast<std::size_t>(j)];
    t.first = lo;
    double total = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double w = cubic((i - center) / scale);
      t.weights.push_back(w);
      total += w;
    }
    if (total != 0.0) {
      for (auto& w : t.weights) w /= total;
    }
  }
  return taps;
}

}  // namespace

double cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

std::vector<double> resample_plane(std::span<const double> in, int height, int width, const AxisMap& rows,
                                   const AxisMap& cols) {
  if (in.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("resample_plane: size mismatch");
  }
  if (rows.out_size <= 0 || cols.out_size <= 0) throw std::invalid_argument("resample_plane: empty output");

  const auto col_taps = build_taps(width, cols);
  const auto row_taps = build_taps(height, rows);

  // Horizontal pass: height x out_w.
  std::vector<double> tmp(static_cast<std::size_t>(height) * cols.out_size, 0.0);
  for (int y = 0; y < height; ++y) {
    const double* src = in.data() + static_cast<std::size_t>(y) * width;
    double* dst = tmp.data() + static_cast<std::size_t>(y) * cols.out_size;
    for (int j = 0; j < cols.out_size; ++j) {
      const auto& t = col_taps[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * src[t.first + k];
      dst[j] = acc;
    }
  }

  std::vector<double> out(static_cast<std::size_t>(rows.out_size) * cols.out_size, 0.0);
  for (int i = 0; i < rows.out_size; ++i) {
    const auto& t = row_taps[static_cast<std::size_t>(i)];
    double* dst = out.data() + static_cast<std::size_t>(i) * cols.out_size;
    for (std::size_t k = 0; k < t.weights.size(); ++k) {
      const double w = t.weights[k];
      const double* src = tmp.data() + static_cast<std::size_t>(t.first + k) * cols.out_size;
      for (int j = 0; j < cols.out_size; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

Image resize(const Image& image, int out_height, int out_width) {
  const double sy = static_cast<double>(image.height()) / out_height;
  const double sx = static_cast<double>(image.width()) / out_width;
  const AxisMap rows{out_height, 0.5 * sy - 0.5, sy};
  const AxisMap cols{out_width, 0.5 * sx - 0.5, sx};
  Image out(image.channels(), out_height, out_width);
  for (int c = 0; c < image.channels(); ++c) {
    auto plane = resample_plane(image.plane(c), image.height(), image.width(), rows, cols);
    std::copy(plane.begin(), plane.end(), out.plane(c).begin());
  }
  return out;
}

}  // namespace aberrate::resampling
