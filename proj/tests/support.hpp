#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aberrate/image.hpp"
#include "aberrate/imageio.hpp"
#include "aberrate/lensdb.hpp"
#include "aberrate/psf.hpp"

namespace testing_support {

namespace fs = std::filesystem;

// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("aberrate_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline aberrate::Psf impulse(int size, int channels = 3) {
  aberrate::Psf p;
  p.kernel = aberrate::Image(channels, size, size);
  for (int c = 0; c < channels; ++c) p.kernel.at(c, size / 2, size / 2) = 1.0;
  p.normalized = true;
  return p;
}

inline aberrate::Psf random_kernel(std::mt19937_64& gen, int h, int w, bool normalize = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  aberrate::Psf p;
  p.kernel = aberrate::Image(3, h, w);
  for (double& v : p.kernel.data()) v = u(gen);
  return normalize ? aberrate::normalize(p) : p;
}

inline aberrate::Image random_image(std::mt19937_64& gen, int channels, int h, int w, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  aberrate::Image img(channels, h, w);
  for (double& v : img.data()) v = u(gen);
  return img;
}

// Textured 8-bit RGB image: random rectangles over a smooth gradient plus mild noise.
inline aberrate::Image toy_image(std::uint64_t seed, int h, int w) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  aberrate::Image img(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(c, y, x) = 60.0 + 80.0 * x / w + 30.0 * c * y / h;
  for (int r = 0; r < 12; ++r) {
    const int y0 = static_cast<int>(u(gen) * h), x0 = static_cast<int>(u(gen) * w);
    const int y1 = std::min(h, y0 + 4 + static_cast<int>(u(gen) * h / 3));
    const int x1 = std::min(w, x0 + 4 + static_cast<int>(u(gen) * w / 3));
    const double v[3] = {255.0 * u(gen), 255.0 * u(gen), 255.0 * u(gen)};
    for (int c = 0; c < 3; ++c)
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) img.at(c, y, x) = v[c];
  }
  std::normal_distribution<double> noise(0.0, 4.0);
  for (double& v : img.data()) v = std::clamp(v + noise(gen), 0.0, 255.0);
  return img;
}

// Writes n toy PNGs (some in a subdirectory) and returns their relative paths in sorted order.
inline void write_toy_dataset(const fs::path& root, int n, int h, int w, std::uint64_t seed = 1) {
  for (int i = 0; i < n; ++i) {
    const aberrate::Image img = toy_image(seed * 1000 + static_cast<std::uint64_t>(i), h, w);
    char name[32];
    std::snprintf(name, sizeof name, "img_%03d.png", i);
    const fs::path rel = (i % 5 == 4) ? fs::path("sub") / name : fs::path(name);
    aberrate::imageio::write_png(root / rel, aberrate::imageio::quantize_rgb(img), h, w);
  }
}

// Virtual lens whose coefficients come from `coeffs(field_percent, azimuth)`.
inline aberrate::lens::LensSource virtual_lens(
    const std::string& id,
    const std::function<aberrate::CoefficientSet(int, aberrate::lens::Azimuth)>& coeffs) {
  aberrate::lens::LensSource src;
  src.meta.id = id;
  src.meta.efl_mm = 50.0;
  src.meta.fov_deg = 40.0;
  src.meta.fnum = 2.8;
  src.meta.type = "virtual";
  for (const auto& key : aberrate::lens::required_keys()) src.coefficients[key] = coeffs(key.field_percent, key.azimuth);
  return src;
}

// Defocus growing with field height; off-axis astigmatism rotated with the azimuth so every azimuth
// of a field blurs equally.
inline aberrate::CoefficientSet degrading_coeffs(int field_percent, aberrate::lens::Azimuth az, double strength = 1.0) {
  const double f = field_percent / 100.0;
  aberrate::CoefficientSet c;
  c.set_all(4, strength * (0.05 + 0.6 * f * f));
  if (field_percent > 0) {
    const double a = strength * 0.3 * f * f;
    if (az == aberrate::lens::Azimuth::r) c.set_all(5, a);
    if (az == aberrate::lens::Azimuth::x) c.set_all(6, a);
    if (az == aberrate::lens::Azimuth::y) c.set_all(5, -a);
  }
  return c;
}

}  // namespace testing_support
