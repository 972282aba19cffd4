#include "aberrate/imageio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/core/version.hpp>
#include <opencv2/imgcodecs.hpp>

#include "aberrate/error.hpp"

namespace aberrate::imageio {
namespace {

cv::Mat to_bgr_mat(const std::vector<std::uint8_t>& rgb, int height, int width) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3) throw Error("range", "pixel buffer size mismatch");
  cv::Mat mat(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    const auto* src = rgb.data() + static_cast<std::size_t>(y) * width * 3;
    for (int x = 0; x < width; ++x) {
      row[3 * x + 0] = src[3 * x + 2];
      row[3 * x + 1] = src[3 * x + 1];
      row[3 * x + 2] = src[3 * x + 0];
    }
  }
  return mat;
}

void write(const std::filesystem::path& path, const cv::Mat& mat, const std::vector<int>& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat, params);
  } catch (const cv::Exception& e) {
    throw Error("io", "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error("io", "cannot write " + path.string());
}

}  // namespace

Image read_rgb(const std::filesystem::path& path) {
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error("io", "cannot decode " + path.string() + ": " + e.what());
  }
  if (mat.empty() || mat.type() != CV_8UC3) throw Error("io", "cannot decode " + path.string());
  Image image(3, mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x)
      for (int c = 0; c < 3; ++c) image.at(c, y, x) = row[3 * x + (2 - c)];
  }
  return image;
}

std::vector<std::uint8_t> quantize_rgb(const Image& image) {
  if (image.channels() != 3) throw Error("channel_mismatch", "expected a 3-channel image");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.height()) * image.width() * 3);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(std::round(image.at(c, y, x)), 0.0, 255.0);
        out[(static_cast<std::size_t>(y) * image.width() + x) * 3 + c] = static_cast<std::uint8_t>(v);
      }
  return out;
}

void write_jpeg(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int height, int width,
                int quality) {
  if (quality < 1 || quality > 100) throw Error("range", "JPEG quality must be in [1, 100]");
  write(path, to_bgr_mat(rgb, height, width), {cv::IMWRITE_JPEG_QUALITY, quality});
}

void write_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int height, int width) {
  write(path, to_bgr_mat(rgb, height, width), {});
}

std::string encoder_name() { return std::string("opencv-imgcodecs ") + CV_VERSION; }

bool is_supported_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace aberrate::imageio
