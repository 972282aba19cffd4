#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aberrate/image.hpp"

namespace aberrate::imageio {

// Decodes PNG/JPEG into a 3-channel RGB image with values in [0, 255]. Throws Error{"io"}.
Image read_rgb(const std::filesystem::path& path);

// Rounds and clamps to 8 bits, interleaved RGB, row-major.
std::vector<std::uint8_t> quantize_rgb(const Image& image);

// quality in [1, 100].
void write_jpeg(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int height, int width,
                int quality);
void write_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int height, int width);

// Identifies the encoder for manifests, e.g. "opencv-imgcodecs 4.6.0".
std::string encoder_name();

bool is_supported_image(const std::filesystem::path& path);

}  // namespace aberrate::imageio
