#pragma once

// PSFPACK v1 kernel files (little-endian):
//   "PSFK" | version u16 | channels u16 | height u32 | width u32 | pitch_um f64 (0 = normalized)
//   | provenance length u32 | provenance UTF-8 JSON | channel-major f32 samples

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aberrate/psf.hpp"

namespace aberrate::psfpack {

inline constexpr std::uint16_t kVersion = 1;

std::vector<std::uint8_t> encode(const Psf& psf);
// Throws Error{"format"} on malformed input.
Psf decode(const std::vector<std::uint8_t>& bytes);

void write(const std::filesystem::path& path, const Psf& psf);
Psf read(const std::filesystem::path& path);

}  // namespace aberrate::psfpack
