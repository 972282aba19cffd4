#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "aberrate/augment.hpp"
#include "aberrate/convolve.hpp"
#include "aberrate/lensdb.hpp"
#include "aberrate/psf.hpp"
#include "aberrate/severity.hpp"

namespace aberrate {

struct CorruptDefaults {
  double jpeg_quality = 0.9;
  Boundary boundary = Boundary::zero;
  int resize_short_side = 256;
  int crop_size = 224;
};

struct AugmentDefaults {
  double alpha = 1.0;
  int max_severity = 3;
  std::array<double, 3> mean{};
  std::array<double, 3> std{};
  Boundary boundary = Boundary::reflect;
};

// Tool configuration. Values come from the built-in defaults (configs/default.json) overlaid
// with a user file; unknown keys and out-of-range values are rejected.
struct ToolConfig {
  nlohmann::json raw;  // the merged document, echoed into manifests

  PsfSynthesisConfig synthesis;
  WavelengthTriple wavelengths;
  int mtf_fft_size = 0;
  severity::BankConfig bank;
  std::filesystem::path bank_dir;
  lens::LensSettings lens;
  std::filesystem::path lens_dir;
  CorruptDefaults corrupt;
  AugmentDefaults augment;
  int workers = 1;

  static const nlohmann::json& default_document();
  static ToolConfig defaults();
  // Throws Error{"config"} with the offending key path.
  static ToolConfig from_overrides(const nlohmann::json& overrides);
  static ToolConfig load(const std::filesystem::path& path);
};

}  // namespace aberrate
