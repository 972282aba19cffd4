#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aberrate/convolve.hpp"
#include "aberrate/psf.hpp"

namespace aberrate::corrupt {

enum class Task { classification, detection };
Task parse_task(const std::string& name);  // "cls" | "det"
std::string to_string(Task task);

// "bank:FAMILY:SEV" or "lens:ID:FIELD".
struct KernelSource {
  enum class Kind { bank, lens } kind = Kind::bank;
  std::string name;  // family or lens id
  int severity = 0;
  double field = 0.0;

  static KernelSource parse(const std::string& spec);
  std::string spec() const;
};

struct CorruptionJob {
  std::filesystem::path input_root;
  std::filesystem::path output_root;
  Task task = Task::classification;
  KernelSource source;
  std::uint64_t seed = 0;
  Boundary boundary = Boundary::zero;
  double jpeg_quality = 0.9;
  int resize_short_side = 256;
  int crop_size = 224;
  int workers = 1;

  void validate() const;
  int jpeg_quality_percent() const;
  // Everything that affects the output bytes; paths and worker count are deliberately absent.
  nlohmann::json echo() const;
};

struct ManifestRow {
  std::string relative_path;
  std::string output_path;
  std::string kernel_id;
  std::string sha256;  // of the 8-bit RGB pixels before JPEG encoding
  bool ok = false;
  std::string error;
};

struct Manifest {
  nlohmann::json job;
  std::vector<ManifestRow> rows;

  nlohmann::json to_json() const;
};

// Shorter side to `short_side` (bicubic, aspect preserved), then a centred crop x crop.
Image preprocess_classification(const Image& image, int short_side = 256, int crop = 224);

// Convolves every channel with its kernel channel and clamps to [0, 255].
Image apply_kernel(const Image& image, const Psf& kernel, Boundary boundary);

// Relative paths of PNG/JPEG files below root, sorted lexicographically.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& root);

// Index into `count` candidates for image k, independent of processing order.
int choose_kernel(std::uint64_t seed, std::uint64_t index, int count);

// SHA-256 over "HxWx3\n" followed by the interleaved pixels.
std::string pixel_hash(const std::vector<std::uint8_t>& rgb, int height, int width);

// Candidates: the two pair members of a bank entry or the azimuths of a lens field.
Manifest corrupt_dataset(const CorruptionJob& job, const std::vector<NamedKernel>& candidates);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace aberrate::corrupt
