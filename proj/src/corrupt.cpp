#include "aberrate/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aberrate/error.hpp"
#include "aberrate/hashing.hpp"
#include "aberrate/imageio.hpp"
#include "aberrate/parallel.hpp"
#include "aberrate/resample.hpp"
#include "aberrate/rng.hpp"

namespace aberrate::corrupt {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);) parts.push_back(part);
  return parts;
}

}  // namespace

Task parse_task(const std::string& name) {
  if (name == "cls" || name == "classification") return Task::classification;
  if (name == "det" || name == "detection") return Task::detection;
  throw Error("usage", "unknown task '" + name + "' (expected cls|det)");
}

std::string to_string(Task task) { return task == Task::classification ? "cls" : "det"; }

KernelSource KernelSource::parse(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3 || parts[1].empty()) {
    throw Error("usage", "source must be bank:FAMILY:SEV or lens:ID:FIELD, got '" + spec + "'");
  }
  KernelSource s;
  s.name = parts[1];
  try {
    std::size_t used = 0;
    if (parts[0] == "bank") {
      s.kind = Kind::bank;
      s.severity = std::stoi(parts[2], &used);
      if (s.severity < 1 || s.severity > 5) throw Error("usage", "severity must be 1..5");
    } else if (parts[0] == "lens") {
      s.kind = Kind::lens;
      s.field = std::stod(parts[2], &used);
    } else {
      throw Error("usage", "unknown source kind '" + parts[0] + "'");
    }
    if (used != parts[2].size()) throw Error("usage", "bad number in source '" + spec + "'");
  } catch (const std::logic_error&) {
    throw Error("usage", "bad number in source '" + spec + "'");
  }
  return s;
}

std::string KernelSource::spec() const {
  std::ostringstream out;
  if (kind == Kind::bank) {
    out << "bank:" << name << ':' << severity;
  } else {
    out << "lens:" << name << ':' << field;
  }
  return out.str();
}

void CorruptionJob::validate() const {
  if (!(jpeg_quality > 0.0) || jpeg_quality > 1.0) throw Error("usage", "JPEG quality must be in (0, 1]");
  if (crop_size < 1 || resize_short_side < crop_size) throw Error("config", "resize side must be >= crop size");
  if (workers < 1) throw Error("usage", "workers must be >= 1");
}

int CorruptionJob::jpeg_quality_percent() const {
  return std::clamp(static_cast<int>(std::lround(jpeg_quality * 100.0)), 1, 100);
}

nlohmann::json CorruptionJob::echo() const {
  nlohmann::json j = {
      {"task", to_string(task)},
      {"source", source.spec()},
      {"seed", seed},
      {"boundary", std::string(to_string(boundary))},
      {"jpeg_quality", jpeg_quality},
      {"jpeg_quality_percent", jpeg_quality_percent()},
      {"jpeg_encoder", imageio::encoder_name()},
      {"kernel_choice", "mt19937_64 keyed by (seed, image index)"},
  };
  if (task == Task::classification) j["preprocess"] = {{"resize_short_side", resize_short_side}, {"crop", crop_size}};
  return j;
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : rows) {
    nlohmann::json j = {{"path", r.relative_path}, {"kernel", r.kernel_id}};
    if (r.ok) {
      j["output"] = r.output_path;
      j["sha256"] = r.sha256;
      j["status"] = "ok";
    } else {
      j["status"] = "failed";
      j["error"] = r.error;
      ++failed;
    }
    records.push_back(std::move(j));
  }
  return {{"job", job}, {"master_seed", job.value("seed", std::uint64_t{0})}, {"images", rows.size()},
          {"failed", failed}, {"records", records}};
}

Image preprocess_classification(const Image& image, int short_side, int crop) {
  const int h = image.height(), w = image.width();
  if (h < 1 || w < 1) throw Error("range", "empty image");
  if (short_side < crop) throw Error("range", "resize side smaller than the crop");
  int oh, ow;
  if (h <= w) {
    oh = short_side;
    ow = static_cast<int>(static_cast<long long>(short_side) * w / h);
  } else {
    ow = short_side;
    oh = static_cast<int>(static_cast<long long>(short_side) * h / w);
  }
  const Image resized = (oh == h && ow == w) ? image : resampling::resize(image, oh, ow);
  const int top = static_cast<int>(std::lround((oh - crop) / 2.0));
  const int left = static_cast<int>(std::lround((ow - crop) / 2.0));
  Image out(image.channels(), crop, crop);
  for (int c = 0; c < image.channels(); ++c)
    for (int y = 0; y < crop; ++y)
      for (int x = 0; x < crop; ++x) out.at(c, y, x) = resized.at(c, top + y, left + x);
  return out;
}

Image apply_kernel(const Image& image, const Psf& kernel, Boundary boundary) {
  if (image.channels() != 3 || kernel.kernel.channels() != 3) {
    throw Error("channel_mismatch", "image and kernel must both have 3 channels");
  }
  Image out = convolve(image, kernel.kernel, boundary);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 255.0);
  return out;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw Error("io", "input root " + root.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && imageio::is_supported_image(entry.path())) {
      out.push_back(std::filesystem::relative(entry.path(), root));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
  return out;
}

int choose_kernel(std::uint64_t seed, std::uint64_t index, int count) {
  if (count < 1) throw Error("range", "no kernels to choose from");
  auto gen = rng::keyed(seed, index, rng::Purpose::corrupt_choice);
  return rng::choose(gen, count);
}

std::string pixel_hash(const std::vector<std::uint8_t>& rgb, int height, int width) {
  const std::string header = std::to_string(height) + "x" + std::to_string(width) + "x3\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  return sha256_hex(bytes);
}

Manifest corrupt_dataset(const CorruptionJob& job, const std::vector<NamedKernel>& candidates) {
  job.validate();
  if (candidates.empty()) throw Error("missing_source", "no kernels resolved for " + job.source.spec());
  for (const auto& k : candidates) {
    if (!k.kernel.normalized) throw Error("not_normalized", "kernel " + k.id + " is not normalized");
  }
  const auto files = list_images(job.input_root);

  Manifest manifest;
  manifest.job = job.echo();
  manifest.rows.resize(files.size());
  parallel_for(files.size(), job.workers, [&](std::size_t i) {
    auto& row = manifest.rows[i];
    row.relative_path = files[i].generic_string();
    const int choice = choose_kernel(job.seed, i, static_cast<int>(candidates.size()));
    row.kernel_id = candidates[static_cast<std::size_t>(choice)].id;
    try {
      Image image = imageio::read_rgb(job.input_root / files[i]);
      if (job.task == Task::classification) image = preprocess_classification(image, job.resize_short_side, job.crop_size);
      const Image blurred = apply_kernel(image, candidates[static_cast<std::size_t>(choice)].kernel, job.boundary);
      const auto pixels = imageio::quantize_rgb(blurred);
      row.sha256 = pixel_hash(pixels, blurred.height(), blurred.width());
      auto out_rel = files[i];
      out_rel.replace_extension(".jpg");
      imageio::write_jpeg(job.output_root / out_rel, pixels, blurred.height(), blurred.width(),
                          job.jpeg_quality_percent());
      row.output_path = out_rel.generic_string();
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.kind() + ": " + e.what();
    }
  });
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << manifest.to_json().dump(2) << '\n';
  if (!out) throw Error("io", "cannot write " + path.string());
}

}  // namespace aberrate::corrupt
