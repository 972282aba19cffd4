#include "aberrate/psfpack.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "aberrate/error.hpp"

namespace aberrate::psfpack {
namespace {

static_assert(std::endian::native == std::endian::little, "PSFPACK I/O assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error("format", "truncated PSFPACK data");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(const Psf& psf) {
  nlohmann::json provenance = psf.provenance;
  provenance["normalized"] = psf.normalized;
  const std::string meta = provenance.dump();

  std::vector<std::uint8_t> out;
  out.reserve(32 + meta.size() + psf.kernel.data().size() * sizeof(float));
  out.insert(out.end(), {'P', 'S', 'F', 'K'});
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(psf.kernel.channels()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(psf.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(psf.width()));
  put<double>(out, psf.pitch_um);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  for (double v : psf.kernel.data()) put<float>(out, static_cast<float>(v));
  return out;
}

Psf decode(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (in.string(4) != "PSFK") throw Error("format", "bad PSFPACK magic");
  const auto version = in.get<std::uint16_t>();
  if (version != kVersion) throw Error("format", "unsupported PSFPACK version " + std::to_string(version));
  const auto channels = in.get<std::uint16_t>();
  const auto height = in.get<std::uint32_t>();
  const auto width = in.get<std::uint32_t>();
  const auto pitch = in.get<double>();
  const auto meta_len = in.get<std::uint32_t>();
  const std::string meta = in.string(meta_len);

  Psf psf;
  try {
    psf.provenance = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("bad PSFPACK provenance: ") + e.what());
  }
  if (psf.provenance.contains("normalized")) {
    psf.normalized = psf.provenance["normalized"].get<bool>();
    psf.provenance.erase("normalized");
  }
  psf.pitch_um = pitch;
  psf.kernel = Image(channels, static_cast<int>(height), static_cast<int>(width));
  for (double& v : psf.kernel.data()) v = in.get<float>();
  if (!in.done()) throw Error("format", "trailing bytes after PSFPACK samples");
  return psf;
}

void write(const std::filesystem::path& path, const Psf& psf) {
  const auto bytes = encode(psf);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("io", "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("io", "failed writing " + path.string());
}

Psf read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace aberrate::psfpack
