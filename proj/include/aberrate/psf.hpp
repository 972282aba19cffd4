#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aberrate/image.hpp"
#include "aberrate/zernike.hpp"

namespace aberrate {

inline constexpr int kRgb = 3;

enum class Channel : int { red = 0, green = 1, blue = 2 };

// Per-channel wavelengths in micrometres. Defaults to the Fraunhofer C, d and F lines.
struct WavelengthTriple {
  double red_um = 0.6563;
  double green_um = 0.5876;
  double blue_um = 0.4861;

  double operator[](int channel) const;
};

// Fringe-indexed Zernike coefficients per colour channel, in waves of that channel's wavelength.
// Absent indices are zero.
class CoefficientSet {
 public:
  void set(int channel, int fringe, double waves);
  void set_all(int fringe, double waves);
  void add_all(int fringe, double waves);
  double get(int channel, int fringe) const;
  const std::map<int, double>& channel(int c) const { return terms_.at(static_cast<std::size_t>(c)); }
  bool empty() const;

  nlohmann::json to_json() const;
  static CoefficientSet from_json(const nlohmann::json& j);

  bool operator==(const CoefficientSet&) const = default;

 private:
  std::array<std::map<int, double>, kRgb> terms_;
};

// Square pupil sampling of side N; sample (y, x) sits at pixel centre and the inscribed circle of
// radius N/2 maps onto the unit disk.
class PupilGrid {
 public:
  explicit PupilGrid(int size);

  int size() const noexcept { return size_; }
  bool inside(int y, int x) const noexcept;
  zernike::UnitDiskPoint point(int y, int x) const noexcept;
  std::size_t mask_count() const noexcept { return mask_count_; }

 private:
  int size_;
  std::size_t mask_count_ = 0;
};

struct PsfSynthesisConfig {
  int grid_size = 256;
  int pad_factor = 2;
  // Multiplies the wavefront (in waves) inside the pupil phase 2*pi*W. Kept at 1.
  double phase_scale = 1.0;
  int crop_size = 25;

  int fft_size() const noexcept { return grid_size * pad_factor; }
  void validate() const;
};

// Three-channel non-negative blur kernel. pitch_um == 0 means synthetic kernels in normalized units.
struct Psf {
  Image kernel;
  double pitch_um = 0.0;
  bool normalized = false;
  nlohmann::json provenance = nlohmann::json::object();

  int height() const noexcept { return kernel.height(); }
  int width() const noexcept { return kernel.width(); }
};

// A kernel with the identifier recorded in manifests ("coma_s3_m1", "lens7/field_50_az_x", ...).
struct NamedKernel {
  std::string id;
  Psf kernel;
};

struct CenterOfMass {
  double y = 0.0;
  double x = 0.0;
};

// W = sum_i A_i Z_i in waves at every pupil sample (row-major N x N), zero outside the mask.
std::vector<double> build_wavefront(const CoefficientSet& coeffs, const PupilGrid& grid, int channel);

// |F{Circ * exp(-j 2 pi W)}|^2 for one channel with orthonormal FFT scaling, shifted so the optical
// axis sits at (M/2, M/2) of the M x M output. Sum equals the pupil mask area.
std::vector<double> propagate_intensity(const CoefficientSet& coeffs, const PsfSynthesisConfig& config,
                                        int channel);

Psf synthesize_psf(const CoefficientSet& coeffs, const WavelengthTriple& wavelengths,
                   const PsfSynthesisConfig& config);

// Fixed chromatic wavefront of a near-diffraction-limited lens on axis (defocus, spherical,
// second spherical and Fringe 15), used as the starting point for every bank kernel.
CoefficientSet baseline_chromatic_coeffs();

// Rescales each channel to unit sum. Throws Error{"degenerate_kernel"} for empty or non-finite channels.
Psf normalize(Psf psf);

CenterOfMass center_of_mass(const Psf& psf);

// Integer shift so the summed-channel centre of mass lies within 0.5 px of the array centre.
// Even-sized kernels are first padded to odd size; if the shift would push out more than 1e-4 of
// the energy the kernel is padded instead of clipped.
Psf align_com(const Psf& psf);

// Centered crop to height x width (both odd, no larger than the input).
Psf crop_centered(const Psf& psf, int height, int width);

// Smallest centered odd-sided rectangle holding at least `fraction` of the energy, renormalized.
Psf crop_encircled(const Psf& psf, double fraction = 0.995);

// Bicubic, antialiased downsampling to a coarser pixel pitch. Pixel values are scaled by the area
// ratio so total energy is preserved before the optional renormalization.
Psf resample(const Psf& psf, double target_pitch_um, bool renormalize = true);

// Channel-averaged single-plane kernel.
Image luminance(const Psf& psf);

}  // namespace aberrate
