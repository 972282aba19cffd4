#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aberrate/psf.hpp"

namespace aberrate::mtf {

inline constexpr std::array<double, 4> kOrientationsDeg{0.0, 45.0, 90.0, 135.0};
inline constexpr double kNyquist = 0.5;

// Modulation along one direction in image coordinates (x right, y up), frequencies in cycles/px.
struct MtfCurve {
  double orientation_deg = 0.0;
  std::vector<double> frequency;
  std::vector<double> modulation;
};

// |FFT| of the kernel normalized to 1 at DC, stored in FFT bin order (DC at index 0).
struct MtfSurface {
  int size = 0;
  std::vector<double> modulation;

  double at(int ky, int kx) const;
};

struct MtfResult {
  MtfSurface surface;
  std::array<MtfCurve, 4> slices;
};

struct MtfSummary {
  double mtf50 = 0.0;
  double mtf20 = 0.0;
  double auc = 0.0;
  bool mtf50_saturated = false;
  bool mtf20_saturated = false;
};

struct OrientedSummary {
  std::array<MtfSummary, 4> per_orientation;
  // Orientation-averaged values; a flag is set only when every orientation saturates.
  MtfSummary mean;
};

// FFT length used when none is given: at least 256 and at least the kernel size.
int default_fft_size(int height, int width);

MtfResult mtf_from_plane(std::span<const double> plane, int height, int width, int fft_size = 0);

// Channel 0..2, or -1 for the channel average. Throws Error{"not_normalized"} unless every channel
// sums to 1 within 1e-6.
MtfResult mtf_from_psf(const Psf& psf, int channel, int fft_size = 0);

// First downward crossings of 0.5 and 0.2 by linear interpolation; trapezoidal area. A curve that
// never crosses reports the Nyquist frequency with the saturated flag.
MtfSummary summarize(const MtfCurve& curve);
OrientedSummary summarize(const MtfResult& result);

struct PitchEstimate {
  double pitch_um = 0.0;
  double nyquist_cycles_per_um = 0.0;
  bool outside_sensor_range = false;  // outside the [1, 20] um typical of CMOS/CCD sensors
  std::map<int, double> field_mtf20;  // field height in percent -> mean MTF20 (cycles/um)
};

inline constexpr int kEdgeFieldPercent = 90;

// Nyquist = mean over retained fields of the per-field mean MTF20; pitch = 1 / (2 Nyquist).
// Keys are field heights in percent of the maximum field.
PitchEstimate pitch_from_mtf20(const std::map<int, std::vector<double>>& mtf20_by_field, bool exclude_edge);

// Each PSF contributes its orientation-averaged MTF20 of every channel, converted to cycles/um by
// its own pixel pitch.
PitchEstimate derive_pixel_pitch(const std::map<int, std::vector<Psf>>& psfs_by_field, bool exclude_edge);

// CSV with columns orientation,frequency_cpp,modulation.
std::string to_csv(const MtfResult& result);
nlohmann::json to_json(const OrientedSummary& summary);

}  // namespace aberrate::mtf
