#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aberrate/mtf.hpp"
#include "aberrate/psf.hpp"

namespace aberrate::lens {

// Relative field heights in percent of the maximum field.
inline constexpr std::array<int, 5> kFieldPercents{0, 30, 50, 70, 90};

// Off-axis sample orientation: r = 0 deg, x = 45 deg, y = 90 deg. The on-axis field only has r.
enum class Azimuth { r, x, y };
inline constexpr std::array<Azimuth, 3> kAzimuths{Azimuth::r, Azimuth::x, Azimuth::y};

char azimuth_label(Azimuth azimuth);
double azimuth_degrees(Azimuth azimuth);

struct FieldKey {
  int field_percent = 0;
  Azimuth azimuth = Azimuth::r;

  auto operator<=>(const FieldKey&) const = default;
};

// "field_30_az_x"
std::string key_name(const FieldKey& key);
FieldKey parse_key_name(const std::string& name);
// Field height in [0, 1] (e.g. 0.9) to the nearest supported percentage; Error{"range"} otherwise.
int field_percent(double field_height);

// Every (field, azimuth) a complete lens must provide: 1 on axis + 3 per off-axis field.
std::vector<FieldKey> required_keys();
std::vector<FieldKey> keys_at_field(int field_percent);

// Reporting-only lens data.
struct LensMeta {
  std::string id;
  double efl_mm = 0.0;
  double fov_deg = 0.0;
  double fnum = 0.0;
  std::string type;

  nlohmann::json to_json() const;
  static LensMeta from_json(const nlohmann::json& j);
};

// Raw input: pre-rendered PSFs (any uniform pitch), per-key coefficient sets, or both.
struct LensSource {
  LensMeta meta;
  std::map<FieldKey, Psf> psfs;
  std::map<FieldKey, CoefficientSet> coefficients;
  // Set for bundles written by write_bundle(): kernels are already at the sensor pitch.
  bool processed = false;
};

struct LensSettings {
  double encircled_fraction = 0.995;
  bool exclude_edge_field = true;
  // Rendering of coefficient-only ("virtual") lenses; one output pixel is virtual_pitch_um.
  PsfSynthesisConfig virtual_synthesis{256, 2, 1.0, 255};
  double virtual_pitch_um = 1.0;
  WavelengthTriple wavelengths;

  void validate() const;
};

struct LensRecord {
  LensMeta meta;
  std::map<FieldKey, Psf> processed;  // sensor-pitch kernels, normalized and centred
  std::map<FieldKey, CoefficientSet> coefficients;
  mtf::PitchEstimate pitch;
  std::map<int, double> field_mtf50;  // field percent -> MTF50 (cycles/px), azimuths and channels averaged
  double quality = 0.0;
};

LensSource load_bundle(const std::filesystem::path& dir);
// Writes meta.json (with derived pitch and quality), the processed kernels and, if present,
// coefficients.json.
void write_bundle(const LensRecord& record, const std::filesystem::path& dir);

// Renders virtual lenses if needed, centres the hi-res PSFs, derives the sensor pitch from MTF20,
// resamples to it, crops at the encircled-energy fraction, re-centres and normalizes.
// Error{"missing_field"} names the first missing key.
LensRecord ingest_lens(const LensSource& source, const LensSettings& settings);

// Mean over fields of field_mtf50, divided by the Nyquist frequency.
double quality(const LensRecord& record);
std::map<int, double> field_mtf50(const std::map<FieldKey, Psf>& processed);

struct QualityEntry {
  std::string id;
  double quality = 0.0;
};

struct Selection {
  std::string id;
  double quality = 0.0;
  double target = 0.0;
};

// n equidistant target qualities over [min, max]; each target gets a distinct lens, assigned in
// quality order so that the total |quality - target| is minimal (equivalently, each target's
// nearest lens whenever those are distinct). Ties prefer the lower id.
std::vector<Selection> select_subset(const std::vector<QualityEntry>& entries, int n);

struct CategoryVector {
  // Axes: defocus & spherical, astigmatism, coma.
  std::array<double, 3> direction{};
  double magnitude = 0.0;
  Azimuth azimuth = Azimuth::r;
};

// Channel-averaged coefficients reduced per pair by absolute maximum; the azimuth with the largest
// reduced norm wins. Error{"unsupported"} without coefficient data, Error{"zero_vector"} if all zero.
CategoryVector project_category(const std::map<FieldKey, CoefficientSet>& coefficients, int field_percent);
CategoryVector project_category(const LensRecord& record, int field_percent);

std::string selection_csv(const std::vector<Selection>& selection);

}  // namespace aberrate::lens
