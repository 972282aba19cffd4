#include "aberrate/psf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aberrate/error.hpp"
#include "aberrate/fft.hpp"
#include "aberrate/resample.hpp"

namespace aberrate {
namespace {

void check_channel(int channel) {
  if (channel < 0 || channel >= kRgb) throw Error("range", "channel index " + std::to_string(channel));
}

bool is_odd(int v) { return v % 2 != 0; }

// Appends one zero row and/or column so both dimensions are odd.
Psf pad_to_odd(const Psf& psf) {
  if (is_odd(psf.height()) && is_odd(psf.width())) return psf;
  Psf out = psf;
  const int h = psf.height() + (is_odd(psf.height()) ? 0 : 1);
  const int w = psf.width() + (is_odd(psf.width()) ? 0 : 1);
  out.kernel = Image(psf.kernel.channels(), h, w);
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < psf.height(); ++y)
      for (int x = 0; x < psf.width(); ++x) out.kernel.at(c, y, x) = psf.kernel.at(c, y, x);
  return out;
}

Psf pad_symmetric(const Psf& psf, int py, int px) {
  Psf out = psf;
  out.kernel = Image(psf.kernel.channels(), psf.height() + 2 * py, psf.width() + 2 * px);
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < psf.height(); ++y)
      for (int x = 0; x < psf.width(); ++x) out.kernel.at(c, y + py, x + px) = psf.kernel.at(c, y, x);
  return out;
}

}  // namespace

double WavelengthTriple::operator[](int channel) const {
  check_channel(channel);
  return channel == 0 ? red_um : channel == 1 ? green_um : blue_um;
}

void CoefficientSet::set(int channel, int fringe, double waves) {
  check_channel(channel);
  zernike::fringe_to_nm(fringe);
  if (!std::isfinite(waves)) throw Error("non_finite", "coefficient for Fringe " + std::to_string(fringe) + " is not finite");
  terms_[static_cast<std::size_t>(channel)][fringe] = waves;
}

void CoefficientSet::set_all(int fringe, double waves) {
  for (int c = 0; c < kRgb; ++c) set(c, fringe, waves);
}

void CoefficientSet::add_all(int fringe, double waves) {
  for (int c = 0; c < kRgb; ++c) set(c, fringe, get(c, fringe) + waves);
}

double CoefficientSet::get(int channel, int fringe) const {
  check_channel(channel);
  const auto& m = terms_[static_cast<std::size_t>(channel)];
  auto it = m.find(fringe);
  return it == m.end() ? 0.0 : it->second;
}

bool CoefficientSet::empty() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& m) { return m.empty(); });
}

nlohmann::json CoefficientSet::to_json() const {
  static constexpr const char* names[kRgb] = {"red", "green", "blue"};
  nlohmann::json j = nlohmann::json::object();
  for (int c = 0; c < kRgb; ++c) {
    nlohmann::json ch = nlohmann::json::object();
    for (const auto& [fringe, value] : terms_[static_cast<std::size_t>(c)]) ch[std::to_string(fringe)] = value;
    j[names[c]] = ch;
  }
  return j;
}

CoefficientSet CoefficientSet::from_json(const nlohmann::json& j) {
  static constexpr const char* names[kRgb] = {"red", "green", "blue"};
  CoefficientSet set;
  if (!j.is_object()) throw Error("format", "coefficient set must be a JSON object");
  for (int c = 0; c < kRgb; ++c) {
    if (!j.contains(names[c])) continue;
    for (const auto& [key, value] : j.at(names[c]).items()) set.set(c, std::stoi(key), value.get<double>());
  }
  return set;
}

PupilGrid::PupilGrid(int size) : size_(size) {
  if (size < 64 || size % 2 != 0) throw Error("range", "pupil grid size must be even and >= 64");
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) mask_count_ += inside(y, x) ? 1 : 0;
}

bool PupilGrid::inside(int y, int x) const noexcept { return point(y, x).rho <= 1.0; }

zernike::UnitDiskPoint PupilGrid::point(int y, int x) const noexcept {
  const double half = 0.5 * size_;
  const double u = (x + 0.5 - half) / half;
  const double v = (half - (y + 0.5)) / half;
  return {std::hypot(u, v), std::atan2(v, u)};
}

void PsfSynthesisConfig::validate() const {
  PupilGrid{grid_size};
  if (pad_factor < 1) throw Error("config", "pad factor must be >= 1");
  if (crop_size < 1 || !is_odd(crop_size)) throw Error("config", "crop size must be odd and positive");
  if (crop_size > fft_size() - 1) throw Error("config", "crop size larger than the FFT output");
  if (!std::isfinite(phase_scale)) throw Error("config", "phase scale must be finite");
}

std::vector<double> build_wavefront(const CoefficientSet& coeffs, const PupilGrid& grid, int channel) {
  const int n = grid.size();
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  const auto& terms = coeffs.channel(channel);
  std::vector<std::pair<zernike::ZernikeIndex, double>> indexed;
  for (const auto& [fringe, value] : terms) indexed.emplace_back(zernike::fringe_to_nm(fringe), value);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto p = grid.point(y, x);
      if (p.rho > 1.0) continue;
      double acc = 0.0;
      for (const auto& [index, value] : indexed) acc += value * zernike::evaluate(index, p);
      w[static_cast<std::size_t>(y) * n + x] = acc;
    }
  }
  return w;
}

std::vector<double> propagate_intensity(const CoefficientSet& coeffs, const PsfSynthesisConfig& config,
                                        int channel) {
  config.validate();
  check_channel(channel);
  const PupilGrid grid(config.grid_size);
  const auto wavefront = build_wavefront(coeffs, grid, channel);
  const int n = config.grid_size;
  const int m = config.fft_size();

  std::vector<fft::Complex> field(static_cast<std::size_t>(m) * m, {0.0, 0.0});
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (!grid.inside(y, x)) continue;
      const double w = wavefront[static_cast<std::size_t>(y) * n + x];
      if (!std::isfinite(w)) throw Error("non_finite", "wavefront contains non-finite values");
      const double phase = -2.0 * std::numbers::pi * config.phase_scale * w;
      field[static_cast<std::size_t>(y) * m + x] = std::polar(1.0, phase);
    }
  }
  fft::forward_2d(field, m, m);

  const double scale = 1.0 / (static_cast<double>(m) * m);
  std::vector<double> intensity(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) intensity[i] = std::norm(field[i]) * scale;
  return fft::fftshift<double>(intensity, m, m);
}

Psf synthesize_psf(const CoefficientSet& coeffs, const WavelengthTriple& wavelengths,
                   const PsfSynthesisConfig& config) {
  config.validate();
  const int m = config.fft_size();
  const int half = config.crop_size / 2;
  const int origin = m / 2 - half;

  Psf psf;
  psf.kernel = Image(kRgb, config.crop_size, config.crop_size);
  for (int c = 0; c < kRgb; ++c) {
    const auto full = propagate_intensity(coeffs, config, c);
    for (int y = 0; y < config.crop_size; ++y)
      for (int x = 0; x < config.crop_size; ++x)
        psf.kernel.at(c, y, x) = full[static_cast<std::size_t>(origin + y) * m + origin + x];
  }
  psf.provenance = {
      {"source", "zernike"},
      {"coefficients", coeffs.to_json()},
      {"wavelengths_um", {wavelengths.red_um, wavelengths.green_um, wavelengths.blue_um}},
      {"grid_size", config.grid_size},
      {"pad_factor", config.pad_factor},
      {"crop_size", config.crop_size},
  };
  return normalize(std::move(psf));
}

CoefficientSet baseline_chromatic_coeffs() {
  CoefficientSet set;
  set.set(0, 4, 0.32671);
  set.set(0, 9, 0.088223);
  set.set(0, 15, -0.061867);
  set.set(0, 16, -4.7631E-06);
  set.set(1, 4, 0.11273);
  set.set(1, 9, 0.095923);
  set.set(1, 15, -0.069497);
  set.set(1, 16, -5.3967E-06);
  set.set(2, 4, -0.41772);
  set.set(2, 9, 0.10825);
  set.set(2, 15, -0.085119);
  set.set(2, 16, -6.7436E-06);
  return set;
}

Psf normalize(Psf psf) {
  for (int c = 0; c < psf.kernel.channels(); ++c) {
    auto plane = psf.kernel.plane(c);
    double sum = 0.0;
    for (double v : plane) {
      if (!std::isfinite(v)) throw Error("degenerate_kernel", "kernel contains non-finite samples");
      if (v < 0.0) throw Error("degenerate_kernel", "kernel contains negative samples");
      sum += v;
    }
    if (!(sum > 0.0)) throw Error("degenerate_kernel", "kernel channel " + std::to_string(c) + " has zero energy");
    for (double& v : plane) v /= sum;
  }
  psf.normalized = true;
  return psf;
}

CenterOfMass center_of_mass(const Psf& psf) {
  double total = 0.0, sy = 0.0, sx = 0.0;
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < psf.height(); ++y)
      for (int x = 0; x < psf.width(); ++x) {
        const double v = psf.kernel.at(c, y, x);
        total += v;
        sy += v * y;
        sx += v * x;
      }
  if (!(total > 0.0) || !std::isfinite(total)) throw Error("degenerate_kernel", "kernel has no energy");
  return {sy / total, sx / total};
}

Psf align_com(const Psf& input) {
  Psf psf = pad_to_odd(input);
  const auto com = center_of_mass(psf);
  const double dy = (psf.height() - 1) / 2 - com.y;
  const double dx = (psf.width() - 1) / 2 - com.x;
  const int shift_y = std::abs(dy) <= 0.5 ? 0 : static_cast<int>(std::lround(dy));
  const int shift_x = std::abs(dx) <= 0.5 ? 0 : static_cast<int>(std::lround(dx));
  if (shift_y == 0 && shift_x == 0) return psf;

  const auto in_bounds = [&](int y, int x) { return y >= 0 && y < psf.height() && x >= 0 && x < psf.width(); };
  double total = 0.0, lost = 0.0;
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < psf.height(); ++y)
      for (int x = 0; x < psf.width(); ++x) {
        const double v = psf.kernel.at(c, y, x);
        total += v;
        if (!in_bounds(y + shift_y, x + shift_x)) lost += v;
      }
  if (lost > 1e-4 * total) psf = pad_symmetric(psf, std::abs(shift_y), std::abs(shift_x));

  Psf out = psf;
  out.kernel = Image(psf.kernel.channels(), psf.height(), psf.width());
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < psf.height(); ++y)
      for (int x = 0; x < psf.width(); ++x)
        if (in_bounds(y + shift_y, x + shift_x)) out.kernel.at(c, y + shift_y, x + shift_x) = psf.kernel.at(c, y, x);
  if (out.normalized) out = normalize(std::move(out));
  return out;
}

Psf crop_centered(const Psf& psf, int height, int width) {
  if (!is_odd(height) || !is_odd(width) || height > psf.height() || width > psf.width()) {
    throw Error("range", "centered crop must be odd-sized and fit inside the kernel");
  }
  const int oy = (psf.height() - 1) / 2 - height / 2;
  const int ox = (psf.width() - 1) / 2 - width / 2;
  Psf out = psf;
  out.kernel = Image(psf.kernel.channels(), height, width);
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.kernel.at(c, y, x) = psf.kernel.at(c, oy + y, ox + x);
  return out;
}

Psf crop_encircled(const Psf& psf, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw Error("range", "encircled energy fraction must be in (0, 1]");
  if (!is_odd(psf.height()) || !is_odd(psf.width())) throw Error("range", "kernel must be odd-sized to crop");
  const int h = psf.height();
  const int w = psf.width();

  // Summed-area table of the channel sum.
  std::vector<double> table(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
  const auto at = [&](int y, int x) -> double& { return table[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int c = 0; c < psf.kernel.channels(); ++c) v += psf.kernel.at(c, y, x);
      at(y + 1, x + 1) = v + at(y, x + 1) + at(y + 1, x) - at(y, x);
    }
  const int cy = (h - 1) / 2;
  const int cx = (w - 1) / 2;
  const auto energy = [&](int a, int b) {
    return at(cy + a + 1, cx + b + 1) - at(cy - a, cx + b + 1) - at(cy + a + 1, cx - b) + at(cy - a, cx - b);
  };
  const double total = energy(cy, cx);
  if (!(total > 0.0)) throw Error("degenerate_kernel", "kernel has no energy");
  const double required = fraction * total * (1.0 - 1e-12);

  int best_a = cy, best_b = cx;
  long best_area = static_cast<long>(h) * w;
  for (int a = 0; a <= cy; ++a) {
    for (int b = 0; b <= cx; ++b) {
      const long area = static_cast<long>(2 * a + 1) * (2 * b + 1);
      if (area > best_area) break;
      if (energy(a, b) < required) continue;
      const bool better = area < best_area ||
                          (area == best_area && (std::abs(a - b) < std::abs(best_a - best_b) ||
                                                 (std::abs(a - b) == std::abs(best_a - best_b) && a < best_a)));
      if (better) {
        best_a = a;
        best_b = b;
        best_area = area;
      }
      break;  // larger b only grows the area for this a
    }
  }
  auto out = crop_centered(psf, 2 * best_a + 1, 2 * best_b + 1);
  return normalize(std::move(out));
}

Psf resample(const Psf& psf, double target_pitch_um, bool renormalize) {
  if (!(psf.pitch_um > 0.0)) throw Error("range", "source pixel pitch is unknown");
  if (!(target_pitch_um > 0.0)) throw Error("range", "target pixel pitch must be positive");
  const double scale = target_pitch_um / psf.pitch_um;
  if (scale < 1.0 - 1e-12) throw Error("upsampling", "resample only supports downsampling");

  Psf out = psf;
  out.pitch_um = target_pitch_um;
  if (std::abs(scale - 1.0) <= 1e-12) return out;

  const double cy = 0.5 * (psf.height() - 1);
  const double cx = 0.5 * (psf.width() - 1);
  const int hy = static_cast<int>(std::floor(cy / scale));
  const int hx = static_cast<int>(std::floor(cx / scale));
  const resampling::AxisMap rows{2 * hy + 1, cy - hy * scale, scale};
  const resampling::AxisMap cols{2 * hx + 1, cx - hx * scale, scale};

  out.kernel = Image(psf.kernel.channels(), rows.out_size, cols.out_size);
  const double area = scale * scale;
  for (int c = 0; c < psf.kernel.channels(); ++c) {
    auto plane = resampling::resample_plane(psf.kernel.plane(c), psf.height(), psf.width(), rows, cols);
    auto dst = out.kernel.plane(c);
    // Negative cubic lobes are clipped to keep the kernel physical; the clipped plane is rescaled to
    // the unclipped sum so the energy is unchanged.
    double raw = 0.0, clipped = 0.0;
    for (std::size_t i = 0; i < plane.size(); ++i) {
      raw += plane[i] * area;
      clipped += dst[i] = std::max(0.0, plane[i] * area);
    }
    if (clipped > 0.0 && raw > 0.0)
      for (double& v : dst) v *= raw / clipped;
  }
  out.provenance["resampled_from_pitch_um"] = psf.pitch_um;
  if (renormalize) return normalize(std::move(out));
  out.normalized = false;
  return out;
}

Image luminance(const Psf& psf) {
  Image out(1, psf.height(), psf.width());
  const int channels = psf.kernel.channels();
  for (int c = 0; c < channels; ++c) {
    auto src = psf.kernel.plane(c);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i] / channels;
  }
  return out;
}

}  // namespace aberrate
