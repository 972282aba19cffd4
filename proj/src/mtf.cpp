#include "aberrate/mtf.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "aberrate/error.hpp"
#include "aberrate/fft.hpp"

namespace aberrate::mtf {
namespace {

int wrap(int k, int n) { return ((k % n) + n) % n; }

double crossing(const MtfCurve& curve, double threshold, bool& saturated) {
  const auto& f = curve.frequency;
  const auto& m = curve.modulation;
  saturated = false;
  if (m.front() < threshold) return f.front();
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    if (m[i] >= threshold && m[i + 1] < threshold) {
      return f[i] + (m[i] - threshold) / (m[i] - m[i + 1]) * (f[i + 1] - f[i]);
    }
  }
  saturated = true;
  return kNyquist;
}

}  // namespace

double MtfSurface::at(int ky, int kx) const {
  return modulation[static_cast<std::size_t>(wrap(ky, size)) * size + wrap(kx, size)];
}

int default_fft_size(int height, int width) { return fft::good_size(std::max({256, height, width})); }

MtfResult mtf_from_plane(std::span<const double> plane, int height, int width, int fft_size) {
  if (plane.size() != static_cast<std::size_t>(height) * width || plane.empty()) {
    throw Error("range", "kernel plane size mismatch");
  }
  const int n = fft_size > 0 ? fft_size : default_fft_size(height, width);
  if (n < height || n < width) throw Error("range", "FFT size smaller than the kernel");

  std::vector<fft::Complex> buf(static_cast<std::size_t>(n) * n, {0.0, 0.0});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      buf[static_cast<std::size_t>(y) * n + x] = plane[static_cast<std::size_t>(y) * width + x];
  fft::forward_2d(buf, n, n);

  MtfResult result;
  result.surface.size = n;
  result.surface.modulation.resize(buf.size());
  const double dc = std::abs(buf[0]);
  if (!(dc > 0.0)) throw Error("degenerate_kernel", "kernel has zero DC response");
  for (std::size_t i = 0; i < buf.size(); ++i) result.surface.modulation[i] = std::abs(buf[i]) / dc;
  result.surface.modulation[0] = 1.0;

  // Array rows grow downwards, so +y in image coordinates is a negative row frequency.
  const int axial = n / 2;
  const int diagonal = static_cast<int>(std::floor(kNyquist * n / std::sqrt(2.0) + 1e-9));
  struct Ray {
    int dy, dx, count;
    double step;
  };
  const std::array<Ray, 4> rays{{{0, 1, axial, 1.0},
                                 {-1, 1, diagonal, std::sqrt(2.0)},
                                 {-1, 0, axial, 1.0},
                                 {-1, -1, diagonal, std::sqrt(2.0)}}};
  for (std::size_t o = 0; o < rays.size(); ++o) {
    auto& curve = result.slices[o];
    curve.orientation_deg = kOrientationsDeg[o];
    for (int k = 0; k <= rays[o].count; ++k) {
      curve.frequency.push_back(k * rays[o].step / n);
      curve.modulation.push_back(result.surface.at(k * rays[o].dy, k * rays[o].dx));
    }
  }
  return result;
}

MtfResult mtf_from_psf(const Psf& psf, int channel, int fft_size) {
  for (int c = 0; c < psf.kernel.channels(); ++c) {
    if (std::abs(psf.kernel.channel_sum(c) - 1.0) > 1e-6) {
      throw Error("not_normalized", "MTF requires an l1-normalized kernel");
    }
  }
  if (channel == -1) {
    const Image lum = luminance(psf);
    return mtf_from_plane(lum.plane(0), psf.height(), psf.width(), fft_size);
  }
  if (channel < 0 || channel >= psf.kernel.channels()) throw Error("range", "channel out of range");
  return mtf_from_plane(psf.kernel.plane(channel), psf.height(), psf.width(), fft_size);
}

MtfSummary summarize(const MtfCurve& curve) {
  if (curve.frequency.empty() || curve.frequency.size() != curve.modulation.size()) {
    throw Error("empty_curve", "MTF curve is empty");
  }
  MtfSummary s;
  s.mtf50 = crossing(curve, 0.5, s.mtf50_saturated);
  s.mtf20 = crossing(curve, 0.2, s.mtf20_saturated);
  for (std::size_t i = 0; i + 1 < curve.frequency.size(); ++i) {
    s.auc += 0.5 * (curve.modulation[i] + curve.modulation[i + 1]) * (curve.frequency[i + 1] - curve.frequency[i]);
  }
  return s;
}

OrientedSummary summarize(const MtfResult& result) {
  OrientedSummary out;
  out.mean.mtf50_saturated = out.mean.mtf20_saturated = true;
  for (std::size_t o = 0; o < result.slices.size(); ++o) {
    const auto s = summarize(result.slices[o]);
    out.per_orientation[o] = s;
    out.mean.mtf50 += s.mtf50 / result.slices.size();
    out.mean.mtf20 += s.mtf20 / result.slices.size();
    out.mean.auc += s.auc / result.slices.size();
    out.mean.mtf50_saturated = out.mean.mtf50_saturated && s.mtf50_saturated;
    out.mean.mtf20_saturated = out.mean.mtf20_saturated && s.mtf20_saturated;
  }
  return out;
}

PitchEstimate pitch_from_mtf20(const std::map<int, std::vector<double>>& mtf20_by_field, bool exclude_edge) {
  PitchEstimate est;
  double sum = 0.0;
  int fields = 0;
  for (const auto& [field, values] : mtf20_by_field) {
    if (values.empty()) continue;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    est.field_mtf20[field] = mean;
    if (exclude_edge && field >= kEdgeFieldPercent) continue;
    sum += mean;
    ++fields;
  }
  if (fields == 0) throw Error("no_fields", "no field positions left for pixel pitch derivation");
  est.nyquist_cycles_per_um = sum / fields;
  if (!(est.nyquist_cycles_per_um > 0.0)) throw Error("zero_mtf20", "MTF20 frequency is zero");
  est.pitch_um = 1.0 / (2.0 * est.nyquist_cycles_per_um);
  est.outside_sensor_range = est.pitch_um < 1.0 - 1e-9 || est.pitch_um > 20.0 + 1e-9;
  return est;
}

PitchEstimate derive_pixel_pitch(const std::map<int, std::vector<Psf>>& psfs_by_field, bool exclude_edge) {
  std::map<int, std::vector<double>> mtf20;
  for (const auto& [field, psfs] : psfs_by_field) {
    auto& values = mtf20[field];
    for (const auto& psf : psfs) {
      if (!(psf.pitch_um > 0.0)) throw Error("range", "PSF pixel pitch is unknown");
      for (int c = 0; c < psf.kernel.channels(); ++c) {
        const auto summary = summarize(mtf_from_psf(psf, c));
        values.push_back(summary.mean.mtf20 / psf.pitch_um);
      }
    }
  }
  return pitch_from_mtf20(mtf20, exclude_edge);
}

std::string to_csv(const MtfResult& result) {
  std::ostringstream out;
  out << "orientation,frequency_cpp,modulation\n" << std::setprecision(10);
  for (const auto& curve : result.slices)
    for (std::size_t i = 0; i < curve.frequency.size(); ++i)
      out << curve.orientation_deg << ',' << curve.frequency[i] << ',' << curve.modulation[i] << '\n';
  return out.str();
}

nlohmann::json to_json(const OrientedSummary& summary) {
  const auto one = [](const MtfSummary& s) {
    return nlohmann::json{{"mtf50", s.mtf50},
                          {"mtf20", s.mtf20},
                          {"auc", s.auc},
                          {"mtf50_saturated", s.mtf50_saturated},
                          {"mtf20_saturated", s.mtf20_saturated}};
  };
  nlohmann::json j;
  j["mean"] = one(summary.mean);
  for (std::size_t o = 0; o < summary.per_orientation.size(); ++o) {
    auto entry = one(summary.per_orientation[o]);
    entry["orientation_deg"] = kOrientationsDeg[o];
    j["orientations"].push_back(entry);
  }
  return j;
}

}  // namespace aberrate::mtf
