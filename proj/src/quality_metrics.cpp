#include "aberrate/quality_metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "aberrate/error.hpp"

namespace aberrate {
namespace {

constexpr int kWindow = 11;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (auto& v : g) v /= sum;
  return g;
}

void check_same(const Image& a, const Image& b) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
    throw Error("range", "images must have identical shapes");
  }
}

// Separable valid-mode filtering of one plane.
std::vector<double> filter_valid(std::span<const double> p, int h, int w, const std::array<double, kWindow>& g) {
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, double dynamic_range) {
  check_same(a, b);
  const int h = a.height(), w = a.width();
  if (h < kWindow || w < kWindow) throw Error("range", "images smaller than the SSIM window");
  const auto g = gaussian_window();
  const double c1 = std::pow(0.01 * dynamic_range, 2), c2 = std::pow(0.03 * dynamic_range, 2);

  double total = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < a.channels(); ++c) {
    const auto pa = a.plane(c), pb = b.plane(c);
    std::vector<double> aa(pa.size()), bb(pa.size()), ab(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, h, w, g), mu_b = filter_valid(pb, h, w, g);
    const auto s_aa = filter_valid(aa, h, w, g), s_bb = filter_valid(bb, h, w, g), s_ab = filter_valid(ab, h, w, g);
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = s_aa[i] - ma * ma, vb = s_bb[i] - mb * mb, cov = s_ab[i] - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double psnr(const Image& a, const Image& b, double dynamic_range) {
  check_same(a, b);
  double mse = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) mse += (da[i] - db[i]) * (da[i] - db[i]);
  mse /= static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

}  // namespace aberrate
