#include "aberrate/convolve.hpp"

#include <string>

#include "aberrate/error.hpp"
#include "aberrate/fft.hpp"

namespace aberrate {
namespace {

// Direct convolution is cheaper below this many kernel taps.
constexpr int kDirectTapLimit = 49;

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i >= n ? period - i : i;
}

void check_shapes(const Image& image, const Image& kernel) {
  if (kernel.height() % 2 == 0 || kernel.width() % 2 == 0) throw Error("range", "kernel dimensions must be odd");
  if (kernel.channels() != 1 && kernel.channels() != image.channels()) {
    throw Error("channel_mismatch", "kernel has " + std::to_string(kernel.channels()) + " channels, image has " +
                                        std::to_string(image.channels()));
  }
}

int kernel_channel(const Image& kernel, int c) { return kernel.channels() == 1 ? 0 : c; }

}  // namespace

Boundary parse_boundary(std::string_view name) {
  if (name == "zero") return Boundary::zero;
  if (name == "reflect") return Boundary::reflect;
  throw Error("usage", "unknown boundary '" + std::string(name) + "' (expected zero|reflect)");
}

std::string_view to_string(Boundary boundary) { return boundary == Boundary::zero ? "zero" : "reflect"; }

Image convolve_direct(const Image& image, const Image& kernel, Boundary boundary) {
  check_shapes(image, kernel);
  const int h = image.height(), w = image.width();
  const int kh = kernel.height(), kw = kernel.width();
  const int cy = kh / 2, cx = kw / 2;
  Image out(image.channels(), h, w);
  for (int c = 0; c < image.channels(); ++c) {
    const int kc = kernel_channel(kernel, c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = 0; i < kh; ++i) {
          int sy = y + cy - i;
          if (sy < 0 || sy >= h) {
            if (boundary == Boundary::zero) continue;
            sy = reflect_index(sy, h);
          }
          for (int j = 0; j < kw; ++j) {
            int sx = x + cx - j;
            if (sx < 0 || sx >= w) {
              if (boundary == Boundary::zero) continue;
              sx = reflect_index(sx, w);
            }
            acc += kernel.at(kc, i, j) * image.at(c, sy, sx);
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

Image convolve_fft(const Image& image, const Image& kernel, Boundary boundary) {
  check_shapes(image, kernel);
  const int h = image.height(), w = image.width();
  const int kh = kernel.height(), kw = kernel.width();
  const int cy = kh / 2, cx = kw / 2;
  const int ph = h + 2 * cy, pw = w + 2 * cx;
  const int fh = fft::good_size(ph), fw = fft::good_size(pw);
  const std::size_t n = static_cast<std::size_t>(fh) * fw;
  const double scale = 1.0 / static_cast<double>(n);

  Image out(image.channels(), h, w);
  std::vector<fft::Complex> kspec;
  int cached_kc = -1;
  std::vector<fft::Complex> buf(n);
  for (int c = 0; c < image.channels(); ++c) {
    const int kc = kernel_channel(kernel, c);
    if (kc != cached_kc) {
      kspec.assign(n, {0.0, 0.0});
      for (int i = 0; i < kh; ++i)
        for (int j = 0; j < kw; ++j) kspec[static_cast<std::size_t>(i) * fw + j] = kernel.at(kc, i, j);
      fft::forward_2d(kspec, fh, fw);
      cached_kc = kc;
    }
    std::fill(buf.begin(), buf.end(), fft::Complex{0.0, 0.0});
    for (int y = 0; y < ph; ++y) {
      int sy = y - cy;
      if (sy < 0 || sy >= h) {
        if (boundary == Boundary::zero) continue;
        sy = reflect_index(sy, h);
      }
      for (int x = 0; x < pw; ++x) {
        int sx = x - cx;
        if (sx < 0 || sx >= w) {
          if (boundary == Boundary::zero) continue;
          sx = reflect_index(sx, w);
        }
        buf[static_cast<std::size_t>(y) * fw + x] = image.at(c, sy, sx);
      }
    }
    fft::forward_2d(buf, fh, fw);
    for (std::size_t i = 0; i < n; ++i) buf[i] *= kspec[i];
    fft::inverse_2d(buf, fh, fw);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(c, y, x) = buf[static_cast<std::size_t>(y + 2 * cy) * fw + x + 2 * cx].real() * scale;
  }
  return out;
}

Image convolve(const Image& image, const Image& kernel, Boundary boundary) {
  if (kernel.height() * kernel.width() <= kDirectTapLimit) return convolve_direct(image, kernel, boundary);
  return convolve_fft(image, kernel, boundary);
}

}  // namespace aberrate
