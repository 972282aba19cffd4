#include "aberrate/convolve.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aberrate/error.hpp"
#include "aberrate/quality_metrics.hpp"
#include "support.hpp"

using namespace aberrate;

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

// Textbook convolution written independently of the library.
Image brute_force(const Image& img, const Image& k, Boundary b) {
  Image out(img.channels(), img.height(), img.width());
  const int cy = k.height() / 2, cx = k.width() / 2;
  for (int c = 0; c < img.channels(); ++c) {
    const int kc = k.channels() == 1 ? 0 : c;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int i = 0; i < k.height(); ++i)
          for (int j = 0; j < k.width(); ++j) {
            int sy = y + cy - i, sx = x + cx - j;
            if (b == Boundary::zero) {
              if (sy < 0 || sx < 0 || sy >= img.height() || sx >= img.width()) continue;
            } else {
              sy = reflect101(sy, img.height());
              sx = reflect101(sx, img.width());
            }
            acc += k.at(kc, i, j) * img.at(c, sy, sx);
          }
        out.at(c, y, x) = acc;
      }
  }
  return out;
}

double max_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST(Convolve, BoundaryNames) {
  EXPECT_EQ(parse_boundary("zero"), Boundary::zero);
  EXPECT_EQ(parse_boundary("reflect"), Boundary::reflect);
  EXPECT_EQ(to_string(Boundary::reflect), "reflect");
  EXPECT_THROW(parse_boundary("wrap"), Error);
}

TEST(Convolve, DirectMatchesBruteForce) {
  std::mt19937_64 gen(1);
  for (Boundary b : {Boundary::zero, Boundary::reflect}) {
    const Image img = testing_support::random_image(gen, 3, 20, 17);
    const Image k = testing_support::random_image(gen, 3, 5, 7);
    EXPECT_LT(max_diff(convolve_direct(img, k, b), brute_force(img, k, b)), 1e-12);
  }
}

TEST(Convolve, IsConvolutionNotCorrelation) {
  Image img(1, 5, 5);
  img.at(0, 2, 2) = 1.0;
  Image k(1, 3, 3);
  k.at(0, 0, 0) = 1.0;  // top-left tap
  const Image out = convolve(img, k, Boundary::zero);
  // Convolving an impulse reproduces the kernel, so the response lands up-left of the impulse.
  EXPECT_EQ(out.at(0, 1, 1), 1.0);
  EXPECT_EQ(out.at(0, 3, 3), 0.0);
}

TEST(Convolve, FftMatchesDirectOnRandomPairs) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> half(0, 12);
  for (int k = 0; k < 200; ++k) {
    const Boundary b = k % 2 ? Boundary::reflect : Boundary::zero;
    const Image img = testing_support::random_image(gen, 3, 64, 64, 255.0);
    const Image ker = testing_support::random_kernel(gen, 2 * half(gen) + 1, 2 * half(gen) + 1).kernel;
    EXPECT_LT(max_diff(convolve_fft(img, ker, b), convolve_direct(img, ker, b)), 1e-6) << "pair " << k;
  }
}

TEST(Convolve, KernelLargerThanImage) {
  std::mt19937_64 gen(5);
  const Image img = testing_support::random_image(gen, 3, 6, 9);
  const Image ker = testing_support::random_kernel(gen, 25, 25).kernel;
  for (Boundary b : {Boundary::zero, Boundary::reflect}) {
    EXPECT_LT(max_diff(convolve_fft(img, ker, b), brute_force(img, ker, b)), 1e-9);
    EXPECT_LT(max_diff(convolve_direct(img, ker, b), brute_force(img, ker, b)), 1e-12);
  }
}

TEST(Convolve, IdentityKernelIsExact) {
  std::mt19937_64 gen(6);
  const Image img = testing_support::random_image(gen, 3, 33, 40, 255.0);
  const Image id = testing_support::impulse(25).kernel;
  for (Boundary b : {Boundary::zero, Boundary::reflect}) EXPECT_EQ(convolve_direct(img, id, b), img);
}

TEST(Convolve, ReflectPreservesFlatFields) {
  std::mt19937_64 gen(7);
  const Image flat(3, 30, 30, 128.0);
  const Image ker = testing_support::random_kernel(gen, 25, 25).kernel;
  const Image out = convolve(flat, ker, Boundary::reflect);
  for (double v : out.data()) EXPECT_NEAR(v, 128.0, 1e-9);
}

TEST(Convolve, ZeroBoundaryNeverGainsEnergy) {
  std::mt19937_64 gen(8);
  for (int k = 0; k < 20; ++k) {
    const Image img = testing_support::random_image(gen, 3, 32, 32, 255.0);
    const Image ker = testing_support::random_kernel(gen, 9, 9).kernel;
    const Image out = convolve(img, ker, Boundary::zero);
    for (int c = 0; c < 3; ++c) EXPECT_LE(out.channel_sum(c), img.channel_sum(c) + 1e-7);
  }
}

TEST(Convolve, RejectsMismatch) {
  const Image img(3, 8, 8, 1.0);
  try {
    convolve(img, Image(2, 3, 3, 1.0), Boundary::zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "channel_mismatch");
  }
  EXPECT_THROW(convolve(img, Image(3, 4, 3, 1.0), Boundary::zero), Error);
}

namespace {

// Same analytic images used to freeze the reference values below (scikit-image 11x11 Gaussian SSIM,
// sigma 1.5, population covariance, data range 255).
std::pair<Image, Image> analytic_pair() {
  const int h = 48, w = 40;
  Image a(3, h, w), b(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        a.at(c, y, x) = 127.5 + 100 * std::sin(0.3 * x + 0.2 * y + c);
        b.at(c, y, x) = a.at(c, y, x) * 0.8 + 20 * std::cos(0.5 * x - 0.1 * c * y) + 10;
      }
  return {a, b};
}

}  // namespace

TEST(QualityMetrics, SsimMatchesReference) {
  const auto [a, b] = analytic_pair();
  EXPECT_NEAR(ssim(a, b), 0.8998572529995909, 1e-9);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(QualityMetrics, PsnrMatchesReference) {
  const auto [a, b] = analytic_pair();
  EXPECT_NEAR(psnr(a, b), 20.205558829916356, 1e-9);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(QualityMetrics, SsimSymmetricAndBounded) {
  std::mt19937_64 gen(9);
  for (int k = 0; k < 10; ++k) {
    const Image a = testing_support::random_image(gen, 3, 24, 24, 255.0);
    const Image b = testing_support::random_image(gen, 3, 24, 24, 255.0);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_LE(ssim(a, b), 1.0);
    EXPECT_GE(ssim(a, b), -1.0);
  }
}
