#pragma once

#include <complex>
#include <span>
#include <vector>

namespace aberrate::fft {

using Complex = std::complex<double>;

// In-place unnormalized 2D transforms over a row-major rows x cols array.
// Plans are cached process-wide; execution is safe from concurrent threads.
void forward_2d(std::span<Complex> data, int rows, int cols);
void inverse_2d(std::span<Complex> data, int rows, int cols);

// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
int good_size(int n);

// Swaps quadrants so that index 0 moves to (rows/2, cols/2).
template <typename T>
std::vector<T> fftshift(std::span<const T> data, int rows, int cols) {
  std::vector<T> out(data.size());
  for (int y = 0; y < rows; ++y) {
    const int ty = (y + rows / 2) % rows;
    for (int x = 0; x < cols; ++x) {
      const int tx = (x + cols / 2) % cols;
      out[static_cast<std::size_t>(ty) * cols + tx] = data[static_cast<std::size_t>(y) * cols + x];
    }
  }
  return out;
}

}  // namespace aberrate::fft
