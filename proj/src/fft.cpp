#include "aberrate/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace aberrate::fft {
namespace {

// fftw planner calls are not thread-safe; fftw_execute_dft on an existing plan is.
std::mutex planner_mutex;

fftw_plan plan_for(int rows, int cols, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard lock(planner_mutex);
  const auto key = std::make_tuple(rows, cols, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
  fftw_plan plan = fftw_plan_dft_2d(rows, cols, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (plan == nullptr) throw std::runtime_error("fftw planning failed");
  cache.emplace(key, plan);
  return plan;
}

void run(std::span<Complex> data, int rows, int cols, int sign) {
  if (rows <= 0 || cols <= 0 || data.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("fft: buffer size does not match dimensions");
  }
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(rows, cols, sign), ptr, ptr);
}

}  // namespace

void forward_2d(std::span<Complex> data, int rows, int cols) { run(data, rows, cols, FFTW_FORWARD); }

void inverse_2d(std::span<Complex> data, int rows, int cols) { run(data, rows, cols, FFTW_BACKWARD); }

int good_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace aberrate::fft
