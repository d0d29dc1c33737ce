#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "rydkerr/errors.hpp"

namespace rydkerr::detail {

namespace {
// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex planner_mutex;
}  // namespace

void fft2d(std::vector<std::complex<double>>& data, std::size_t width, std::size_t height,
           bool inverse) {
  if (data.size() != width * height || data.empty())
    throw SignalProcessingError("FFT buffer does not match its grid");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), buf, buf,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) throw SignalProcessingError("FFT planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
  }
}

}  // namespace rydkerr::detail
