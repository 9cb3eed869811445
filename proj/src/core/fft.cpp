#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace dews::detail {

namespace {

// The FFTW planner is not re-entrant; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft2d::Fft2d(std::size_t height, std::size_t width) : height_(height), width_(width) {
  const int h = static_cast<int>(height);
  const int w = static_cast<int>(width);
  fftw_complex* in = fftw_alloc_complex(height * width);
  fftw_complex* out = fftw_alloc_complex(height * width);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(h, w, in, out, FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft_2d(h, w, in, out, FFTW_BACKWARD, flags);
  fftw_free(in);
  fftw_free(out);
}

Fft2d::~Fft2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const Fft2d& Fft2d::get(std::size_t height, std::size_t width) {
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Fft2d>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{height, width}];
  if (!slot) slot.reset(new Fft2d(height, width));
  return *slot;
}

void Fft2d::forward(std::span<const double> plane, Spectrum& out) const {
  const std::size_t n = height_ * width_;
  Spectrum in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = plane[i];
  out.resize(n);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
}

void Fft2d::inverse(const Spectrum& in, std::span<double> plane) const {
  const std::size_t n = height_ * width_;
  Spectrum src(in);
  Spectrum out(n);
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) plane[i] = out[i].real() * scale;
}

}  // namespace dews::detail
