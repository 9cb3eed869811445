#pragma once

// Thin wrapper over FFTW for unitary 2-D transforms of single image planes.
// Internal to the core library.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dews::detail {

using Spectrum = std::vector<std::complex<double>>;

class Fft2d {
 public:
  /// Shared plan pair for an h x w plane; created once, safe to use from any
  /// thread afterwards.
  static const Fft2d& get(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  /// Unitary forward DFT (scaled by 1/sqrt(HW)).
  void forward(std::span<const double> plane, Spectrum& out) const;
  /// Unitary inverse DFT; keeps the real part.
  void inverse(const Spectrum& in, std::span<double> plane) const;

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d();

 private:
  Fft2d(std::size_t height, std::size_t width);

  std::size_t height_;
  std::size_t width_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace dews::detail
