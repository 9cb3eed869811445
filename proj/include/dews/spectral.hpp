#pragma once

#include <array>
#include <span>
#include <string_view>

#include "dews/image.hpp"

namespace dews {

enum class Band { Low = 0, Mid = 1, High = 2 };
inline constexpr std::array<Band, 3> kAllBands{Band::Low, Band::Mid, Band::High};
std::string_view band_name(Band b);

/// Per-band values indexed by static_cast<int>(Band).
using BandValues = std::array<double, 3>;

/// Radial partition of the 2-D DFT grid. With r the normalized radial
/// frequency (cycles/pixel) of a bin: low is r < f1, mid is f1 <= r < f2,
/// high is r >= f2. The DC bin is always low.
struct BandPartition {
  double f1 = 1.0 / 8.0;
  double f2 = 1.0 / 4.0;

  void validate() const;
  Band classify(double radial_frequency) const;
};

/// Normalized radial frequency of DFT bin (ky, kx) on an h x w grid.
double radial_frequency(std::size_t ky, std::size_t kx, std::size_t h, std::size_t w);

/// Fraction of DFT bins of an h x w plane falling into each band.
BandValues band_bin_fractions(std::size_t h, std::size_t w, const BandPartition& partition = {});

/// Squared magnitude of the unitary DFT restricted to `band`, summed over
/// channels.
double band_energy(const Image& residual, Band band, const BandPartition& partition = {});
BandValues band_energies(const Image& residual, const BandPartition& partition = {});

/// P_band(x): inverse DFT of the spectrum masked to one band.
Image band_project(const Image& x, Band band, const BandPartition& partition = {});

/// sum_band gains[band] * P_band(x), computed with one forward/inverse pair.
Image apply_band_gains(const Image& x, const BandValues& gains, const BandPartition& partition = {});

/// One (edited watermarked, edited baseline, watermarked input, clean input)
/// quadruple for the retention ratio.
struct RetentionSample {
  const Image& edited_wm;
  const Image& edited_base;
  const Image& input_wm;
  const Image& input_clean;
};

struct RetentionResult {
  BandValues numerator{};    // mean band energy of edited_wm - edited_base
  BandValues denominator{};  // mean band energy of input_wm - input_clean
  BandValues rho{};          // numerator / denominator
};

/// Spectral retention ratio per band. Throws DegenerateBand when a band has
/// no input watermark energy.
RetentionResult spectral_retention(std::span<const RetentionSample> samples,
                                   const BandPartition& partition = {});

/// Same ratio from already-accumulated energy sums.
RetentionResult retention_from_energies(const BandValues& numerator_sum,
                                        const BandValues& denominator_sum, std::size_t count);

}  // namespace dews
