#include "dews/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "dews/error.hpp"
#include "fft.hpp"

namespace dews {

namespace {

using detail::Fft2d;
using detail::Spectrum;

// Band label per DFT bin, cached per (h, w, f1, f2).
const std::vector<std::uint8_t>& band_labels(std::size_t h, std::size_t w, const BandPartition& p) {
  using Key = std::tuple<std::size_t, std::size_t, double, double>;
  static std::map<Key, std::unique_ptr<std::vector<std::uint8_t>>> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto& slot = cache[Key{h, w, p.f1, p.f2}];
  if (!slot) {
    auto labels = std::make_unique<std::vector<std::uint8_t>>(h * w);
    for (std::size_t ky = 0; ky < h; ++ky)
      for (std::size_t kx = 0; kx < w; ++kx)
        (*labels)[ky * w + kx] = static_cast<std::uint8_t>(p.classify(radial_frequency(ky, kx, h, w)));
    slot = std::move(labels);
  }
  return *slot;
}

double signed_frequency(std::size_t k, std::size_t n) {
  const double kk = (2 * k > n) ? static_cast<double>(k) - static_cast<double>(n) : static_cast<double>(k);
  return kk / static_cast<double>(n);
}

}  // namespace

std::string_view band_name(Band b) {
  switch (b) {
    case Band::Low: return "low";
    case Band::Mid: return "mid";
    case Band::High: return "high";
  }
  return "?";
}

void BandPartition::validate() const {
  require(f1 > 0.0 && f1 < f2 && f2 < 0.5, ErrorCode::InvalidArgument,
          "band edges must satisfy 0 < f1 < f2 < 0.5");
}

Band BandPartition::classify(double r) const {
  if (r < f1) return Band::Low;
  if (r < f2) return Band::Mid;
  return Band::High;
}

double radial_frequency(std::size_t ky, std::size_t kx, std::size_t h, std::size_t w) {
  return std::hypot(signed_frequency(ky, h), signed_frequency(kx, w));
}

BandValues band_bin_fractions(std::size_t h, std::size_t w, const BandPartition& partition) {
  partition.validate();
  const auto& labels = band_labels(h, w, partition);
  BandValues out{};
  for (auto l : labels) out[l] += 1.0;
  for (double& v : out) v /= static_cast<double>(labels.size());
  return out;
}

BandValues band_energies(const Image& residual, const BandPartition& partition) {
  partition.validate();
  BandValues out{};
  if (residual.empty()) return out;
  const auto& fft = Fft2d::get(residual.height(), residual.width());
  const auto& labels = band_labels(residual.height(), residual.width(), partition);
  Spectrum spec;
  for (std::size_t c = 0; c < residual.channels(); ++c) {
    fft.forward(residual.plane(c), spec);
    for (std::size_t i = 0; i < spec.size(); ++i) out[labels[i]] += std::norm(spec[i]);
  }
  return out;
}

double band_energy(const Image& residual, Band band, const BandPartition& partition) {
  return band_energies(residual, partition)[static_cast<int>(band)];
}

Image apply_band_gains(const Image& x, const BandValues& gains, const BandPartition& partition) {
  partition.validate();
  Image out(x.height(), x.width(), x.channels());
  if (x.empty()) return out;
  const auto& fft = Fft2d::get(x.height(), x.width());
  const auto& labels = band_labels(x.height(), x.width(), partition);
  Spectrum spec;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    fft.forward(x.plane(c), spec);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= gains[labels[i]];
    fft.inverse(spec, out.plane(c));
  }
  return out;
}

Image band_project(const Image& x, Band band, const BandPartition& partition) {
  BandValues gains{};
  gains[static_cast<int>(band)] = 1.0;
  return apply_band_gains(x, gains, partition);
}

RetentionResult retention_from_energies(const BandValues& numerator_sum,
                                        const BandValues& denominator_sum, std::size_t count) {
  require(count > 0, ErrorCode::InvalidArgument, "spectral_retention: no samples");
  RetentionResult r;
  // bands holding no more than rounding leakage count as empty
  const double total = denominator_sum[0] + denominator_sum[1] + denominator_sum[2];
  for (Band b : kAllBands) {
    const int i = static_cast<int>(b);
    r.numerator[i] = numerator_sum[i] / static_cast<double>(count);
    r.denominator[i] = denominator_sum[i] / static_cast<double>(count);
    if (!(denominator_sum[i] > 1e-12 * total)) {
      fail(ErrorCode::DegenerateBand, "spectral_retention: zero input watermark energy in band '" +
                                          std::string(band_name(b)) + "'");
    }
    r.rho[i] = r.numerator[i] / r.denominator[i];
  }
  return r;
}

RetentionResult spectral_retention(std::span<const RetentionSample> samples,
                                   const BandPartition& partition) {
  BandValues num{}, den{};
  for (const auto& s : samples) {
    require_same_shape(s.edited_wm, s.edited_base, "spectral_retention");
    require_same_shape(s.input_wm, s.input_clean, "spectral_retention");
    const auto n = band_energies(s.edited_wm - s.edited_base, partition);
    const auto d = band_energies(s.input_wm - s.input_clean, partition);
    for (int i = 0; i < 3; ++i) {
      num[i] += n[i];
      den[i] += d[i];
    }
  }
  return retention_from_energies(num, den, samples.size());
}

}  // namespace dews
