#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dews/image.hpp"
#include "dews/rng.hpp"
#include "dews/spectral.hpp"

namespace dews {

using Bits = std::vector<std::uint8_t>;

struct WatermarkKey {
  std::uint64_t seed = 0;
  BandValues band_profile{0.1, 0.5, 0.4};  // carrier energy fraction per band

  void validate() const;
};

/// L_enc key-derived carriers with ||c_i||^2 = d.
///
/// Construction: one zero-mean +-1 field per carrier, each band of its DFT
/// rescaled so the band holds exactly band_profile[band] * d of the energy
/// (DC removed), then the set is orthonormalized (Householder QR, signs fixed
/// so R has a positive diagonal) and rescaled by sqrt(d). The carriers are
/// therefore mutually orthogonal up to rounding, which makes the watermark
/// residual norm exactly gamma * sqrt(d) for every payload.
class CarrierBank {
 public:
  static CarrierBank make(const WatermarkKey& key, std::size_t count, std::size_t height, std::size_t width,
                          std::size_t channels, const BandPartition& partition = {});

  std::size_t count() const noexcept { return static_cast<std::size_t>(carriers_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(carriers_.rows()); }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  const WatermarkKey& key() const noexcept { return key_; }

  /// d x L_enc matrix, one carrier per column in image (planar) order.
  const Eigen::MatrixXd& matrix() const noexcept { return carriers_; }
  Image carrier(std::size_t i) const;

  /// max |<c_i, c_j>| / d over i != j, recorded at construction.
  double gram_offdiag_max() const noexcept { return gram_offdiag_max_; }
  /// Full Gram matrix divided by d.
  Eigen::MatrixXd normalized_gram() const;

  bool matches(const Image& img) const noexcept {
    return img.height() == height_ && img.width() == width_ && img.channels() == channels_;
  }

 private:
  WatermarkKey key_;
  std::size_t height_ = 0, width_ = 0, channels_ = 0;
  Eigen::MatrixXd carriers_;
  double gram_offdiag_max_ = 0.0;
};

Bits random_payload(std::size_t length, RngStream& rng);
Bits complement(const Bits& bits);
std::string bits_to_hex(const Bits& bits);
/// Inverse of bits_to_hex; `length` bits are taken from the leading nibbles.
Bits hex_to_bits(std::string_view hex, std::size_t length);

/// Repetition code: every info bit repeated r times (blocks are contiguous).
Bits ecc_encode(const Bits& info, int r);

struct EccDecoded {
  Bits bits;
  std::vector<int> margin;  // |votes for 1 - votes for 0| per block
};
EccDecoded ecc_decode(const Bits& coded, int r);

/// s = sum_i (2 m_i - 1) c_i / sqrt(L_enc).
Image watermark_pattern(const Bits& coded, const CarrierBank& bank);

/// x + gamma * s, unclamped.
Image embed(const Image& x, const Bits& coded, const CarrierBank& bank, double gamma);

/// y - box5(y), reflect padding; the blind decoder's pre-filter.
Image highpass(const Image& y);

/// Correlation scores <y - x_ref, c_i> / d, or <highpass(y), c_i> / d when
/// x_ref is null.
std::vector<double> decode_soft(const Image& y, const Image* x_ref, const CarrierBank& bank);

/// bit = 1 iff score > 0; an exact zero decodes as 0.
Bits decode_bits(std::span<const double> scores);

/// sum |score_i| * sqrt(d * L_enc).
double detect_score(std::span<const double> scores, const CarrierBank& bank);
double detect_score(const Image& y, const Image* x_ref, const CarrierBank& bank);

/// gamma giving PSNR(x, x_w) = psnr_db for unit mean-square carriers.
double gamma_for_psnr(double psnr_db);

}  // namespace dews
