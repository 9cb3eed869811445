#include "dews/watermark.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "dews/error.hpp"
#include "fft.hpp"

namespace dews {

namespace {

constexpr std::uint64_t kCarrierLane = 0x63617272;  // "carr"

using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// One +-1 field with its DFT energy redistributed per band_profile.
void shaped_field(const WatermarkKey& key, std::size_t index, std::size_t h, std::size_t w, std::size_t ch,
                  const BandPartition& partition, double* out) {
  const std::size_t n = h * w;
  const std::size_t d = n * ch;
  auto rng = RngStream::derive(key.seed, {kCarrierLane, index});
  std::vector<double> field(d);
  for (double& v : field) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;

  const auto& fft = detail::Fft2d::get(h, w);
  std::vector<detail::Spectrum> spectra(ch);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t ky = 0; ky < h; ++ky)
    for (std::size_t kx = 0; kx < w; ++kx)
      labels[ky * w + kx] = static_cast<std::uint8_t>(partition.classify(radial_frequency(ky, kx, h, w)));

  BandValues energy{};
  for (std::size_t c = 0; c < ch; ++c) {
    fft.forward(std::span<const double>(field.data() + c * n, n), spectra[c]);
    spectra[c][0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy[labels[i]] += std::norm(spectra[c][i]);
  }
  BandValues scale{};
  for (int b = 0; b < 3; ++b) {
    if (key.band_profile[b] == 0.0) continue;
    require(energy[b] > 0.0, ErrorCode::DegenerateBand,
            "carrier band '" + std::string(band_name(static_cast<Band>(b))) + "' has no DFT bins at this size");
    scale[b] = std::sqrt(key.band_profile[b] * static_cast<double>(d) / energy[b]);
  }
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < n; ++i) spectra[c][i] *= scale[labels[i]];
    fft.inverse(spectra[c], std::span<double>(out + c * n, n));
  }
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (m == 1) return 0;
  while (i < 0 || i >= m) {
    if (i < 0) i = -i;
    if (i >= m) i = 2 * (m - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

void WatermarkKey::validate() const {
  double sum = 0.0;
  for (double f : band_profile) {
    require(std::isfinite(f) && f >= 0.0, ErrorCode::InvalidArgument, "band_profile entries must be nonnegative");
    sum += f;
  }
  require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "band_profile must sum to 1");
}

CarrierBank CarrierBank::make(const WatermarkKey& key, std::size_t count, std::size_t height, std::size_t width,
                              std::size_t channels, const BandPartition& partition) {
  key.validate();
  partition.validate();
  require(count >= 1, ErrorCode::InvalidArgument, "carrier bank: need at least one carrier");
  require(height >= 1 && width >= 1 && channels >= 1, ErrorCode::InvalidArgument, "carrier bank: empty shape");
  const std::size_t d = height * width * channels;
  require(16 * count <= d, ErrorCode::Capacity,
          "carrier bank: L_enc = " + std::to_string(count) + " exceeds capacity d/16 = " + std::to_string(d / 16));

  Eigen::MatrixXd raw(d, count);
  for (std::size_t i = 0; i < count; ++i) shaped_field(key, i, height, width, channels, partition, raw.col(i).data());

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < count; ++j) {
    require(std::abs(packed(j, j)) > 1e-8 * sqrt_d, ErrorCode::Capacity,
            "carrier bank: carriers are linearly dependent (band profile leaves too few frequencies)");
  }

  CarrierBank bank;
  bank.key_ = key;
  bank.height_ = height;
  bank.width_ = width;
  bank.channels_ = channels;
  bank.carriers_ = qr.householderQ() * Eigen::MatrixXd::Identity(d, count);
  for (std::size_t j = 0; j < count; ++j) {
    const double sign = packed(j, j) < 0.0 ? -1.0 : 1.0;
    bank.carriers_.col(j) *= sign * sqrt_d;
  }
  const Eigen::MatrixXd gram = bank.normalized_gram();
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j) bank.gram_offdiag_max_ = std::max(bank.gram_offdiag_max_, std::abs(gram(i, j)));
  return bank;
}

Image CarrierBank::carrier(std::size_t i) const {
  require(i < count(), ErrorCode::OutOfRange, "carrier index out of range");
  const auto col = carriers_.col(static_cast<Eigen::Index>(i));
  return Image(height_, width_, channels_, std::vector<double>(col.data(), col.data() + col.size()));
}

Eigen::MatrixXd CarrierBank::normalized_gram() const {
  Eigen::MatrixXd g(count(), count());
  g.triangularView<Eigen::Lower>() = carriers_.transpose() * carriers_;
  g = g.selfadjointView<Eigen::Lower>();
  return g / static_cast<double>(dim());
}

Bits random_payload(std::size_t length, RngStream& rng) {
  Bits bits(length);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
  return bits;
}

Bits complement(const Bits& bits) {
  Bits out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? 0 : 1;
  return out;
}

std::string bits_to_hex(const Bits& bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) nibble = (nibble << 1) | (i + k < bits.size() ? bits[i + k] : 0u);
    out.push_back(digits[nibble]);
  }
  return out;
}

Bits hex_to_bits(std::string_view hex, std::size_t length) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  require(hex.size() * 4 >= length, ErrorCode::InvalidArgument,
          "hex payload has " + std::to_string(hex.size() * 4) + " bits, need " + std::to_string(length));
  Bits bits;
  bits.reserve(hex.size() * 4);
  for (char ch : hex) {
    int v;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
    else fail(ErrorCode::InvalidArgument, std::string("invalid hex digit '") + ch + "'");
    for (int k = 3; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
  }
  bits.resize(length);
  return bits;
}

Bits ecc_encode(const Bits& info, int r) {
  require(r >= 1 && r % 2 == 1, ErrorCode::InvalidArgument, "repetition factor must be odd");
  Bits coded;
  coded.reserve(info.size() * r);
  for (auto b : info)
    for (int k = 0; k < r; ++k) coded.push_back(b);
  return coded;
}

EccDecoded ecc_decode(const Bits& coded, int r) {
  require(r >= 1 && r % 2 == 1, ErrorCode::InvalidArgument, "repetition factor must be odd");
  require(coded.size() % static_cast<std::size_t>(r) == 0, ErrorCode::InvalidArgument,
          "coded length " + std::to_string(coded.size()) + " is not a multiple of r = " + std::to_string(r));
  EccDecoded out;
  const std::size_t blocks = coded.size() / r;
  out.bits.resize(blocks);
  out.margin.resize(blocks);
  for (std::size_t i = 0; i < blocks; ++i) {
    int ones = 0;
    for (int k = 0; k < r; ++k) ones += coded[i * r + k] ? 1 : 0;
    out.bits[i] = 2 * ones > r ? 1 : 0;
    out.margin[i] = std::abs(2 * ones - r);
  }
  return out;
}

Image watermark_pattern(const Bits& coded, const CarrierBank& bank) {
  require(coded.size() == bank.count(), ErrorCode::ShapeMismatch,
          "payload has " + std::to_string(coded.size()) + " coded bits, bank has " + std::to_string(bank.count()) +
              " carriers");
  Eigen::VectorXd sigma(coded.size());
  for (std::size_t i = 0; i < coded.size(); ++i) sigma[i] = coded[i] ? 1.0 : -1.0;
  sigma /= std::sqrt(static_cast<double>(coded.size()));
  Image s(bank.height(), bank.width(), bank.channels());
  Eigen::Map<Eigen::VectorXd>(s.data().data(), s.size()).noalias() = bank.matrix() * sigma;
  return s;
}

Image embed(const Image& x, const Bits& coded, const CarrierBank& bank, double gamma) {
  require(bank.matches(x), ErrorCode::ShapeMismatch,
          "embed: image " + x.shape_string() + " does not match carrier bank");
  require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::InvalidArgument, "embed: gamma must be >= 0");
  Image out = x;
  out.add_scaled(watermark_pattern(coded, bank), gamma);
  return out;
}

Image highpass(const Image& y) {
  const std::size_t h = y.height(), w = y.width();
  Image out(h, w, y.channels());
  std::vector<double> rows(h * w);
  for (std::size_t c = 0; c < y.channels(); ++c) {
    const auto in = y.plane(c);
    auto dst = out.plane(c);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += in[r * w + reflect(static_cast<std::ptrdiff_t>(x) + k, w)];
        rows[r * w + x] = s;
      }
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += rows[reflect(static_cast<std::ptrdiff_t>(r) + k, h) * w + x];
        dst[r * w + x] = in[r * w + x] - s / 25.0;
      }
  }
  return out;
}

std::vector<double> decode_soft(const Image& y, const Image* x_ref, const CarrierBank& bank) {
  require(bank.matches(y), ErrorCode::ShapeMismatch,
          "decode: image " + y.shape_string() + " does not match carrier bank");
  Image residual = x_ref ? (require_same_shape(y, *x_ref, "decode"), y - *x_ref) : highpass(y);
  Eigen::VectorXd scores =
      bank.matrix().transpose() * ConstVecMap(residual.data().data(), static_cast<Eigen::Index>(residual.size()));
  scores /= static_cast<double>(bank.dim());
  return std::vector<double>(scores.data(), scores.data() + scores.size());
}

Bits decode_bits(std::span<const double> scores) {
  Bits bits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) bits[i] = scores[i] > 0.0 ? 1 : 0;
  return bits;
}

double detect_score(std::span<const double> scores, const CarrierBank& bank) {
  double sum = 0.0;
  for (double s : scores) sum += std::abs(s);
  return sum * std::sqrt(static_cast<double>(bank.dim()) * static_cast<double>(bank.count()));
}

double detect_score(const Image& y, const Image* x_ref, const CarrierBank& bank) {
  return detect_score(decode_soft(y, x_ref, bank), bank);
}

double gamma_for_psnr(double psnr_db) {
  require(std::isfinite(psnr_db), ErrorCode::InvalidArgument, "target PSNR must be finite");
  return std::pow(10.0, -psnr_db / 20.0);
}

}  // namespace dews
