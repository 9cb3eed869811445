#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dews/metrics.hpp"
#include "dews/watermark.hpp"
#include "helpers.hpp"

using namespace dews;
using testing::error_code_of;

TEST_CASE("carrier bank: determinism, norms, orthogonality") {
  WatermarkKey key{42, {0.1, 0.5, 0.4}};
  const auto a = CarrierBank::make(key, 96, 32, 32, 3);
  const auto b = CarrierBank::make(key, 96, 32, 32, 3);
  CHECK(a.matrix() == b.matrix());
  CHECK(a.count() == 96);
  CHECK(a.dim() == 32 * 32 * 3);
  const double d = static_cast<double>(a.dim());
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(std::abs(a.matrix().col(i).squaredNorm() - d) <= 1e-9);
    CHECK(std::abs(a.matrix().col(i).sum()) <= 1e-8);  // zero mean
  }
  CHECK(a.gram_offdiag_max() < 0.05);
  const auto g = a.normalized_gram();
  double off = 0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(g(i, j)));
  CHECK(off == doctest::Approx(a.gram_offdiag_max()).epsilon(1e-9));

  WatermarkKey other{43, {0.1, 0.5, 0.4}};
  CHECK(CarrierBank::make(other, 96, 32, 32, 3).matrix() != a.matrix());
}

TEST_CASE("carrier bank: band profile is honoured") {
  const auto hi = CarrierBank::make({7, {0.0, 0.0, 1.0}}, 16, 64, 64, 3);
  for (std::size_t i = 0; i < hi.count(); ++i) {
    const auto e = band_energies(hi.carrier(i));
    CHECK(e[2] >= 0.9 * (e[0] + e[1] + e[2]));
  }
  // with a profile on all bands, the shares come out close to the request
  const auto mix = CarrierBank::make({7, {0.2, 0.3, 0.5}}, 16, 64, 64, 3);
  const auto e = band_energies(mix.carrier(3));
  const double tot = e[0] + e[1] + e[2];
  CHECK(e[0] / tot == doctest::Approx(0.2).epsilon(0.15));
  CHECK(e[1] / tot == doctest::Approx(0.3).epsilon(0.15));
  CHECK(e[2] / tot == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("carrier bank: certificate at 128x128x3 with 288 carriers") {
  const auto bank = CarrierBank::make({0x5eed, {0.1, 0.5, 0.4}}, 288, 128, 128, 3);
  CHECK(bank.gram_offdiag_max() < 0.05);
}

TEST_CASE("carrier bank: errors") {
  CHECK(error_code_of([] { CarrierBank::make({1, {0.1, 0.5, 0.4}}, 193, 32, 32, 3); }) == ErrorCode::Capacity);
  CHECK_NOTHROW(CarrierBank::make({1, {0.1, 0.5, 0.4}}, 192, 32, 32, 3));
  CHECK(error_code_of([] { CarrierBank::make({1, {0.5, 0.5, 0.4}}, 8, 32, 32, 3); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { CarrierBank::make({1, {-0.1, 0.7, 0.4}}, 8, 32, 32, 3); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { CarrierBank::make({1, {0.1, 0.5, 0.4}}, 0, 32, 32, 3); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("payload helpers") {
  auto rng = RngStream::derive(1, {});
  const auto p = random_payload(96, rng);
  CHECK(p.size() == 96);
  CHECK(hex_to_bits(bits_to_hex(p), 96) == p);
  CHECK(bits_to_hex(Bits{1, 0, 1, 0, 1, 1, 1, 1}) == "af");
  CHECK(bits_to_hex(Bits{1, 1}) == "c");
  CHECK(hex_to_bits("C", 2) == Bits{1, 1});
  CHECK(error_code_of([] { hex_to_bits("zz", 8); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { hex_to_bits("f", 8); }) == ErrorCode::InvalidArgument);
  const auto c = complement(p);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(c[i] == 1 - p[i]);
}

TEST_CASE("repetition code") {
  const Bits info{1, 0, 1, 1};
  const auto coded = ecc_encode(info, 3);
  CHECK(coded == Bits{1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1});
  const auto clean = ecc_decode(coded, 3);
  CHECK(clean.bits == info);
  for (int m : clean.margin) CHECK(m == 3);

  for (std::uint8_t bit : {0, 1}) {
    const Bits block(3, bit);
    for (int i = 0; i < 3; ++i) {
      Bits one = block;
      one[i] ^= 1;
      const auto r1 = ecc_decode(one, 3);
      CHECK(r1.bits[0] == bit);
      CHECK(r1.margin[0] == 1);
      for (int j = i + 1; j < 3; ++j) {
        Bits two = one;
        two[j] ^= 1;
        CHECK(ecc_decode(two, 3).bits[0] != bit);
      }
    }
  }
  CHECK(error_code_of([] { ecc_decode(Bits(10, 0), 3); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { ecc_encode(Bits(4, 0), 2); }) == ErrorCode::InvalidArgument);
  CHECK(ecc_encode(info, 1) == info);
}

TEST_CASE("embed: exact residual, complement symmetry, PSNR law") {
  const auto bank = CarrierBank::make({9, {0.1, 0.5, 0.4}}, 96, 32, 32, 3);
  auto rng = RngStream::derive(2, {});
  const auto coded = random_payload(96, rng);
  const auto x = testing::random_image(32, 32, 3, 5, 0.2);

  CHECK(embed(x, coded, bank, 0.0) == x);

  const auto s = watermark_pattern(coded, bank);
  const auto xw = embed(x, coded, bank, 0.03);
  CHECK(max_abs((xw - x) - 0.03 * s) <= 1e-15);
  CHECK(squared_norm(s) == doctest::Approx(static_cast<double>(bank.dim())).epsilon(1e-12));

  const auto sum = (embed(x, coded, bank, 0.03) - x) + (embed(x, complement(coded), bank, 0.03) - x);
  CHECK(max_abs(sum) <= 1e-15);

  const auto x1 = embed(x, coded, bank, 0.01);
  CHECK(psnr(x, x1) == doctest::Approx(40.0).epsilon(0.0025));
  for (double g : {0.001, 0.004, 0.02, 0.1}) {
    auto other = testing::random_image(32, 32, 3, 77, 3.0);  // residual norm is content independent
    CHECK(std::abs(psnr(other, embed(other, coded, bank, g)) + 20 * std::log10(g)) < 0.1);
  }
  CHECK(gamma_for_psnr(40.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(gamma_for_psnr(-20 * std::log10(0.003)) == doctest::Approx(0.003).epsilon(1e-12));

  // linearity in strength
  const Image zero(32, 32, 3);
  const auto lhs = embed(x, coded, bank, 0.02) + embed(zero, coded, bank, 0.05) - embed(zero, coded, bank, 0.0);
  CHECK(max_abs(lhs - embed(x, coded, bank, 0.07)) <= 1e-15);

  CHECK(error_code_of([&] { embed(Image(16, 16, 3), coded, bank, 0.01); }) == ErrorCode::ShapeMismatch);
  CHECK(error_code_of([&] { embed(x, coded, bank, -0.01); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { embed(x, Bits(95, 0), bank, 0.01); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("informed decoding: noiseless scores and round trip") {
  const auto bank = CarrierBank::make({9, {0.1, 0.5, 0.4}}, 96, 32, 32, 3);
  const double L = 96, gamma = 0.01;
  const auto x = testing::random_image(32, 32, 3, 5, 0.2);
  REQUIRE(bank.gram_offdiag_max() * L < 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = RngStream::derive(seed, {3});
    const auto coded = random_payload(96, rng);
    const auto y = embed(x, coded, bank, gamma);
    const auto sc = decode_soft(y, &x, bank);
    for (std::size_t i = 0; i < sc.size(); ++i) {
      const double sigma = coded[i] ? 1.0 : -1.0;
      CHECK(std::abs(sc[i] - gamma * sigma / std::sqrt(L)) < 0.05 * gamma);
    }
    CHECK(decode_bits(sc) == coded);
  }
  const auto none = decode_soft(x, &x, bank);
  for (double v : none) CHECK(v == 0.0);
  CHECK(detect_score(none, bank) == 0.0);
}

TEST_CASE("decode_bits tie-break and signs") {
  CHECK(decode_bits(std::vector<double>{1, 2, 3}) == Bits{1, 1, 1});
  CHECK(decode_bits(std::vector<double>{0, 0, -0.0}) == Bits{0, 0, 0});
  CHECK(decode_bits(std::vector<double>{-1, 2, 0, 1e-300}) == Bits{0, 1, 0, 1});
}

TEST_CASE("Gaussian channel: sign agreement follows the Q-function") {
  const std::size_t n = 16;
  const auto bank = CarrierBank::make({3, {0.1, 0.5, 0.4}}, 12, n, n, 3);
  const double d = static_cast<double>(bank.dim()), L = 12, gamma = 0.05;
  const double sigma = gamma * std::sqrt(d / L);  // per-bit SNR of one
  const double p = testing::Phi(gamma * std::sqrt(d) / (sigma * std::sqrt(L)));
  const auto x = testing::random_image(n, n, 3, 1, 0.1);
  auto rng = RngStream::derive(17, {});
  long correct = 0, total = 0;
  Image noise(n, n, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto coded = random_payload(12, rng);
    rng.fill_normal(noise.data());
    const auto y = embed(x, coded, bank, gamma) + sigma * noise;
    const auto bits = decode_bits(decode_soft(y, &x, bank));
    for (std::size_t i = 0; i < bits.size(); ++i) correct += bits[i] == coded[i];
    total += static_cast<long>(bits.size());
  }
  const double rate = static_cast<double>(correct) / total;
  CHECK(std::abs(rate - p) <= 3 * std::sqrt(p * (1 - p) / total));
}

TEST_CASE("detector: watermarked beats the null, null matches its analytic mean") {
  const std::size_t n = 32;
  const auto bank = CarrierBank::make({5, {0.1, 0.5, 0.4}}, 96, n, n, 3);
  const double L = 96, sigma = 0.01;
  auto rng = RngStream::derive(23, {});
  const auto x = testing::random_image(n, n, 3, 2, 0.1);
  std::vector<double> null;
  Image noise(n, n, 3);
  for (int i = 0; i < 1000; ++i) {
    rng.fill_normal(noise.data());
    null.push_back(detect_score(x + sigma * noise, &x, bank));
  }
  // each score ~ N(0, sigma^2 / d): aggregate mean L sigma sqrt(2/pi) sqrt(L)
  const double expect = L * sigma * std::sqrt(2.0 / std::numbers::pi) * std::sqrt(L);
  const auto m = testing::moments(null);
  CHECK(std::abs(m.mean - expect) <= 3 * m.se);

  auto sorted = null;
  std::sort(sorted.begin(), sorted.end());
  const double q99 = sorted[989];
  const auto coded = random_payload(96, rng);
  rng.fill_normal(noise.data());
  const auto xw = embed(x, coded, bank, 0.01) + sigma * noise;
  CHECK(detect_score(xw, &x, bank) > q99);
  CHECK(detect_score(embed(x, coded, bank, 0.01), &x, bank) > q99);

  // gamma = 0 is exactly the unwatermarked image
  CHECK(detect_score(embed(x, coded, bank, 0.0), &x, bank) == detect_score(x, &x, bank));
}

TEST_CASE("blind decoding: highpass kills constants, decodes a clean smooth image") {
  const auto c = highpass(Image(16, 16, 3, 0.7));
  CHECK(max_abs(c) < 1e-15);
  const auto bank = CarrierBank::make({5, {0.0, 0.3, 0.7}}, 48, 32, 32, 3);
  auto rng = RngStream::derive(1, {});
  const auto coded = random_payload(48, rng);
  const Image smooth(32, 32, 3, 0.5);
  const auto y = embed(smooth, coded, bank, 0.01);
  const auto bits = decode_bits(decode_soft(y, nullptr, bank));
  CHECK(bit_accuracy(bits, coded).ba >= 0.95);
}
