#include "dews/synth.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "dews/error.hpp"
#include "dews/spectral.hpp"
#include "fft.hpp"

namespace dews {

namespace {

void standardize(std::span<double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double& x : v) {
    x -= mean;
    var += x * x;
  }
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  if (sd > 0.0)
    for (double& x : v) x /= sd;
}

std::vector<double> power_law_plane(std::size_t h, std::size_t w, double exponent, RngStream& rng) {
  const auto& fft = detail::Fft2d::get(h, w);
  std::vector<double> noise(h * w);
  rng.fill_normal(noise);
  detail::Spectrum spec;
  fft.forward(noise, spec);
  const double floor = 1.0 / static_cast<double>(std::max(h, w));
  for (std::size_t ky = 0; ky < h; ++ky) {
    for (std::size_t kx = 0; kx < w; ++kx) {
      const std::size_t i = ky * w + kx;
      if (i == 0) {
        spec[i] = 0.0;
        continue;
      }
      const double f = std::max(radial_frequency(ky, kx, h, w), floor);
      spec[i] *= std::pow(f, -0.5 * exponent);
    }
  }
  std::vector<double> out(h * w);
  fft.inverse(spec, out);
  standardize(out);
  return out;
}

Image gaussian_field(std::size_t h, std::size_t w, std::size_t channels, RngStream& rng,
                     const SynthParams& p) {
  Image img(h, w, channels);
  const auto shared = power_law_plane(h, w, p.spectral_exponent, rng);
  const double a = p.channel_correlation;
  const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
  for (std::size_t c = 0; c < channels; ++c) {
    const auto own = power_law_plane(h, w, p.spectral_exponent, rng);
    auto plane = img.plane(c);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = a * shared[i] + b * own[i];
    standardize(plane);
    for (double& v : plane) v = p.mean + p.contrast * v;
  }
  return img;
}

Image checker(std::size_t h, std::size_t w, std::size_t channels) {
  const std::size_t block = std::max<std::size_t>(1, std::min(h, w) / 8);
  Image img(h, w, channels);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) img.at(c, y, x) = static_cast<double>((y / block + x / block) % 2);
  return img;
}

Image multiscale_texture(std::size_t h, std::size_t w, std::size_t channels, RngStream& rng,
                         const SynthParams& p) {
  constexpr int kOctaves = 4;
  Image img(h, w, channels);
  const double base = 2.0 / static_cast<double>(std::min(h, w));
  for (std::size_t c = 0; c < channels; ++c) {
    auto plane = img.plane(c);
    for (int k = 0; k < kOctaves; ++k) {
      const double freq = base * std::ldexp(1.0, k);
      const double theta = std::numbers::pi * rng.uniform();
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      const double amp = std::ldexp(1.0, -k);
      const double fy = freq * std::sin(theta);
      const double fx = freq * std::cos(theta);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          plane[y * w + x] +=
              amp * std::cos(2.0 * std::numbers::pi * (fy * static_cast<double>(y) + fx * static_cast<double>(x)) + phase);
    }
    standardize(plane);
    for (double& v : plane) v = p.mean + p.contrast * v;
  }
  return img;
}

}  // namespace

std::string_view synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::GaussianField: return "gaussian_field";
    case SynthKind::Flat: return "flat";
    case SynthKind::Checker: return "checker";
    case SynthKind::MultiscaleTexture: return "multiscale_texture";
  }
  return "?";
}

std::optional<SynthKind> parse_synth_kind(std::string_view name) {
  for (auto k : {SynthKind::GaussianField, SynthKind::Flat, SynthKind::Checker, SynthKind::MultiscaleTexture})
    if (synth_kind_name(k) == name) return k;
  return std::nullopt;
}

Image synth_image(SynthKind kind, std::size_t h, std::size_t w, RngStream& rng, std::size_t channels,
                  const SynthParams& params) {
  require(h >= 8 && w >= 8, ErrorCode::InvalidArgument, "synth_image: dimensions must be at least 8x8");
  require(channels == 1 || channels == 3, ErrorCode::InvalidArgument, "synth_image: channels must be 1 or 3");
  switch (kind) {
    case SynthKind::GaussianField: return gaussian_field(h, w, channels, rng, params);
    case SynthKind::Flat: return Image(h, w, channels, 0.5);
    case SynthKind::Checker: return checker(h, w, channels);
    case SynthKind::MultiscaleTexture: return multiscale_texture(h, w, channels, rng, params);
  }
  fail(ErrorCode::InvalidArgument, "synth_image: unknown kind");
}

}  // namespace dews
