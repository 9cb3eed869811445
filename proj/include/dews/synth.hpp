#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dews/image.hpp"
#include "dews/rng.hpp"

namespace dews {

enum class SynthKind { GaussianField, Flat, Checker, MultiscaleTexture };

std::string_view synth_kind_name(SynthKind kind);
std::optional<SynthKind> parse_synth_kind(std::string_view name);

struct SynthParams {
  double spectral_exponent = 3.0;  // power spectrum ~ 1 / f^exponent
  double contrast = 0.1;           // per-channel standard deviation
  double mean = 0.5;
  double channel_correlation = 0.8;  // weight of the component shared by all channels
};

/// Synthetic stand-in for natural images.
///
/// gaussian_field: power-law Gaussian random field, normalized per channel to
///   exactly `mean` and `contrast`.
/// flat: every value 0.5.
/// checker: 0/1 blocks of side max(1, min(h, w) / 8).
/// multiscale_texture: four octaves of randomly oriented sinusoids.
///
/// Requires h, w >= 8.
Image synth_image(SynthKind kind, std::size_t h, std::size_t w, RngStream& rng,
                  std::size_t channels = 3, const SynthParams& params = {});

}  // namespace dews
