#pragma once

#include <filesystem>

#include "dews/image.hpp"

namespace dews {

// Raw format: "DWS1", u32 LE height, width, channels, then H*W*C LE float32
// values in planar order. The in-memory image is double precision; saving
// narrows to float32, so a raw round trip is bit-exact for values that are
// representable as float32.
void save_raw(const Image& img, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);

// PNG export clamps to [0, 1] and rounds half away from zero:
// q = round(clamp(v) * (2^depth - 1)). So 0.5 becomes 128 at 8 bits.
// Loading accepts 8- and 16-bit gray, gray+alpha, RGB, RGBA and palette
// images; alpha is dropped.
void save_png(const Image& img, const std::filesystem::path& path, int bit_depth = 8);
Image load_png(const std::filesystem::path& path);

/// Dispatch on the file signature.
Image load_image(const std::filesystem::path& path);
/// Dispatch on extension: ".png" writes 8-bit PNG, anything else raw.
void save_image(const Image& img, const std::filesystem::path& path);

}  // namespace dews
