#include "dews/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "dews/error.hpp"

namespace dews {

namespace {

constexpr std::array<char, 4> kRawMagic{'D', 'W', 'S', '1'};
constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngError {
  std::jmp_buf jump;
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof err->message, "%s", msg);
  std::longjmp(err->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace

void save_raw(const Image& img, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(kRawMagic.begin(), kRawMagic.end());
  put_u32(bytes, static_cast<std::uint32_t>(img.height()));
  put_u32(bytes, static_cast<std::uint32_t>(img.width()));
  put_u32(bytes, static_cast<std::uint32_t>(img.channels()));
  bytes.reserve(bytes.size() + 4 * img.size());
  for (double v : img.data()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for '" + path.string() + "'");
}

Image load_raw(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  require(bytes.size() >= 16 && std::equal(kRawMagic.begin(), kRawMagic.end(), bytes.begin()),
          ErrorCode::Format, "'" + path.string() + "' is not a DWS1 raw image");
  const std::uint64_t h = get_u32(&bytes[4]);
  const std::uint64_t w = get_u32(&bytes[8]);
  const std::uint64_t c = get_u32(&bytes[12]);
  require(c == 1 || c == 3, ErrorCode::Format, "raw image: channel count must be 1 or 3");
  const std::uint64_t n = h * w * c;
  require(bytes.size() == 16 + 4 * n, ErrorCode::Format,
          "raw image: payload length does not match header dimensions in '" + path.string() + "'");
  std::vector<double> data(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(get_u32(&bytes[16 + 4 * i]));
    require(std::isfinite(f), ErrorCode::Format, "raw image: non-finite sample");
    data[i] = f;
  }
  return Image(h, w, c, std::move(data));
}

void save_png(const Image& img, const std::filesystem::path& path, int bit_depth) {
  require(bit_depth == 8 || bit_depth == 16, ErrorCode::InvalidArgument, "PNG bit depth must be 8 or 16");
  require(img.channels() == 1 || img.channels() == 3, ErrorCode::InvalidArgument,
          "PNG export needs 1 or 3 channels");
  const std::size_t h = img.height(), w = img.width(), ch = img.channels();
  const std::size_t bytes_per_sample = bit_depth / 8;
  const double qmax = bit_depth == 8 ? 255.0 : 65535.0;

  // Interleave and quantize before touching libpng so nothing non-trivial
  // lives across the setjmp.
  std::vector<unsigned char> pixels(h * w * ch * bytes_per_sample);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < ch; ++c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        const auto q = static_cast<std::uint32_t>(std::round(v * qmax));
        const std::size_t i = ((y * w + x) * ch + c) * bytes_per_sample;
        if (bit_depth == 8) {
          pixels[i] = static_cast<unsigned char>(q);
        } else {
          pixels[i] = static_cast<unsigned char>(q >> 8);
          pixels[i + 1] = static_cast<unsigned char>(q & 0xFF);
        }
      }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * ch * bytes_per_sample;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  require(file != nullptr, ErrorCode::Io, "cannot write '" + path.string() + "'");

  PngError err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Io, "libpng initialization failed");
  }
  if (setjmp(err.jump)) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Io, std::string("PNG write failed: ") + err.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  require(file != nullptr, ErrorCode::Io, "cannot open '" + path.string() + "'");

  PngError err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::Io, "libpng initialization failed");
  }

  // Raw buffers only; allocated before setjmp so longjmp leaks nothing.
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0, color = 0;
  volatile int channels = 0;
  bool bad_depth = false;

  if (setjmp(err.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::Format, "PNG read failed for '" + path.string() + "': " + err.message);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  } else if (depth != 8 && depth != 16) {
    bad_depth = true;
  }
  if (!bad_depth) {
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  require(!bad_depth, ErrorCode::Format, "unsupported PNG bit depth " + std::to_string(depth));
  require(channels == 1 || channels == 3, ErrorCode::Format, "unsupported PNG channel layout");

  const std::size_t bytes_per_sample = depth == 16 ? 2 : 1;
  const double qmax = depth == 16 ? 65535.0 : 255.0;
  Image img(height, width, static_cast<std::size_t>(channels));
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c) {
        const unsigned char* p = rows[y] + (x * channels + c) * bytes_per_sample;
        const unsigned q = bytes_per_sample == 2 ? (unsigned{p[0]} << 8) | p[1] : p[0];
        img.at(c, y, x) = q / qmax;
      }
  return img;
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= 4 && std::equal(kRawMagic.begin(), kRawMagic.end(), head.begin())) return load_raw(path);
  if (got == 8 && head == kPngMagic) return load_png(path);
  fail(ErrorCode::Format, "'" + path.string() + "': unrecognized image format");
}

void save_image(const Image& img, const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".png") {
    save_png(img, path, 8);
  } else {
    save_raw(img, path);
  }
}

}  // namespace dews
