#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dews {

/// H x W x C floating-point image, channel-planar, row-major within a plane.
///
/// Values are nominally in [0, 1] but are never clamped here: the analysis
/// path is linear and clamping only happens when exporting to integer PNG.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t plane_size() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> plane(std::size_t c);
  std::span<const double> plane(std::size_t c) const;

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  std::string shape_string() const;

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);

  /// this += s * rhs
  Image& add_scaled(const Image& rhs, double s);

  friend Image operator+(Image lhs, const Image& rhs) { return lhs += rhs; }
  friend Image operator-(Image lhs, const Image& rhs) { return lhs -= rhs; }
  friend Image operator*(Image lhs, double s) { return lhs *= s; }
  friend Image operator*(double s, Image rhs) { return rhs *= s; }

  bool operator==(const Image& other) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

void require_same_shape(const Image& a, const Image& b, const char* what);

double dot(const Image& a, const Image& b);
double squared_norm(const Image& a);
double norm(const Image& a);
double max_abs(const Image& a);
bool all_finite(const Image& a);

}  // namespace dews
