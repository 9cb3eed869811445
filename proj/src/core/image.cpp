#include "dews/image.hpp"

#include <cmath>
#include <numeric>

#include "dews/error.hpp"

namespace dews {

namespace {
std::size_t checked_channels(std::size_t c) {
  require(c == 1 || c == 3, ErrorCode::InvalidArgument, "images have 1 or 3 channels, got " + std::to_string(c));
  return c;
}
}  // namespace

Image::Image(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(checked_channels(channels)), data_(height * width * channels, fill) {}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(checked_channels(channels)), data_(std::move(data)) {
  require(data_.size() == height_ * width_ * channels_, ErrorCode::ShapeMismatch,
          "image data length does not match " + shape_string());
}

std::span<double> Image::plane(std::size_t c) {
  return std::span<double>(data_).subspan(c * plane_size(), plane_size());
}

std::span<const double> Image::plane(std::size_t c) const {
  return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
}

std::string Image::shape_string() const {
  return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
}

Image& Image::operator+=(const Image& rhs) {
  require_same_shape(*this, rhs, "image addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_same_shape(*this, rhs, "image subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Image& Image::add_scaled(const Image& rhs, double s) {
  require_same_shape(*this, rhs, "image axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * rhs.data_[i];
  return *this;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::ShapeMismatch,
         std::string(what) + ": shape " + a.shape_string() + " vs " + b.shape_string());
  }
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  const auto x = a.data();
  const auto y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double squared_norm(const Image& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

double norm(const Image& a) { return std::sqrt(squared_norm(a)); }

double max_abs(const Image& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Image& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace dews
