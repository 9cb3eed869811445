#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "dews/error.hpp"
#include "dews/image.hpp"
#include "dews/rng.hpp"

namespace testing {

inline dews::Image random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed,
                                double scale = 1.0) {
  auto rng = dews::RngStream::derive(seed, {99});
  dews::Image img(h, w, c);
  for (double& v : img.data()) v = scale * rng.normal();
  return img;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dews_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// mean and standard error of the mean
struct Moments {
  double mean = 0, se = 0;
};
inline Moments moments(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return {m, std::sqrt(ss / (n - 1) / n)};
}

inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

template <class F>
dews::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const dews::Error& e) {
    return e.code();
  }
  FAIL("expected a dews::Error");
  return dews::ErrorCode::InvalidArgument;
}

}  // namespace testing
