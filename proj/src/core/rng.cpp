#include "dews/rng.hpp"

#include <cmath>
#include <numbers>

#include "dews/error.hpp"

namespace dews {

RngStream RngStream::derive(std::uint64_t master_seed, std::span<const std::uint64_t> lanes) {
  require(lanes.size() <= max_lanes, ErrorCode::InvalidArgument,
          "derive_stream: at most 8 lanes are supported");
  std::vector<std::uint32_t> words;
  words.reserve(3 + 2 * lanes.size());
  words.push_back(static_cast<std::uint32_t>(master_seed));
  words.push_back(static_cast<std::uint32_t>(master_seed >> 32));
  words.push_back(static_cast<std::uint32_t>(lanes.size()));
  for (std::uint64_t lane : lanes) {
    words.push_back(static_cast<std::uint32_t>(lane));
    words.push_back(static_cast<std::uint32_t>(lane >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());

  RngStream s;
  s.engine_.seed(seq);
  s.master_seed_ = master_seed;
  s.lanes_.assign(lanes.begin(), lanes.end());
  return s;
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

}  // namespace dews
