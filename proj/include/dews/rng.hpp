#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace dews {

/// Deterministic random stream derived from a master seed and a tuple of lane
/// indices.
///
/// Engine: std::mt19937_64 seeded through std::seed_seq with the words
/// (seed_lo, seed_hi, lane_count, lane0_lo, lane0_hi, ...). Uniform draws take
/// the top 53 bits of one engine output. Normal draws use the Box-Muller
/// transform on two uniforms, caching the second variate.
///
/// Streams are cheap to copy; a copy replays exactly the same sequence, which
/// is how coupled simulations share one noise realization.
class RngStream {
 public:
  static constexpr std::string_view algorithm_id = "mt19937_64+seed_seq/box-muller";
  static constexpr std::size_t max_lanes = 8;

  static RngStream derive(std::uint64_t master_seed, std::span<const std::uint64_t> lanes);
  static RngStream derive(std::uint64_t master_seed, std::initializer_list<std::uint64_t> lanes) {
    return derive(master_seed, std::span<const std::uint64_t>(lanes.begin(), lanes.size()));
  }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  void fill_normal(std::span<double> out);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::vector<std::uint64_t>& lanes() const noexcept { return lanes_; }

 private:
  RngStream() = default;

  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
  std::uint64_t master_seed_ = 0;
  std::vector<std::uint64_t> lanes_;
};

}  // namespace dews
