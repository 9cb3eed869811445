#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dews/config.hpp"
#include "dews/edit_kernel.hpp"
#include "dews/rng.hpp"
#include "dews/spectral.hpp"
#include "dews/synth.hpp"

namespace dews {

/// Linear shrink that keeps low and mid frequencies and removes 90% of the
/// high band per step.
EditConfig high_band_killer();

struct TuneConfig {
  std::vector<EditConfig> edit_suite{high_band_killer()};
  std::vector<double> strengths{0.2, 0.4};
  double psnr_floor = 40.0;
  int budget = 120;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  int n_images = 16;
  int seeds = 2;
  int payload_bits = 32;
  int ecc_repetition = 3;
  std::uint64_t key_seed = 0x5eed;
  BandValues start{0.1, 0.5, 0.4};
  SynthKind image_kind = SynthKind::GaussianField;
  SynthParams synth{};
  ScheduleConfig schedule{};
  int workers = 1;

  void validate() const;
  /// Strength meeting the floor: 10^(-floor/20), shaved by 1e-9 relative so
  /// rounding can never push the PSNR below the floor.
  double gamma() const;
};

TuneConfig parse_tune_config(std::string_view json_text);
std::string tune_config_to_json(const TuneConfig& cfg);

struct TuneEval {
  double ber = 0.5;
  double psnr = 0.0;  // minimum embedding PSNR over the evaluation images
  bool feasible = false;
};

/// Mean informed BER over a fixed set of (image, payload, edit, strength,
/// seed) trials drawn once at construction (common random numbers). A
/// profile whose carriers cannot be built (a band without DFT bins, too many
/// bits) is infeasible with BER 0.5; a point off the simplex is an
/// InvalidArgument.
class TuneObjective {
 public:
  TuneObjective(const TuneConfig& cfg, std::uint64_t crn_seed);
  TuneEval operator()(const BandValues& profile) const;
  const TuneConfig& config() const noexcept { return cfg_; }

 private:
  TuneConfig cfg_;
  std::uint64_t crn_seed_;
  NoiseSchedule sched_;
  std::vector<Image> images_;
  std::vector<Bits> coded_;
};

struct TraceEntry {
  int iteration = 0;
  int restart = 0;
  BandValues profile{};
  double gamma = 0.0;
  double ber = 0.5;
  double psnr = 0.0;
  bool feasible = false;
};

struct TuneResult {
  BandValues profile{};
  double gamma = 0.0;
  double ber = 0.5;
  double psnr = 0.0;
  std::uint64_t crn_seed = 0;
  std::vector<TraceEntry> trace;
};

/// Coordinate search over the band simplex: poll the six pairwise transfer
/// directions e_i - e_j at the current step, move to the best improving
/// neighbour, otherwise halve the step (0.2 down to 0.0125). Restarts from the
/// configured start, the centroid and a Dirichlet(1,1,1) draw share `budget`
/// objective evaluations; repeated points are served from a cache.
TuneResult tune_gains(const TuneConfig& cfg, RngStream& rng);

/// iteration,restart,p_low,p_mid,p_high,gamma,ber,psnr,feasible
std::string trace_csv(const TuneResult& result);
std::string tune_result_json(const TuneResult& result);

}  // namespace dews
