#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dews/edit_kernel.hpp"
#include "dews/schedule.hpp"
#include "dews/spectral.hpp"
#include "dews/synth.hpp"
#include "dews/watermark.hpp"

namespace dews {

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::Cubic;
  double beta_start = 1e-5;
  double beta_end = 0.03;
  int steps = 100;

  NoiseSchedule build() const;
};

/// The three-instruction suite used by default: a global shrink, a masked
/// local edit and a texture-resynthesizing edit, all with default gains and
/// proportional step counts.
std::vector<EditConfig> default_edit_suite();

struct ProtocolConfig {
  int n_images = 200;
  std::string image_source = "gaussian_field";  // synthetic kind, or a directory of PNG/raw images
  SynthParams synth{};
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t channels = 3;
  std::vector<EditConfig> edit_suite = default_edit_suite();
  std::vector<double> strengths{0.2, 0.4, 0.6, 0.8};
  int seeds_per_instruction = 3;
  int payload_bits = 96;
  int ecc_repetition = 3;
  std::optional<double> gamma;  // overrides target_psnr_db when set
  double target_psnr_db = 40.0;
  std::uint64_t master_seed = 20240601;
  WatermarkKey key{0x5eed, {0.1, 0.5, 0.4}};
  ScheduleConfig schedule{};
  BandPartition band_edges{};
  int workers = 1;

  double effective_gamma() const;
  std::size_t coded_bits() const { return static_cast<std::size_t>(payload_bits) * ecc_repetition; }
  void validate() const;
};

/// JSON documents mirror the structs field for field; absent fields keep
/// their defaults, unknown fields are rejected. Errors carry ErrorCode::Config.
ProtocolConfig parse_protocol(std::string_view json_text);
std::string protocol_to_json(const ProtocolConfig& cfg);

EditConfig parse_edit(std::string_view json_text);
std::string edit_to_json(const EditConfig& cfg);

ScheduleConfig parse_schedule(std::string_view json_text);

std::string read_text_file(const std::string& path);

}  // namespace dews
