#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dews/image.hpp"
#include "dews/rng.hpp"
#include "dews/schedule.hpp"
#include "dews/spectral.hpp"

namespace dews {

enum class EditMode { LinearShrink, Resynth, Identity };
std::string_view edit_mode_name(EditMode m);
EditMode parse_edit_mode(std::string_view name);

/// fixed: always n_steps reverse steps. proportional: round(t_star * n_steps),
/// i.e. a weaker edit also runs a shorter reverse trajectory.
enum class StepPolicy { Fixed, Proportional };
std::string_view step_policy_name(StepPolicy p);
StepPolicy parse_step_policy(std::string_view name);

/// Axis-aligned mask region in fractions of the image size, [y0, y1) x [x0, x1).
struct MaskRect {
  double y0 = 0.125, x0 = 0.125, y1 = 0.875, x1 = 0.875;  // central 56% of the frame
  void validate() const;
  /// h x w x 1 binary mask.
  Image rasterize(std::size_t height, std::size_t width) const;
};

struct EditConfig {
  std::string name = "edit";
  std::string tag = "global";  // global, local or resynth; informational
  EditMode mode = EditMode::LinearShrink;
  double t_star = 0.4;
  int n_steps = 5;
  StepPolicy step_policy = StepPolicy::Fixed;
  BandValues gains{0.98, 0.85, 0.55};
  BandPartition partition{};
  double anchor = 0.5;  // fixed contraction centre (prior mean)
  double kappa = 0.15;  // leak outside the mask
  std::optional<MaskRect> mask_rect;
  std::optional<Image> mask;  // explicit mask; takes precedence over mask_rect

  void validate() const;
  int realized_steps() const;
  double max_gain() const;
};

struct StepRecord {
  int step = 0;         // 0 is the state right after forward noising
  BandValues energy{};  // band energies of (state - anchor)
  double norm = 0.0;    // ||state - anchor||
};

struct NoisedState {
  Image image;
  double alpha_bar = 1.0;
  int start_step = 0;
};

struct EditOutcome {
  Image edited;
  Image noised;
  double alpha_bar = 1.0;
  int start_step = 0;
  int steps = 0;
  std::vector<StepRecord> log;
};

struct CoupledOutcome {
  EditOutcome watermarked;
  EditOutcome baseline;
  double signal_energy = 0.0;  // ||noised_w - noised_b||^2 / d
  double noise_energy = 0.0;   // ||noised_b - sqrt(abar) x||^2 / d
  double snr_empirical() const;
};

/// sqrt(abar) x + sqrt(1 - abar) eps, abar = alpha_bar(round(t_star T)).
/// t_star = 0 returns x unchanged and draws nothing.
NoisedState forward_noise(const Image& x, const NoiseSchedule& sched, double t_star, RngStream& rng);

/// anchor + sum_band g_band P_band(y - anchor).
Image denoise_step(const Image& y, double anchor, const BandValues& gains, const BandPartition& partition = {});

/// Reverse process from a noised state: the state is first re-centred so its
/// mean matches the anchor-shrunk input, then n band-gain contractions are
/// applied. Resynth mode replaces the final high band with fresh texture of
/// matching per-channel energy. No mask handling here.
EditOutcome reverse_process(const NoisedState& state, const EditConfig& cfg, RngStream& rng, bool keep_log = false);

/// Full edit: forward noising, reverse process, mask blending.
EditOutcome edit(const Image& x, const EditConfig& cfg, const NoiseSchedule& sched, RngStream& rng,
                 bool keep_log = false);

/// Runs watermarked and clean inputs through identical noise and texture
/// draws. `rng` is advanced past the draws of one edit.
CoupledOutcome coupled_edit(const Image& x_w, const Image& x, const EditConfig& cfg, const NoiseSchedule& sched,
                            RngStream& rng, bool keep_log = false);

/// Step log as CSV: step,norm,energy_low,energy_mid,energy_high.
std::string step_log_csv(const std::vector<StepRecord>& log);

/// Euler-Maruyama for dX = -beta(t) X / 2 dt + sqrt(beta(t)) dW on every
/// element of x, starting at t = 0; round(t_end / dt) steps.
void ou_simulate(std::span<double> x, const ContinuousSchedule& cs, double t_end, double dt, RngStream& rng);
Image ou_simulate(const Image& x0, const ContinuousSchedule& cs, double t_end, double dt, RngStream& rng);

}  // namespace dews
