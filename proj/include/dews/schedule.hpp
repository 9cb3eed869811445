#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace dews {

enum class ScheduleKind { Linear, Constant, Cosine, ScaledLinear, Cubic };

std::string_view schedule_kind_name(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Discrete noise schedule beta_1..beta_T with cached cumulative products.
///
/// Kinds:
///   linear        beta_t = b0 + (b1 - b0) (t - 1) / (T - 1)
///   constant      beta_t = b0
///   cosine        alpha_bar from the squared-cosine law with offset s = 0.008,
///                 betas clipped to at most 0.999
///   scaled_linear beta_t = (sqrt(b0) + (sqrt(b1) - sqrt(b0)) (t - 1) / (T - 1))^2
///   cubic         beta_t = b0 + (b1 - b0) ((t - 1) / (T - 1))^3
///                 (nearly noise-free for small t, most noise late)
class NoiseSchedule {
 public:
  static NoiseSchedule linear(double beta_start, double beta_end, int steps);
  static NoiseSchedule constant(double beta, int steps);
  static NoiseSchedule cosine(int steps);
  static NoiseSchedule scaled_linear(double beta_start, double beta_end, int steps);
  static NoiseSchedule cubic(double beta_start, double beta_end, int steps);
  static NoiseSchedule make(ScheduleKind kind, double beta_start, double beta_end, int steps);
  static NoiseSchedule from_betas(std::vector<double> betas, ScheduleKind kind = ScheduleKind::Linear);

  /// Default used by the stress protocol: cubic 1e-5 -> 0.03, T = 100.
  static NoiseSchedule protocol_default();

  ScheduleKind kind() const noexcept { return kind_; }
  int steps() const noexcept { return static_cast<int>(betas_.size()); }
  double beta_start() const noexcept { return beta_start_; }
  double beta_end() const noexcept { return beta_end_; }
  const std::vector<double>& betas() const noexcept { return betas_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bars_; }  // index 0..T

  double beta(int t) const;       // 1 <= t <= T
  double alpha_bar(int t) const;  // 0 <= t <= T, alpha_bar(0) = 1

  /// start step for a normalized strength: round(t_star * T).
  int start_step(double t_star) const;

 private:
  ScheduleKind kind_ = ScheduleKind::Linear;
  double beta_start_ = 0.0;
  double beta_end_ = 0.0;
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// gamma^2 * abar / (1 - abar); +inf at abar = 1.
double snr_from_alpha_bar(double alpha_bar, double gamma);
double snr_theoretical(const NoiseSchedule& sched, int t, double gamma);

/// beta(u) = a + b u with a, b >= 0 (constant when b = 0).
struct ContinuousSchedule {
  double a = 0.0;
  double b = 0.0;

  static ContinuousSchedule constant(double beta) { return {beta, 0.0}; }
  static ContinuousSchedule linear_ramp(double a, double b) { return {a, b}; }

  void validate() const;
  double beta(double u) const { return a + b * u; }
  double integral(double t) const { return a * t + 0.5 * b * t * t; }
};

/// exp(-integral(t) / 2).
double mean_decay_factor(const ContinuousSchedule& cs, double t);

}  // namespace dews
