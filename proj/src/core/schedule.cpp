#include "dews/schedule.hpp"

#include <cmath>
#include <numbers>

#include "dews/error.hpp"

namespace dews {

namespace {

constexpr double kProtocolBetaStart = 1e-5;
constexpr double kProtocolBetaEnd = 0.03;
constexpr int kProtocolSteps = 100;

void check_steps(int steps) {
  require(steps >= 1, ErrorCode::InvalidArgument, "schedule: T must be at least 1");
}

void check_beta(double b) {
  require(std::isfinite(b) && b > 0.0 && b < 1.0, ErrorCode::InvalidArgument,
          "schedule: every beta must lie in (0, 1)");
}

double ramp(int i, int steps) {
  return steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
}

}  // namespace

std::string_view schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Cosine: return "cosine";
    case ScheduleKind::ScaledLinear: return "scaled_linear";
    case ScheduleKind::Cubic: return "cubic";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (auto k : {ScheduleKind::Linear, ScheduleKind::Constant, ScheduleKind::Cosine, ScheduleKind::ScaledLinear,
                 ScheduleKind::Cubic})
    if (schedule_kind_name(k) == name) return k;
  fail(ErrorCode::Config, "unknown schedule kind '" + std::string(name) + "'");
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas, ScheduleKind kind) {
  check_steps(static_cast<int>(betas.size()));
  NoiseSchedule s;
  s.kind_ = kind;
  s.alpha_bars_.resize(betas.size() + 1);
  s.alpha_bars_[0] = 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    check_beta(betas[i]);
    s.alpha_bars_[i + 1] = s.alpha_bars_[i] * (1.0 - betas[i]);
  }
  s.beta_start_ = betas.front();
  s.beta_end_ = betas.back();
  s.betas_ = std::move(betas);
  return s;
}

NoiseSchedule NoiseSchedule::linear(double beta_start, double beta_end, int steps) {
  check_steps(steps);
  std::vector<double> b(steps);
  for (int i = 0; i < steps; ++i) b[i] = beta_start + (beta_end - beta_start) * ramp(i, steps);
  return from_betas(std::move(b), ScheduleKind::Linear);
}

NoiseSchedule NoiseSchedule::constant(double beta, int steps) {
  check_steps(steps);
  return from_betas(std::vector<double>(steps, beta), ScheduleKind::Constant);
}

NoiseSchedule NoiseSchedule::scaled_linear(double beta_start, double beta_end, int steps) {
  check_steps(steps);
  require(beta_start > 0.0 && beta_end > 0.0, ErrorCode::InvalidArgument, "schedule: betas must be positive");
  const double r0 = std::sqrt(beta_start), r1 = std::sqrt(beta_end);
  std::vector<double> b(steps);
  for (int i = 0; i < steps; ++i) {
    const double r = r0 + (r1 - r0) * ramp(i, steps);
    b[i] = r * r;
  }
  return from_betas(std::move(b), ScheduleKind::ScaledLinear);
}

NoiseSchedule NoiseSchedule::cubic(double beta_start, double beta_end, int steps) {
  check_steps(steps);
  std::vector<double> b(steps);
  for (int i = 0; i < steps; ++i) {
    const double r = ramp(i, steps);
    b[i] = beta_start + (beta_end - beta_start) * r * r * r;
  }
  return from_betas(std::move(b), ScheduleKind::Cubic);
}

NoiseSchedule NoiseSchedule::cosine(int steps) {
  check_steps(steps);
  constexpr double s = 0.008;
  auto f = [&](int t) {
    const double c = std::cos((static_cast<double>(t) / steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> b(steps);
  for (int t = 1; t <= steps; ++t) b[t - 1] = std::min(1.0 - f(t) / f(t - 1), 0.999);
  return from_betas(std::move(b), ScheduleKind::Cosine);
}

NoiseSchedule NoiseSchedule::make(ScheduleKind kind, double beta_start, double beta_end, int steps) {
  switch (kind) {
    case ScheduleKind::Linear: return linear(beta_start, beta_end, steps);
    case ScheduleKind::Constant: return constant(beta_start, steps);
    case ScheduleKind::Cosine: return cosine(steps);
    case ScheduleKind::ScaledLinear: return scaled_linear(beta_start, beta_end, steps);
    case ScheduleKind::Cubic: return cubic(beta_start, beta_end, steps);
  }
  fail(ErrorCode::InvalidArgument, "schedule: unknown kind");
}

NoiseSchedule NoiseSchedule::protocol_default() {
  return cubic(kProtocolBetaStart, kProtocolBetaEnd, kProtocolSteps);
}

double NoiseSchedule::beta(int t) const {
  require(t >= 1 && t <= steps(), ErrorCode::OutOfRange, "schedule: step " + std::to_string(t) + " out of range");
  return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  require(t >= 0 && t <= steps(), ErrorCode::OutOfRange, "schedule: step " + std::to_string(t) + " out of range");
  return alpha_bars_[t];
}

int NoiseSchedule::start_step(double t_star) const {
  require(t_star >= 0.0 && t_star <= 1.0, ErrorCode::OutOfRange, "t_star must lie in [0, 1]");
  return static_cast<int>(std::lround(t_star * steps()));
}

double snr_from_alpha_bar(double alpha_bar, double gamma) {
  require(gamma >= 0.0, ErrorCode::InvalidArgument, "snr: gamma must be nonnegative");
  require(alpha_bar >= 0.0 && alpha_bar <= 1.0, ErrorCode::OutOfRange, "snr: alpha_bar outside [0, 1]");
  if (alpha_bar == 1.0) return gamma == 0.0 ? 0.0 : kInfinity;
  return gamma * gamma * alpha_bar / (1.0 - alpha_bar);
}

double snr_theoretical(const NoiseSchedule& sched, int t, double gamma) {
  const double ab = sched.alpha_bar(t);
  if (t == 0) {
    require(gamma >= 0.0, ErrorCode::InvalidArgument, "snr: gamma must be nonnegative");
    return kInfinity;
  }
  return snr_from_alpha_bar(ab, gamma);
}

void ContinuousSchedule::validate() const {
  require(std::isfinite(a) && std::isfinite(b) && a >= 0.0 && b >= 0.0, ErrorCode::InvalidArgument,
          "continuous schedule: coefficients must be finite and nonnegative");
}

double mean_decay_factor(const ContinuousSchedule& cs, double t) {
  cs.validate();
  require(t >= 0.0, ErrorCode::OutOfRange, "mean_decay_factor: t must be nonnegative");
  return std::exp(-0.5 * cs.integral(t));
}

}  // namespace dews
