#include <doctest.h>

#include <cmath>

#include "dews/schedule.hpp"
#include "helpers.hpp"

using namespace dews;
using testing::error_code_of;

TEST_CASE("alpha_bar examples") {
  const auto c = NoiseSchedule::constant(0.1, 10);
  CHECK(c.alpha_bar(0) == 1.0);
  CHECK(c.alpha_bar(2) == doctest::Approx(0.81).epsilon(1e-15));

  const auto lin = NoiseSchedule::linear(1e-4, 0.2, 100);
  long double prod = 1.0L;
  for (int t = 1; t <= 100; ++t) prod *= 1.0L - (1e-4L + (0.2L - 1e-4L) * (t - 1) / 99.0L);
  CHECK(lin.alpha_bar(100) > 0.0);
  CHECK(lin.alpha_bar(100) < 0.05);
  CHECK(std::abs(lin.alpha_bar(100) - static_cast<double>(prod)) < 1e-15);
  CHECK(lin.beta(1) == doctest::Approx(1e-4));
  CHECK(lin.beta(100) == doctest::Approx(0.2));
}

TEST_CASE("every kind: alpha_bar strictly decreasing and equal to the running product") {
  for (auto s : {NoiseSchedule::linear(1e-4, 0.2, 100), NoiseSchedule::constant(0.02, 50), NoiseSchedule::cosine(100),
                 NoiseSchedule::scaled_linear(1e-4, 0.02, 100), NoiseSchedule::cubic(1e-5, 0.03, 100),
                 NoiseSchedule::protocol_default()}) {
    CHECK(s.alpha_bar(0) == 1.0);
    double running = 1.0;
    for (int t = 1; t <= s.steps(); ++t) {
      running *= 1.0 - s.beta(t);
      CHECK(s.beta(t) > 0.0);
      CHECK(s.beta(t) < 1.0);
      CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
      CHECK(s.alpha_bar(t) > 0.0);
      CHECK(std::abs(s.alpha_bar(t) - running) <= 1e-12);
    }
  }
}

TEST_CASE("kind formulas, names and parsing") {
  const auto sl = NoiseSchedule::scaled_linear(1e-4, 0.01, 11);
  CHECK(sl.beta(6) == doctest::Approx(std::pow((0.01 + 0.1) / 2.0, 2)).epsilon(1e-14));
  const auto cu = NoiseSchedule::cubic(1e-5, 0.03, 11);
  CHECK(cu.beta(6) == doctest::Approx(1e-5 + (0.03 - 1e-5) * 0.125).epsilon(1e-14));
  CHECK(cu.kind() == ScheduleKind::Cubic);

  const auto p = NoiseSchedule::protocol_default();
  CHECK(p.kind() == ScheduleKind::Cubic);
  CHECK(p.steps() == 100);
  CHECK(p.beta_start() == doctest::Approx(1e-5));
  CHECK(p.beta_end() == doctest::Approx(0.03));

  for (auto k : {ScheduleKind::Linear, ScheduleKind::Constant, ScheduleKind::Cosine, ScheduleKind::ScaledLinear,
                 ScheduleKind::Cubic})
    CHECK(parse_schedule_kind(schedule_kind_name(k)) == k);
  CHECK(error_code_of([] { parse_schedule_kind("sigmoid"); }) == ErrorCode::Config);
  CHECK(NoiseSchedule::make(ScheduleKind::Constant, 0.1, 0.5, 3).alpha_bar(3) == doctest::Approx(0.729));
}

TEST_CASE("range and argument errors") {
  const auto s = NoiseSchedule::constant(0.1, 10);
  CHECK(error_code_of([&] { s.alpha_bar(11); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([&] { s.alpha_bar(-1); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([&] { s.beta(0); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([] { NoiseSchedule::constant(1.0, 10); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { NoiseSchedule::constant(0.0, 10); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { NoiseSchedule::linear(0.1, 0.2, 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { s.start_step(1.5); }) == ErrorCode::OutOfRange);
}

TEST_CASE("start step is round(t_star * T)") {
  const auto s = NoiseSchedule::constant(0.01, 100);
  CHECK(s.start_step(0.0) == 0);
  CHECK(s.start_step(0.2) == 20);
  CHECK(s.start_step(0.8) == 80);
  CHECK(s.start_step(1.0) == 100);
  const auto s7 = NoiseSchedule::constant(0.01, 7);
  CHECK(s7.start_step(0.5) == 4);  // 3.5 rounds away from zero
  CHECK(s7.start_step(0.4) == 3);  // 2.8
}

TEST_CASE("snr_theoretical examples and properties") {
  CHECK(snr_from_alpha_bar(0.5, 0.1) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(snr_from_alpha_bar(0.81, 0.1) == doctest::Approx(0.01 * 0.81 / 0.19).epsilon(1e-15));
  CHECK(snr_from_alpha_bar(0.81, 0.1) == doctest::Approx(0.04263).epsilon(1e-4));
  CHECK(snr_from_alpha_bar(1.0, 0.1) == kInfinity);

  const auto s = NoiseSchedule::protocol_default();
  CHECK(snr_theoretical(s, 0, 0.01) == kInfinity);
  for (int t = 1; t <= s.steps(); ++t) {
    CHECK(snr_theoretical(s, t, 0.0) == 0.0);
    if (t > 1) CHECK(snr_theoretical(s, t, 0.01) < snr_theoretical(s, t - 1, 0.01));
    for (double c : {0.5, 3.0, 10.0}) {
      const double base = snr_theoretical(s, t, 0.01);
      CHECK(snr_theoretical(s, t, c * 0.01) == doctest::Approx(c * c * base).epsilon(1e-14));
    }
  }
}

TEST_CASE("continuous schedule: decay factor examples") {
  const auto c = ContinuousSchedule::constant(0.2);
  CHECK(mean_decay_factor(c, 0.0) == 1.0);
  CHECK(mean_decay_factor(c, 10.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const auto ramp = ContinuousSchedule::linear_ramp(0.0, 1.0);
  CHECK(mean_decay_factor(ramp, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ramp.integral(0.0) == 0.0);
  CHECK(ramp.integral(1.0) < ramp.integral(1.5));
  CHECK(error_code_of([&] { mean_decay_factor(c, -1.0); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([] { ContinuousSchedule::constant(-0.1).validate(); }) == ErrorCode::InvalidArgument);
  CHECK(mean_decay_factor(ContinuousSchedule::constant(0.0), 5.0) == 1.0);
}

TEST_CASE("discrete product converges to the squared decay factor at rate O(dt)") {
  const double beta = 0.2, t = 10.0;
  const double target = std::pow(mean_decay_factor(ContinuousSchedule::constant(beta), t), 2);
  double prev_err = 1.0;
  for (double dt : {0.1, 0.01, 0.001}) {
    const int n = static_cast<int>(std::lround(t / dt));
    const auto s = NoiseSchedule::constant(beta * dt, n);
    const double err = std::abs(s.alpha_bar(n) - target);
    CHECK(err <= 2.0 * beta * beta * t * dt * target);  // leading term beta^2 t dt / 2
    CHECK(err < prev_err);
    prev_err = err;
  }
}
