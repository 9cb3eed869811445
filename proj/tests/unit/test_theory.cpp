#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "dews/schedule.hpp"
#include "dews/theory.hpp"
#include "helpers.hpp"

using namespace dews;
using testing::error_code_of;

namespace {

// I(X; Y) for X = +-a equiprobable, Y = X + N(0, s^2), by trapezoid quadrature.
double bpsk_mi(double a, double s) {
  const int n = 200000;
  const double lo = -a - 14 * s, hi = a + 14 * s, h = (hi - lo) / n;
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + i * h;
    const double z = (y - a) / s;
    const double pdf = std::exp(-0.5 * z * z) / (s * std::sqrt(2 * M_PI));
    const double t = -2 * a * y / (s * s);
    const double f = pdf * (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)));
    acc += (i == 0 || i == n) ? 0.5 * f : f;
  }
  return std::log(2.0) - acc * h;
}

}  // namespace

TEST_CASE("MI upper bound examples and monotonicity") {
  CHECK(mi_upper_bound(64, 0.0, 0.5) == 0.0);
  CHECK(mi_upper_bound(64, 0.3, 0.0) == 0.0);
  CHECK(mi_upper_bound(64, 0.3, 1e-15) < 1e-12);
  CHECK(mi_upper_bound(2, 0.1, 0.5) == doctest::Approx(std::log(1.01)).epsilon(1e-14));
  CHECK(mi_upper_bound(2, 0.1, 0.5) == doctest::Approx(0.00995).epsilon(1e-3));
  CHECK(mi_upper_bound(64, 0.1, 1.0) == kInfinity);
  double prev = 0;
  for (double g : {0.01, 0.05, 0.1, 0.5}) {
    CHECK(mi_upper_bound(16, g, 0.7) > prev);
    prev = mi_upper_bound(16, g, 0.7);
  }
  prev = 0;
  for (double ab : {0.1, 0.3, 0.6, 0.9}) {
    CHECK(mi_upper_bound(16, 0.1, ab) > prev);
    prev = mi_upper_bound(16, 0.1, ab);
  }
  CHECK(error_code_of([] { mi_upper_bound(0, 0.1, 0.5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { mi_upper_bound(4, 0.1, 1.5); }) == ErrorCode::OutOfRange);
}

TEST_CASE("Fano bound examples and monotonicity") {
  CHECK(fano_lower_bound(0.0, 96) == doctest::Approx(1.0 - 1.0 / 96.0).epsilon(1e-15));
  CHECK(fano_lower_bound(0.0, 96) == doctest::Approx(0.98958).epsilon(1e-5));
  for (int L : {1, 4, 96}) CHECK(fano_lower_bound(L * std::log(2.0), L) == 0.0);
  CHECK(fano_lower_bound(0.0, 1) == 0.0);
  double prev = 1;
  for (double mi : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    CHECK(fano_lower_bound(mi, 8) <= prev);
    prev = fano_lower_bound(mi, 8);
  }
  CHECK(error_code_of([] { fano_lower_bound(-1.0, 4); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { fano_lower_bound(0.0, 0); }) == ErrorCode::InvalidArgument);
  CHECK(nats_to_bits(std::log(2.0)) == doctest::Approx(1.0));
}

TEST_CASE("contraction bound examples") {
  CHECK(contraction_bound(0.7, 1, 3.0) == doctest::Approx(2.1));
  CHECK(contraction_bound(0.5, 3, 8.0) == 1.0);
  CHECK(contraction_bound(1.0, 10, 8.0) == 8.0);
  CHECK(contraction_bound(1.0 - 1e-12, 10, 8.0) == doctest::Approx(8.0));
  CHECK(error_code_of([] { contraction_bound(0.0, 1, 1.0); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([] { contraction_bound(0.5, 0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("channel construction") {
  auto rng = RngStream::derive(1, {});
  const auto spec = ChannelSpec::make(16, 4, 0.2, 0.5, rng);
  const Eigen::MatrixXd g = spec.carriers.transpose() * spec.carriers / 16.0;
  CHECK((g - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  // message 0b0101: bits 0 and 2 set
  const Eigen::VectorXd s = spec.signal(5);
  const Eigen::VectorXd want =
      std::sqrt(0.5) * 0.2 * (spec.carriers.col(0) - spec.carriers.col(1) + spec.carriers.col(2) - spec.carriers.col(3)) / 2.0;
  CHECK((s - want).norm() < 1e-12);
  CHECK(error_code_of([&] { ChannelSpec::make(2, 4, 0.1, 0.5, rng); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { ChannelSpec::make(8, 2, 0.1, 1.0, rng); }) == ErrorCode::OutOfRange);
}

TEST_CASE("MI Monte Carlo: zero signal, quadrature oracle, upper bound") {
  auto rng = RngStream::derive(2, {});
  const auto zero = ChannelSpec::make(8, 3, 0.0, 0.5, rng);
  const auto e0 = mi_monte_carlo(zero, 20000, rng);
  CHECK(std::abs(e0.value) <= 3 * e0.stderr_ + 1e-12);

  for (double gamma : {0.1, 0.3, 0.6}) {
    const auto spec = ChannelSpec::make(4, 1, gamma, 0.6, rng);
    const auto e = mi_monte_carlo(spec, 40000, rng);
    const double a = std::sqrt(0.6) * gamma * std::sqrt(4.0);
    const double truth = bpsk_mi(a, std::sqrt(0.4));
    CHECK(std::abs(e.value - truth) <= 3 * e.stderr_);
    CHECK(e.value <= mi_upper_bound(spec) + 3 * e.stderr_);
    CHECK(truth <= std::log(2.0));
  }
  const auto big = ChannelSpec::make(16, 9, 0.1, 0.5, rng);
  CHECK(error_code_of([&] { mi_monte_carlo(big, 20000, rng); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { mi_monte_carlo(zero, 9999, rng); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("MI Monte Carlo: data processing under a linear post-map") {
  auto rng = RngStream::derive(3, {});
  const auto spec = ChannelSpec::make(8, 3, 0.25, 0.7, rng);
  Eigen::MatrixXd shrink = Eigen::MatrixXd::Identity(8, 8) * 0.5;  // invertible: MI unchanged
  Eigen::MatrixXd project = Eigen::MatrixXd::Zero(4, 8);           // drops half the coordinates
  for (int i = 0; i < 4; ++i) project(i, i) = 1.0;
  auto r1 = RngStream::derive(4, {});
  auto r2 = r1, r3 = r1;
  const auto pre = mi_monte_carlo(spec, 20000, r1);
  const auto same = mi_monte_carlo(spec, 20000, r2, &shrink);
  const auto post = mi_monte_carlo(spec, 20000, r3, &project);
  CHECK(same.value == doctest::Approx(pre.value).epsilon(1e-9));
  CHECK(post.value <= pre.value + 3 * pre.stderr_);
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Identity(3, 3);
  CHECK(error_code_of([&] { mi_monte_carlo(spec, 20000, r1, &wrong); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("ML decoder error: noiseless limit, guessing, Fano") {
  auto rng = RngStream::derive(5, {});
  const auto loud = ChannelSpec::make(8, 4, 50.0, 0.9, rng);
  CHECK(ml_decoder_error(loud, 2000, rng).value == 0.0);

  const auto silent = ChannelSpec::make(8, 4, 0.0, 0.5, rng);
  const auto g = ml_decoder_error(silent, 20000, rng);
  CHECK(std::abs(g.value - 15.0 / 16.0) <= 3 * g.stderr_);

  const auto mid = ChannelSpec::make(8, 3, 0.3, 0.6, rng);
  const auto mi = mi_monte_carlo(mid, 20000, rng);
  const auto err = ml_decoder_error(mid, 20000, rng);
  CHECK(err.value >= fano_lower_bound(mi.value, 3) - 3 * std::hypot(err.stderr_, mi.stderr_ / (3 * std::log(2.0))));
}
