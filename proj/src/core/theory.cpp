#include "dews/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <vector>

#include "dews/error.hpp"

namespace dews {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  Estimate result() const {
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

ChannelSpec ChannelSpec::make(int d, int L, double gamma, double alpha_bar, RngStream& rng) {
  ChannelSpec s;
  s.d = d;
  s.L = L;
  s.gamma = gamma;
  s.alpha_bar = alpha_bar;
  require(d >= 1 && L >= 1 && L <= d, ErrorCode::InvalidArgument, "channel: need 1 <= L <= d");
  Eigen::MatrixXd g(d, L);
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  s.carriers = qr.householderQ() * Eigen::MatrixXd::Identity(d, L);
  s.carriers *= std::sqrt(static_cast<double>(d));
  s.validate();
  return s;
}

void ChannelSpec::validate() const {
  require(d >= 1 && L >= 1 && d >= L, ErrorCode::InvalidArgument, "channel: need d >= L >= 1");
  require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::InvalidArgument, "channel: gamma must be >= 0");
  require(alpha_bar > 0.0 && alpha_bar < 1.0, ErrorCode::OutOfRange, "channel: alpha_bar must lie in (0, 1)");
  require(carriers.rows() == d && carriers.cols() == L, ErrorCode::ShapeMismatch, "channel: carrier matrix shape");
}

Eigen::VectorXd ChannelSpec::signal(unsigned m) const {
  Eigen::VectorXd sigma(L);
  for (int i = 0; i < L; ++i) sigma[i] = ((m >> i) & 1u) ? 1.0 : -1.0;
  return (std::sqrt(alpha_bar) * gamma / std::sqrt(static_cast<double>(L))) * (carriers * sigma);
}

double mi_upper_bound(int d, double gamma, double alpha_bar) {
  require(d >= 1, ErrorCode::InvalidArgument, "mi bound: d must be >= 1");
  require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::InvalidArgument, "mi bound: gamma must be >= 0");
  require(alpha_bar >= 0.0 && alpha_bar <= 1.0, ErrorCode::OutOfRange, "mi bound: alpha_bar outside [0, 1]");
  if (gamma == 0.0 || alpha_bar == 0.0) return 0.0;
  if (alpha_bar == 1.0) return std::numeric_limits<double>::infinity();
  return 0.5 * d * std::log1p(gamma * gamma * alpha_bar / (1.0 - alpha_bar));
}

double mi_upper_bound(const ChannelSpec& spec) {
  spec.validate();
  return mi_upper_bound(spec.d, spec.gamma, spec.alpha_bar);
}

double fano_lower_bound(double mi_nats, int L) {
  require(mi_nats >= 0.0, ErrorCode::InvalidArgument, "fano: mi must be >= 0");
  require(L >= 1, ErrorCode::InvalidArgument, "fano: L must be >= 1");
  return std::max(0.0, 1.0 - (mi_nats + kLn2) / (L * kLn2));
}

double contraction_bound(double rho_contraction, int n, double delta_norm) {
  require(rho_contraction > 0.0 && rho_contraction <= 1.0, ErrorCode::OutOfRange, "contraction: rho must lie in (0, 1]");
  require(n >= 1, ErrorCode::InvalidArgument, "contraction: n must be >= 1");
  require(delta_norm >= 0.0, ErrorCode::InvalidArgument, "contraction: norm must be >= 0");
  return std::pow(rho_contraction, n) * delta_norm;
}

Estimate mi_monte_carlo(const ChannelSpec& spec, long n_samples, RngStream& rng, const Eigen::MatrixXd* post_map) {
  spec.validate();
  require(spec.L <= 8, ErrorCode::InvalidArgument, "mi_monte_carlo: L > 8 is not enumerable");
  require(n_samples >= 10000, ErrorCode::InvalidArgument, "mi_monte_carlo: need at least 1e4 samples");
  const unsigned M = 1u << spec.L;
  const double sigma = std::sqrt(1.0 - spec.alpha_bar);

  // Work in whitened coordinates: for Z = F Y the likelihood is Gaussian with
  // covariance sigma^2 F F^T; W = chol(F F^T)^{-1} makes it isotropic.
  Eigen::MatrixXd W;
  if (post_map) {
    require(post_map->cols() == spec.d && post_map->rows() >= 1, ErrorCode::ShapeMismatch,
            "mi_monte_carlo: post-map must have d columns");
    Eigen::LLT<Eigen::MatrixXd> llt(*post_map * post_map->transpose());
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument, "mi_monte_carlo: post-map is rank deficient");
    W = llt.matrixL().solve(*post_map);
  } else {
    W = Eigen::MatrixXd::Identity(spec.d, spec.d);
  }
  std::vector<Eigen::VectorXd> means(M);
  for (unsigned m = 0; m < M; ++m) means[m] = W * spec.signal(m);

  Welford acc;
  std::vector<double> ll(M);
  Eigen::VectorXd eps(spec.d);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (long k = 0; k < n_samples; ++k) {
    const auto m = static_cast<unsigned>(rng.next_u64() >> (64 - spec.L));
    for (int i = 0; i < spec.d; ++i) eps[i] = rng.normal();
    const Eigen::VectorXd z = means[m] + sigma * (W * eps);
    for (unsigned j = 0; j < M; ++j) ll[j] = -(z - means[j]).squaredNorm() * inv2s2;
    acc.add(ll[m] - log_sum_exp(ll) + spec.L * kLn2);
  }
  return acc.result();
}

Estimate ml_decoder_error(const ChannelSpec& spec, long n_trials, RngStream& rng) {
  spec.validate();
  require(spec.L <= 8, ErrorCode::InvalidArgument, "ml_decoder_error: L > 8 is not enumerable");
  require(n_trials >= 1, ErrorCode::InvalidArgument, "ml_decoder_error: need at least one trial");
  const unsigned M = 1u << spec.L;
  const double sigma = std::sqrt(1.0 - spec.alpha_bar);
  std::vector<Eigen::VectorXd> means(M);
  for (unsigned m = 0; m < M; ++m) means[m] = spec.signal(m);
  long errors = 0;
  Eigen::VectorXd y(spec.d);
  for (long k = 0; k < n_trials; ++k) {
    const auto m = static_cast<unsigned>(rng.next_u64() >> (64 - spec.L));
    for (int i = 0; i < spec.d; ++i) y[i] = means[m][i] + sigma * rng.normal();
    unsigned best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned j = 0; j < M; ++j) {
      const double dist = (y - means[j]).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    errors += best != m;
  }
  const double p = static_cast<double>(errors) / static_cast<double>(n_trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials))};
}

}  // namespace dews
