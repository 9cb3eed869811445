#pragma once

#include <optional>

#include <Eigen/Core>

#include "dews/rng.hpp"

namespace dews {

/// Small Gaussian channel Y = sqrt(abar) gamma s(M) + sqrt(1 - abar) eps with
/// s(M) = sum_i sigma_i c_i / sqrt(L) and orthogonal carriers, ||c_i||^2 = d.
struct ChannelSpec {
  int d = 16;
  int L = 1;
  double gamma = 0.1;
  double alpha_bar = 0.5;
  Eigen::MatrixXd carriers;  // d x L

  /// Carriers from a Gaussian matrix orthonormalized by QR, scaled by sqrt(d).
  static ChannelSpec make(int d, int L, double gamma, double alpha_bar, RngStream& rng);
  void validate() const;
  /// Mean of Y given message index m (bit i of m is payload bit i).
  Eigen::VectorXd signal(unsigned m) const;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// (d/2) ln(1 + gamma^2 abar / (1 - abar)), nats.
double mi_upper_bound(int d, double gamma, double alpha_bar);
double mi_upper_bound(const ChannelSpec& spec);

/// max(0, 1 - (mi + ln 2) / (L ln 2)); mi in nats.
double fano_lower_bound(double mi_nats, int L);

/// rho_contraction^n * delta_norm. Not to be confused with the per-band
/// retention ratios of the spectral module.
double contraction_bound(double rho_contraction, int n, double delta_norm);

/// I(M; Y) via the exact mixture identity E[ln p(Y|M) - ln p(Y)], messages
/// uniform over 2^L. With `post_map` F (k x d, full row rank) the estimate is
/// for I(M; FY), evaluated on the same draws of (M, eps).
Estimate mi_monte_carlo(const ChannelSpec& spec, long n_samples, RngStream& rng,
                        const Eigen::MatrixXd* post_map = nullptr);

/// Exhaustive maximum-likelihood decoding; empirical Pr[M_hat != M].
Estimate ml_decoder_error(const ChannelSpec& spec, long n_trials, RngStream& rng);

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

}  // namespace dews
