#pragma once

#include <span>
#include <vector>

#include "dews/image.hpp"
#include "dews/watermark.hpp"

namespace dews {

struct BitAccuracy {
  double ba = 0.0;
  double ber = 0.0;
};

BitAccuracy bit_accuracy(const Bits& decoded, const Bits& truth);

/// Mann-Whitney AUC: P(pos > neg) + P(pos == neg) / 2.
double roc_auc(std::span<const double> pos, std::span<const double> neg);

/// Threshold tau = k-th largest positive score with k = ceil(target * n_pos),
/// i.e. the largest threshold whose rule "score >= tau" reaches the target
/// TPR; returns the fraction of negatives with score >= tau.
double fpr_at_tpr(std::span<const double> pos, std::span<const double> neg, double target_tpr);

/// 10 log10(1 / MSE) for unit dynamic range; +inf for identical images.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over all 8x8 windows (stride 1, reflect-101 padding so every
/// pixel is a window origin), per channel then averaged. K1 = 0.01,
/// K2 = 0.03, L = 1.
double ssim(const Image& a, const Image& b);

/// Per-bit majority over rows (seeds x bits); odd row count required.
Bits majority_vote(const std::vector<Bits>& rows);

}  // namespace dews
