#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dews/config.hpp"
#include "dews/image.hpp"

namespace dews {

/// One (image, edit, strength, seed) trial. Bit accuracy and detection
/// scores use the embedded (coded) bits; msg_ok is the ECC-decoded payload
/// match, msg_ok_raw the match of the first copy of every repetition block.
struct TrialRow {
  int image_idx = 0;
  int edit_idx = 0;
  std::string edit_name;
  int strength_idx = 0;
  double t_star = 0.0;
  int seed_idx = 0;
  int start_step = 0;
  double alpha_bar = 1.0;
  double ba = 0.0;  // informed
  double ber = 0.0;
  int msg_ok = 0;
  int msg_ok_raw = 0;
  double ba_blind = 0.0;
  double detect_score = 0.0;       // edited watermarked image
  double detect_score_null = 0.0;  // matched unwatermarked control (edited baseline)
  double psnr_wm = 0.0;            // PSNR(x, x_w)
  double psnr_edit = 0.0;          // PSNR(x_w, edited)
  double ssim_edit = 0.0;
  double rho_low = 0.0, rho_mid = 0.0, rho_high = 0.0;
  double snr_theory = 0.0;
  double snr_empirical = 0.0;
  double mi_bound_nats = 0.0;
  double fano_bound = 0.0;
  std::string payload_hex;
  std::string decoded_hex;  // ECC-decoded payload
};

struct AggregateRow {
  int edit_idx = 0;
  std::string edit_name;
  int strength_idx = 0;
  double t_star = 0.0;
  int n = 0;
  double ba_mean = 0.0, ba_std = 0.0;
  double ber_mean = 0.0;
  double ba_blind_mean = 0.0, ba_blind_std = 0.0;
  double msg_acc = 0.0;      // with ECC
  double msg_acc_raw = 0.0;  // without ECC
  double voted_ba = 0.0;     // majority vote over seeds, averaged over images
  double vote_gain = 0.0;    // voted_ba - ba_mean
  double auc = 0.0;
  double fpr_at_tpr95 = 0.0;
  double psnr_edit_mean = 0.0, ssim_edit_mean = 0.0;
  double rho_low = 0.0, rho_mid = 0.0, rho_high = 0.0;  // pooled retention ratio
  double alpha_bar = 1.0;
  double snr_theory = 0.0;
  double snr_empirical_mean = 0.0, snr_empirical_stderr = 0.0;
  double mi_bound_nats = 0.0;
  double fano_bound = 0.0;
};

struct CleanRow {
  int image_idx = 0;
  double psnr_wm = 0.0;
  double ba = 0.0;
  double ba_blind = 0.0;
  double detect_score = 0.0;
  double detect_score_null = 0.0;  // unedited, unwatermarked image
  std::string payload_hex;
};

struct StressReport {
  double gamma = 0.0;
  std::vector<TrialRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<CleanRow> clean;
};

/// Lane tags mixed into per-trial random streams.
enum class Stage : std::uint64_t { Image = 1, Payload = 2, Edit = 3 };

/// Images for the protocol: synthesized from (master_seed, image_idx) or read
/// from a directory (sorted by file name, first n_images).
std::vector<Image> protocol_images(const ProtocolConfig& cfg);

StressReport run_dewst(const ProtocolConfig& cfg);

/// BA of the per-bit majority over seed decodes of one (image, edit, strength).
double vote_decode(const std::vector<Bits>& seed_decodes, const Bits& truth);

}  // namespace dews
