#include "dews/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "dews/edit_kernel.hpp"
#include "dews/error.hpp"
#include "dews/image_io.hpp"
#include "dews/metrics.hpp"
#include "dews/theory.hpp"

namespace dews {

namespace {

struct TrialExtra {
  Bits decoded;  // coded bits, informed
  BandValues num{};
  BandValues den{};
};

std::uint64_t lane(Stage s) { return static_cast<std::uint64_t>(s); }

struct MeanStd {
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double std() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum2 - n * m * m) / (n - 1)));
  }
};

std::vector<Image> load_directory(const ProtocolConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.image_source);
  require(fs::is_directory(dir), ErrorCode::Config,
          "image_source '" + cfg.image_source + "' is neither a synthetic kind nor a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".dws" || ext == ".raw") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::Config, "image_source '" + cfg.image_source + "' contains no images");
  require(files.size() >= static_cast<std::size_t>(cfg.n_images), ErrorCode::Config,
          "image_source has " + std::to_string(files.size()) + " images, n_images is " + std::to_string(cfg.n_images));
  std::vector<Image> out;
  for (int i = 0; i < cfg.n_images; ++i) {
    Image img = load_image(files[i]);
    require(img.height() == cfg.height && img.width() == cfg.width && img.channels() == cfg.channels,
            ErrorCode::Config,
            "image '" + files[i].string() + "' is " + img.shape_string() + ", config expects " +
                std::to_string(cfg.height) + "x" + std::to_string(cfg.width) + "x" + std::to_string(cfg.channels));
    out.push_back(std::move(img));
  }
  return out;
}

template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<Image> protocol_images(const ProtocolConfig& cfg) {
  const auto kind = parse_synth_kind(cfg.image_source);
  if (!kind) return load_directory(cfg);
  std::vector<Image> out;
  out.reserve(cfg.n_images);
  for (int i = 0; i < cfg.n_images; ++i) {
    auto rng = RngStream::derive(cfg.master_seed, {static_cast<std::uint64_t>(i), lane(Stage::Image)});
    out.push_back(synth_image(*kind, cfg.height, cfg.width, rng, cfg.channels, cfg.synth));
  }
  return out;
}

double vote_decode(const std::vector<Bits>& seed_decodes, const Bits& truth) {
  return bit_accuracy(majority_vote(seed_decodes), truth).ba;
}

StressReport run_dewst(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto images = protocol_images(cfg);
  const NoiseSchedule sched = cfg.schedule.build();
  const double gamma = cfg.effective_gamma();
  const int r = cfg.ecc_repetition;
  const auto bank = CarrierBank::make(cfg.key, cfg.coded_bits(), cfg.height, cfg.width, cfg.channels);
  const double d = static_cast<double>(cfg.height * cfg.width * cfg.channels);

  const int n_img = cfg.n_images;
  const int n_edit = static_cast<int>(cfg.edit_suite.size());
  const int n_str = static_cast<int>(cfg.strengths.size());
  const int n_seed = cfg.seeds_per_instruction;
  const std::size_t per_image = static_cast<std::size_t>(n_edit) * n_str * n_seed;

  StressReport report;
  report.gamma = gamma;
  report.rows.resize(per_image * n_img);
  report.clean.resize(n_img);
  std::vector<TrialExtra> extra(report.rows.size());
  std::vector<Bits> payloads(n_img), coded_payloads(n_img);

  parallel_for(n_img, cfg.workers, [&](int i) {
    const Image& x = images[i];
    auto prng = RngStream::derive(cfg.master_seed, {static_cast<std::uint64_t>(i), lane(Stage::Payload)});
    const Bits payload = random_payload(cfg.payload_bits, prng);
    const Bits coded = ecc_encode(payload, r);
    const Image x_w = embed(x, coded, bank, gamma);
    const std::string payload_hex = bits_to_hex(payload);
    const double psnr_wm = psnr(x, x_w);
    const BandValues den = band_energies(x_w - x, cfg.band_edges);

    CleanRow& clean = report.clean[i];
    clean.image_idx = i;
    clean.psnr_wm = psnr_wm;
    const auto clean_scores = decode_soft(x_w, &x, bank);
    clean.ba = bit_accuracy(decode_bits(clean_scores), coded).ba;
    clean.ba_blind = bit_accuracy(decode_bits(decode_soft(x_w, nullptr, bank)), coded).ba;
    clean.detect_score = detect_score(clean_scores, bank);
    clean.detect_score_null = detect_score(x, &x, bank);
    clean.payload_hex = payload_hex;
    payloads[i] = payload;
    coded_payloads[i] = coded;

    for (int e = 0; e < n_edit; ++e) {
      EditConfig ecfg = cfg.edit_suite[e];
      for (int s = 0; s < n_str; ++s) {
        ecfg.t_star = cfg.strengths[s];
        for (int k = 0; k < n_seed; ++k) {
          const std::size_t idx = static_cast<std::size_t>(i) * per_image +
                                  (static_cast<std::size_t>(e) * n_str + s) * n_seed + k;
          auto rng = RngStream::derive(cfg.master_seed,
                                       {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(e),
                                        static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k),
                                        lane(Stage::Edit)});
          const auto co = coupled_edit(x_w, x, ecfg, sched, rng);
          const Image& edited = co.watermarked.edited;

          TrialRow& row = report.rows[idx];
          row.image_idx = i;
          row.edit_idx = e;
          row.edit_name = ecfg.name;
          row.strength_idx = s;
          row.t_star = ecfg.t_star;
          row.seed_idx = k;
          row.start_step = co.watermarked.start_step;
          row.alpha_bar = co.watermarked.alpha_bar;

          const auto scores = decode_soft(edited, &x, bank);
          Bits bits = decode_bits(scores);
          const auto acc = bit_accuracy(bits, coded);
          row.ba = acc.ba;
          row.ber = acc.ber;
          const auto ecc = ecc_decode(bits, r);
          row.msg_ok = ecc.bits == payload;
          Bits first(payload.size());
          for (std::size_t b = 0; b < payload.size(); ++b) first[b] = bits[b * r];
          row.msg_ok_raw = first == payload;
          row.decoded_hex = bits_to_hex(ecc.bits);
          row.payload_hex = payload_hex;
          row.ba_blind = bit_accuracy(decode_bits(decode_soft(edited, nullptr, bank)), coded).ba;
          row.detect_score = detect_score(scores, bank);
          row.detect_score_null = detect_score(co.baseline.edited, &x, bank);
          row.psnr_wm = psnr_wm;
          row.psnr_edit = psnr(x_w, edited);
          row.ssim_edit = ssim(x_w, edited);

          TrialExtra& ex = extra[idx];
          ex.num = band_energies(edited - co.baseline.edited, cfg.band_edges);
          ex.den = den;
          row.rho_low = ex.num[0] / den[0];
          row.rho_mid = ex.num[1] / den[1];
          row.rho_high = ex.num[2] / den[2];
          ex.decoded = std::move(bits);

          row.snr_theory = snr_from_alpha_bar(row.alpha_bar, gamma);
          row.snr_empirical = co.snr_empirical();
          row.mi_bound_nats = mi_upper_bound(static_cast<int>(d), gamma, row.alpha_bar);
          row.fano_bound = fano_lower_bound(row.mi_bound_nats, cfg.payload_bits);
        }
      }
    }
  });

  for (int e = 0; e < n_edit; ++e) {
    for (int s = 0; s < n_str; ++s) {
      AggregateRow ag;
      ag.edit_idx = e;
      ag.edit_name = cfg.edit_suite[e].name;
      ag.strength_idx = s;
      ag.t_star = cfg.strengths[s];
      MeanStd ba, ber, blind, msg, msg_raw, voted, pe, se, snr;
      std::vector<double> pos, neg;
      BandValues num{}, den{};
      for (int i = 0; i < n_img; ++i) {
        std::vector<Bits> seed_bits;
        for (int k = 0; k < n_seed; ++k) {
          const std::size_t idx = static_cast<std::size_t>(i) * per_image +
                                  (static_cast<std::size_t>(e) * n_str + s) * n_seed + k;
          const auto& row = report.rows[idx];
          ba.add(row.ba);
          ber.add(row.ber);
          blind.add(row.ba_blind);
          msg.add(row.msg_ok);
          msg_raw.add(row.msg_ok_raw);
          pe.add(row.psnr_edit);
          se.add(row.ssim_edit);
          snr.add(row.snr_empirical);
          pos.push_back(row.detect_score);
          neg.push_back(row.detect_score_null);
          for (int b = 0; b < 3; ++b) {
            num[b] += extra[idx].num[b];
            den[b] += extra[idx].den[b];
          }
          seed_bits.push_back(extra[idx].decoded);
          ag.alpha_bar = row.alpha_bar;
        }
        if (n_seed % 2 == 1) voted.add(vote_decode(seed_bits, coded_payloads[i]));
      }
      ag.n = ba.n;
      ag.ba_mean = ba.mean();
      ag.ba_std = ba.std();
      ag.ber_mean = ber.mean();
      ag.ba_blind_mean = blind.mean();
      ag.ba_blind_std = blind.std();
      ag.msg_acc = msg.mean();
      ag.msg_acc_raw = msg_raw.mean();
      ag.voted_ba = n_seed % 2 == 1 ? voted.mean() : std::nan("");
      ag.vote_gain = ag.voted_ba - ag.ba_mean;
      ag.auc = roc_auc(pos, neg);
      ag.fpr_at_tpr95 = fpr_at_tpr(pos, neg, 0.95);
      ag.psnr_edit_mean = pe.mean();
      ag.ssim_edit_mean = se.mean();
      const auto rho = retention_from_energies(num, den, static_cast<std::size_t>(ba.n));
      ag.rho_low = rho.rho[0];
      ag.rho_mid = rho.rho[1];
      ag.rho_high = rho.rho[2];
      ag.snr_theory = snr_from_alpha_bar(ag.alpha_bar, gamma);
      ag.snr_empirical_mean = snr.mean();
      ag.snr_empirical_stderr = snr.n > 1 ? snr.std() / std::sqrt(static_cast<double>(snr.n)) : 0.0;
      ag.mi_bound_nats = mi_upper_bound(static_cast<int>(d), gamma, ag.alpha_bar);
      ag.fano_bound = fano_lower_bound(ag.mi_bound_nats, cfg.payload_bits);
      report.aggregates.push_back(ag);
    }
  }
  return report;
}

}  // namespace dews
