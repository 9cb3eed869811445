#include "dews/dews.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "dews/config.hpp"
#include "dews/edit_kernel.hpp"
#include "dews/error.hpp"
#include "dews/harness.hpp"
#include "dews/image_io.hpp"
#include "dews/metrics.hpp"
#include "dews/report.hpp"
#include "dews/schedule.hpp"
#include "dews/spectral.hpp"
#include "dews/synth.hpp"
#include "dews/theory.hpp"
#include "dews/tune.hpp"
#include "dews/watermark.hpp"

struct dews_image {
  dews::Image img;
};
struct dews_bank {
  dews::CarrierBank bank;
};
struct dews_schedule {
  dews::NoiseSchedule sched;
};

namespace {

thread_local std::string g_last_error;

dews_status to_status(dews::ErrorCode code) {
  switch (code) {
    case dews::ErrorCode::InvalidArgument: return DEWS_INVALID_ARGUMENT;
    case dews::ErrorCode::OutOfRange: return DEWS_OUT_OF_RANGE;
    case dews::ErrorCode::ShapeMismatch: return DEWS_SHAPE_MISMATCH;
    case dews::ErrorCode::Io: return DEWS_IO;
    case dews::ErrorCode::Format: return DEWS_FORMAT;
    case dews::ErrorCode::Capacity: return DEWS_CAPACITY;
    case dews::ErrorCode::DegenerateBand: return DEWS_DEGENERATE_BAND;
    case dews::ErrorCode::Config: return DEWS_CONFIG;
    case dews::ErrorCode::Infeasible: return DEWS_INFEASIBLE;
  }
  return DEWS_INTERNAL;
}

template <typename Fn>
dews_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DEWS_OK;
  } catch (const dews::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DEWS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DEWS_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DEWS_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) dews::fail(dews::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int info_length(const dews::CarrierBank& bank, int ecc_r) {
  if (ecc_r < 1 || ecc_r % 2 == 0)
    dews::fail(dews::ErrorCode::InvalidArgument, "ecc_r must be a positive odd number");
  if (bank.count() % static_cast<std::size_t>(ecc_r) != 0)
    dews::fail(dews::ErrorCode::InvalidArgument, "carrier count is not a multiple of ecc_r");
  return static_cast<int>(bank.count() / ecc_r);
}

}  // namespace

extern "C" {

const char* dews_version(void) { return "0.1.0"; }

const char* dews_last_error(void) { return g_last_error.c_str(); }

const char* dews_status_name(dews_status status) {
  switch (status) {
    case DEWS_OK: return "ok";
    case DEWS_INVALID_ARGUMENT: return "invalid argument";
    case DEWS_OUT_OF_RANGE: return "out of range";
    case DEWS_SHAPE_MISMATCH: return "shape mismatch";
    case DEWS_IO: return "i/o error";
    case DEWS_FORMAT: return "format error";
    case DEWS_CAPACITY: return "capacity exceeded";
    case DEWS_DEGENERATE_BAND: return "degenerate band";
    case DEWS_CONFIG: return "configuration error";
    case DEWS_INFEASIBLE: return "infeasible";
    case DEWS_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void dews_string_free(char* s) { std::free(s); }

dews_status dews_image_new(size_t h, size_t w, size_t c, const double* data, dews_image** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    dews::Image img(h, w, c);
    if (data) std::memcpy(img.data().data(), data, img.size() * sizeof(double));
    *out = new dews_image{std::move(img)};
  });
}

dews_status dews_image_synth(const char* kind, size_t h, size_t w, size_t c, uint64_t seed, dews_image** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    *out = nullptr;
    const auto k = dews::parse_synth_kind(kind);
    if (!k) dews::fail(dews::ErrorCode::InvalidArgument, std::string("unknown image kind '") + kind + "'");
    auto rng = dews::RngStream::derive(seed, {});
    *out = new dews_image{dews::synth_image(*k, h, w, rng, c)};
  });
}

dews_status dews_image_load(const char* path, dews_image** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new dews_image{dews::load_image(path)};
  });
}

dews_status dews_image_save(const dews_image* img, const char* path) {
  return guard([&] {
    need(img, "img");
    need(path, "path");
    dews::save_image(img->img, path);
  });
}

dews_status dews_image_save_png(const dews_image* img, const char* path, int bit_depth) {
  return guard([&] {
    need(img, "img");
    need(path, "path");
    dews::save_png(img->img, path, bit_depth);
  });
}

void dews_image_free(dews_image* img) { delete img; }

dews_status dews_image_shape(const dews_image* img, size_t* h, size_t* w, size_t* c) {
  return guard([&] {
    need(img, "img");
    if (h) *h = img->img.height();
    if (w) *w = img->img.width();
    if (c) *c = img->img.channels();
  });
}

dews_status dews_image_data(const dews_image* img, const double** data, size_t* len) {
  return guard([&] {
    need(img, "img");
    need(data, "data");
    *data = img->img.data().data();
    if (len) *len = img->img.size();
  });
}

dews_status dews_psnr(const dews_image* a, const dews_image* b, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = dews::psnr(a->img, b->img);
  });
}

dews_status dews_ssim(const dews_image* a, const dews_image* b, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = dews::ssim(a->img, b->img);
  });
}

dews_status dews_schedule_new(const char* schedule_json, dews_schedule** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    const dews::ScheduleConfig cfg = schedule_json ? dews::parse_schedule(schedule_json) : dews::ScheduleConfig{};
    *out = new dews_schedule{cfg.build()};
  });
}

dews_status dews_schedule_steps(const dews_schedule* s, int* out) {
  return guard([&] {
    need(s, "schedule");
    need(out, "out");
    *out = s->sched.steps();
  });
}

dews_status dews_schedule_alpha_bar(const dews_schedule* s, int t, double* out) {
  return guard([&] {
    need(s, "schedule");
    need(out, "out");
    *out = s->sched.alpha_bar(t);
  });
}

dews_status dews_schedule_start_step(const dews_schedule* s, double t_star, int* out) {
  return guard([&] {
    need(s, "schedule");
    need(out, "out");
    *out = s->sched.start_step(t_star);
  });
}

void dews_schedule_free(dews_schedule* s) { delete s; }

dews_status dews_bank_new(uint64_t key_seed, const double profile[3], size_t count, size_t h, size_t w, size_t c,
                          dews_bank** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    dews::WatermarkKey key;
    key.seed = key_seed;
    if (profile) key.band_profile = {profile[0], profile[1], profile[2]};
    *out = new dews_bank{dews::CarrierBank::make(key, count, h, w, c)};
  });
}

dews_status dews_bank_count(const dews_bank* bank, size_t* out) {
  return guard([&] {
    need(bank, "bank");
    need(out, "out");
    *out = bank->bank.count();
  });
}

dews_status dews_bank_gram_offdiag_max(const dews_bank* bank, double* out) {
  return guard([&] {
    need(bank, "bank");
    need(out, "out");
    *out = bank->bank.gram_offdiag_max();
  });
}

void dews_bank_free(dews_bank* bank) { delete bank; }

dews_status dews_embed(const dews_image* x, const char* payload_hex, int ecc_r, const dews_bank* bank, double gamma,
                       dews_image** out) {
  return guard([&] {
    need(x, "x");
    need(payload_hex, "payload_hex");
    need(bank, "bank");
    need(out, "out");
    *out = nullptr;
    const int L = info_length(bank->bank, ecc_r);
    const auto coded = dews::ecc_encode(dews::hex_to_bits(payload_hex, static_cast<std::size_t>(L)), ecc_r);
    *out = new dews_image{dews::embed(x->img, coded, bank->bank, gamma)};
  });
}

dews_status dews_decode(const dews_image* y, const dews_image* x_ref, const dews_bank* bank, int ecc_r,
                        char** payload_hex, double* detect_score, double* scores) {
  return guard([&] {
    need(y, "y");
    need(bank, "bank");
    info_length(bank->bank, ecc_r);
    const auto s = dews::decode_soft(y->img, x_ref ? &x_ref->img : nullptr, bank->bank);
    if (scores) std::memcpy(scores, s.data(), s.size() * sizeof(double));
    if (detect_score) *detect_score = dews::detect_score(s, bank->bank);
    if (payload_hex) *payload_hex = dup_string(dews::bits_to_hex(dews::ecc_decode(dews::decode_bits(s), ecc_r).bits));
  });
}

dews_status dews_edit(const dews_image* x, const char* edit_json, const dews_schedule* sched, uint64_t seed,
                      dews_image** out, char** step_log_csv) {
  return guard([&] {
    need(x, "x");
    need(edit_json, "edit_json");
    need(out, "out");
    *out = nullptr;
    const auto cfg = dews::parse_edit(edit_json);
    const dews::NoiseSchedule s = sched ? sched->sched : dews::NoiseSchedule::protocol_default();
    auto rng = dews::RngStream::derive(seed, {});
    auto outcome = dews::edit(x->img, cfg, s, rng, step_log_csv != nullptr);
    if (step_log_csv) *step_log_csv = dup_string(dews::step_log_csv(outcome.log));
    *out = new dews_image{std::move(outcome.edited)};
  });
}

dews_status dews_band_energies(const dews_image* residual, double f1, double f2, double out[3]) {
  return guard([&] {
    need(residual, "residual");
    need(out, "out");
    const auto e = dews::band_energies(residual->img, {f1, f2});
    for (int i = 0; i < 3; ++i) out[i] = e[i];
  });
}

dews_status dews_spectral_retention(const dews_image* edited_wm, const dews_image* edited_base,
                                    const dews_image* input_wm, const dews_image* input_clean, double f1, double f2,
                                    double rho[3], char** band_csv) {
  return guard([&] {
    need(edited_wm, "edited_wm");
    need(edited_base, "edited_base");
    need(input_wm, "input_wm");
    need(input_clean, "input_clean");
    const dews::RetentionSample sample{edited_wm->img, edited_base->img, input_wm->img, input_clean->img};
    const auto r = dews::spectral_retention(std::span(&sample, 1), {f1, f2});
    if (rho)
      for (int i = 0; i < 3; ++i) rho[i] = r.rho[i];
    if (band_csv) *band_csv = dup_string(dews::band_report_csv(r));
  });
}

dews_status dews_snr(double alpha_bar, double gamma, double* out) {
  return guard([&] {
    need(out, "out");
    *out = dews::snr_from_alpha_bar(alpha_bar, gamma);
  });
}

dews_status dews_mi_upper_bound(int d, double gamma, double alpha_bar, double* out) {
  return guard([&] {
    need(out, "out");
    *out = dews::mi_upper_bound(d, gamma, alpha_bar);
  });
}

dews_status dews_fano_lower_bound(double mi_nats, int L, double* out) {
  return guard([&] {
    need(out, "out");
    *out = dews::fano_lower_bound(mi_nats, L);
  });
}

dews_status dews_gamma_for_psnr(double psnr_db, double* out) {
  return guard([&] {
    need(out, "out");
    *out = dews::gamma_for_psnr(psnr_db);
  });
}

dews_status dews_bounds_table(const dews_schedule* sched, double gamma, int d, int L, const double* t_stars, size_t n,
                              char** csv) {
  return guard([&] {
    need(sched, "schedule");
    need(csv, "csv");
    if (n) need(t_stars, "t_stars");
    std::string out = "t_star,start_step,alpha_bar,snr,mi_bound_nats,mi_bound_bits,fano_bound\n";
    for (size_t i = 0; i < n; ++i) {
      const int step = sched->sched.start_step(t_stars[i]);
      const double ab = sched->sched.alpha_bar(step);
      const double snr = dews::snr_theoretical(sched->sched, step, gamma);
      const double mi = dews::mi_upper_bound(d, gamma, ab);
      out += dews::format_number(t_stars[i]) + "," + std::to_string(step) + "," + dews::format_number(ab) + "," +
             dews::format_number(snr) + "," + dews::format_number(mi) + "," +
             dews::format_number(dews::nats_to_bits(mi)) + "," +
             dews::format_number(dews::fano_lower_bound(mi, L)) + "\n";
    }
    *csv = dup_string(out);
  });
}

dews_status dews_default_protocol_json(char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup_string(dews::protocol_to_json(dews::ProtocolConfig{}));
  });
}

dews_status dews_run_protocol(const char* config_json, const char* out_dir, const char* format, int workers,
                              char** aggregates_csv) {
  return guard([&] {
    need(config_json, "config_json");
    need(out_dir, "out_dir");
    auto cfg = dews::parse_protocol(config_json);
    if (workers > 0) cfg.workers = workers;
    const auto fmt = dews::parse_report_format(format ? format : "csv");
    const auto report = dews::run_dewst(cfg);
    dews::emit_report(report, fmt, out_dir);
    if (aggregates_csv) *aggregates_csv = dup_string(dews::aggregates_csv(report));
  });
}

dews_status dews_default_tune_json(char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup_string(dews::tune_config_to_json(dews::TuneConfig{}));
  });
}

dews_status dews_tune(const char* config_json, uint64_t seed, const char* trace_csv_path, char** result_json) {
  return guard([&] {
    need(result_json, "result_json");
    const dews::TuneConfig cfg = config_json ? dews::parse_tune_config(config_json) : dews::TuneConfig{};
    auto rng = dews::RngStream::derive(seed, {});
    const auto result = dews::tune_gains(cfg, rng);
    if (trace_csv_path) {
      std::ofstream f(trace_csv_path, std::ios::binary);
      if (!f) dews::fail(dews::ErrorCode::Io, std::string("cannot write '") + trace_csv_path + "'");
      f << dews::trace_csv(result);
    }
    *result_json = dup_string(dews::tune_result_json(result));
  });
}

}  // extern "C"
