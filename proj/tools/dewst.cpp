// dewst: command-line front end over the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dews/dews.h"

namespace {

struct Failure {
  int code;
};

void check(dews_status st, const char* what) {
  if (st != DEWS_OK) {
    std::fprintf(stderr, "dewst: %s: %s (%s)\n", what, dews_last_error(), dews_status_name(st));
    throw Failure{st == DEWS_CONFIG ? 2 : 1};
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "dewst: cannot open '%s'\n", path.c_str());
    throw Failure{2};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts either inline JSON or a path to a JSON file.
std::string json_arg(const std::string& v) {
  if (!v.empty() && (v.front() == '{' || v.front() == '[')) return v;
  return slurp(v);
}

struct ImageDel {
  void operator()(dews_image* p) const { dews_image_free(p); }
};
using ImagePtr = std::unique_ptr<dews_image, ImageDel>;
struct BankDel {
  void operator()(dews_bank* p) const { dews_bank_free(p); }
};
using BankPtr = std::unique_ptr<dews_bank, BankDel>;
struct SchedDel {
  void operator()(dews_schedule* p) const { dews_schedule_free(p); }
};
using SchedPtr = std::unique_ptr<dews_schedule, SchedDel>;

std::string take(char* s) {
  std::string out = s ? s : "";
  dews_string_free(s);
  return out;
}

ImagePtr load(const std::string& path) {
  dews_image* img = nullptr;
  check(dews_image_load(path.c_str(), &img), ("load " + path).c_str());
  return ImagePtr(img);
}

SchedPtr schedule(const std::string& spec) {
  dews_schedule* s = nullptr;
  const std::string j = spec.empty() ? std::string() : json_arg(spec);
  check(dews_schedule_new(spec.empty() ? nullptr : j.c_str(), &s), "schedule");
  return SchedPtr(s);
}

struct KeyOpts {
  std::uint64_t seed = 0x5eed;
  std::vector<double> profile{0.1, 0.5, 0.4};
  int bits = 96;
  int ecc = 3;
};

void add_key_opts(CLI::App* app, KeyOpts& k) {
  app->add_option("--key-seed", k.seed, "watermark key seed")->capture_default_str();
  app->add_option("--profile", k.profile, "carrier band energy fractions low mid high")
      ->expected(3)
      ->capture_default_str();
  app->add_option("--bits", k.bits, "payload length L")->capture_default_str();
  app->add_option("--ecc", k.ecc, "repetition factor r")->capture_default_str();
}

BankPtr bank_for(const KeyOpts& k, dews_image* img) {
  size_t h = 0, w = 0, c = 0;
  check(dews_image_shape(img, &h, &w, &c), "image shape");
  dews_bank* b = nullptr;
  check(dews_bank_new(k.seed, k.profile.data(), static_cast<size_t>(k.bits) * k.ecc, h, w, c, &b), "carrier bank");
  return BankPtr(b);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-edit watermark stress test toolkit"};
  app.require_subcommand(1);

  // run
  std::string run_config, run_out, run_format = "csv";
  int run_workers = 0;
  auto* run = app.add_subcommand("run", "run the stress-test protocol");
  run->add_option("--config", run_config, "protocol config JSON")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--format", run_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  run->add_option("--workers", run_workers, "worker threads (0 keeps the config value)");

  // defaults
  auto* defaults = app.add_subcommand("defaults", "print the default protocol and tuner configs");
  std::string defaults_which = "protocol";
  defaults->add_option("which", defaults_which, "protocol or tune")->check(CLI::IsMember({"protocol", "tune"}));

  // synth
  std::string synth_kind = "gaussian_field", synth_out;
  size_t synth_h = 64, synth_w = 64, synth_c = 3;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic image");
  synth->add_option("--kind", synth_kind)->capture_default_str();
  synth->add_option("--height", synth_h)->capture_default_str();
  synth->add_option("--width", synth_w)->capture_default_str();
  synth->add_option("--channels", synth_c)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  // embed
  KeyOpts embed_key;
  std::string embed_in, embed_out, embed_payload;
  double embed_psnr = 40.0, embed_gamma = -1.0;
  auto* embed = app.add_subcommand("embed", "embed a payload");
  embed->add_option("--in", embed_in)->required();
  embed->add_option("--out", embed_out)->required();
  embed->add_option("--payload", embed_payload, "payload as hex")->required();
  embed->add_option("--psnr", embed_psnr, "target PSNR in dB")->capture_default_str();
  embed->add_option("--gamma", embed_gamma, "embedding strength (overrides --psnr)");
  add_key_opts(embed, embed_key);

  // decode
  KeyOpts decode_key;
  std::string decode_in, decode_ref;
  auto* decode = app.add_subcommand("decode", "decode a payload");
  decode->add_option("--in", decode_in)->required();
  decode->add_option("--ref", decode_ref, "original image for informed decoding");
  add_key_opts(decode, decode_key);

  // edit
  std::string edit_in, edit_out, edit_spec, edit_sched, edit_log;
  double edit_t = -1.0;
  std::uint64_t edit_seed = 0;
  auto* editc = app.add_subcommand("edit", "apply the synthetic diffusion edit");
  editc->add_option("--in", edit_in)->required();
  editc->add_option("--out", edit_out)->required();
  editc->add_option("--edit", edit_spec, "edit config JSON (inline or file)");
  editc->add_option("--t-star", edit_t, "override edit strength");
  editc->add_option("--seed", edit_seed)->capture_default_str();
  editc->add_option("--schedule", edit_sched, "schedule JSON (inline or file)");
  editc->add_option("--step-log", edit_log, "write the per-step log CSV here");

  // spectral
  std::string sp_ew, sp_eb, sp_iw, sp_ic;
  double sp_f1 = 0.125, sp_f2 = 0.25;
  auto* spectral = app.add_subcommand("spectral", "per-band retention ratio for one edited pair");
  spectral->add_option("--edited-wm", sp_ew)->required();
  spectral->add_option("--edited-base", sp_eb)->required();
  spectral->add_option("--input-wm", sp_iw)->required();
  spectral->add_option("--input-clean", sp_ic)->required();
  spectral->add_option("--f1", sp_f1)->capture_default_str();
  spectral->add_option("--f2", sp_f2)->capture_default_str();

  // bounds
  std::string bounds_sched;
  double bounds_psnr = 40.0, bounds_gamma = -1.0;
  int bounds_d = 64 * 64 * 3, bounds_L = 96;
  std::vector<double> bounds_t{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  auto* bounds = app.add_subcommand("bounds", "SNR, MI and Fano bounds over a strength sweep");
  bounds->add_option("--schedule", bounds_sched, "schedule JSON (inline or file)");
  bounds->add_option("--psnr", bounds_psnr)->capture_default_str();
  bounds->add_option("--gamma", bounds_gamma, "overrides --psnr");
  bounds->add_option("--d", bounds_d, "dimension")->capture_default_str();
  bounds->add_option("--L", bounds_L, "payload bits")->capture_default_str();
  bounds->add_option("--t-star", bounds_t, "strengths")->capture_default_str();

  // tune
  std::string tune_config, tune_trace, tune_out;
  std::uint64_t tune_seed = 1;
  auto* tune = app.add_subcommand("tune", "tune carrier band fractions against an edit suite");
  tune->add_option("--config", tune_config, "tuner config JSON (defaults when omitted)");
  tune->add_option("--seed", tune_seed)->capture_default_str();
  tune->add_option("--trace", tune_trace, "write the evaluation trace CSV here");
  tune->add_option("--out", tune_out, "write the result JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const std::string cfg = slurp(run_config);
      char* agg = nullptr;
      check(dews_run_protocol(cfg.c_str(), run_out.c_str(), run_format.c_str(), run_workers, &agg), "run");
      std::cout << take(agg);
    } else if (*defaults) {
      char* s = nullptr;
      check(defaults_which == "tune" ? dews_default_tune_json(&s) : dews_default_protocol_json(&s), "defaults");
      std::cout << take(s) << "\n";
    } else if (*synth) {
      dews_image* img = nullptr;
      check(dews_image_synth(synth_kind.c_str(), synth_h, synth_w, synth_c, synth_seed, &img), "synth");
      ImagePtr p(img);
      check(dews_image_save(p.get(), synth_out.c_str()), "save");
    } else if (*embed) {
      auto x = load(embed_in);
      auto bank = bank_for(embed_key, x.get());
      double gamma = embed_gamma;
      if (gamma < 0) check(dews_gamma_for_psnr(embed_psnr, &gamma), "gamma");
      dews_image* out = nullptr;
      check(dews_embed(x.get(), embed_payload.c_str(), embed_key.ecc, bank.get(), gamma, &out), "embed");
      ImagePtr y(out);
      double p = 0;
      check(dews_psnr(x.get(), y.get(), &p), "psnr");
      check(dews_image_save(y.get(), embed_out.c_str()), "save");
      std::printf("gamma %.10g psnr %.4f\n", gamma, p);
    } else if (*decode) {
      auto y = load(decode_in);
      ImagePtr ref;
      if (!decode_ref.empty()) ref = load(decode_ref);
      auto bank = bank_for(decode_key, y.get());
      char* hex = nullptr;
      double score = 0;
      check(dews_decode(y.get(), ref.get(), bank.get(), decode_key.ecc, &hex, &score, nullptr), "decode");
      std::printf("payload %s\ndetect_score %.10g\nmode %s\n", take(hex).c_str(), score,
                  ref ? "informed" : "blind");
    } else if (*editc) {
      auto x = load(edit_in);
      nlohmann::json ej = edit_spec.empty() ? nlohmann::json::object() : nlohmann::json::parse(json_arg(edit_spec));
      if (edit_t >= 0) ej["t_star"] = edit_t;
      auto sched = schedule(edit_sched);
      dews_image* out = nullptr;
      char* log = nullptr;
      check(dews_edit(x.get(), ej.dump().c_str(), sched.get(), edit_seed, &out, edit_log.empty() ? nullptr : &log),
            "edit");
      ImagePtr y(out);
      check(dews_image_save(y.get(), edit_out.c_str()), "save");
      if (!edit_log.empty()) {
        std::ofstream f(edit_log, std::ios::binary);
        f << take(log);
      }
      double p = 0;
      check(dews_psnr(x.get(), y.get(), &p), "psnr");
      std::printf("psnr %.4f\n", p);
    } else if (*spectral) {
      auto ew = load(sp_ew), eb = load(sp_eb), iw = load(sp_iw), ic = load(sp_ic);
      char* csv = nullptr;
      check(dews_spectral_retention(ew.get(), eb.get(), iw.get(), ic.get(), sp_f1, sp_f2, nullptr, &csv), "spectral");
      std::cout << take(csv);
    } else if (*bounds) {
      auto sched = schedule(bounds_sched);
      double gamma = bounds_gamma;
      if (gamma < 0) check(dews_gamma_for_psnr(bounds_psnr, &gamma), "gamma");
      char* csv = nullptr;
      check(dews_bounds_table(sched.get(), gamma, bounds_d, bounds_L, bounds_t.data(), bounds_t.size(), &csv),
            "bounds");
      std::cout << take(csv);
    } else if (*tune) {
      const std::string cfg = tune_config.empty() ? std::string() : json_arg(tune_config);
      char* result = nullptr;
      check(dews_tune(tune_config.empty() ? nullptr : cfg.c_str(), tune_seed,
                      tune_trace.empty() ? nullptr : tune_trace.c_str(), &result),
            "tune");
      const std::string r = take(result);
      if (!tune_out.empty()) {
        std::ofstream f(tune_out, std::ios::binary);
        f << r << "\n";
      }
      std::cout << r << "\n";
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "dewst: bad JSON: %s\n", e.what());
    return 2;
  }
  return 0;
}
