#include "dews/tune.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

#include "dews/error.hpp"
#include "dews/metrics.hpp"
#include "dews/watermark.hpp"
#include "json_detail.hpp"

namespace dews {

namespace {

using detail::json;

constexpr double kStartStep = 0.2;
constexpr double kMinStep = 0.0125;
constexpr int kRestarts = 3;

constexpr std::uint64_t kImageLane = 1, kPayloadLane = 2, kEditLane = 3;

BandValues clean_profile(BandValues p) {
  for (double& v : p)
    if (std::abs(v) < 1e-12) v = 0.0;
  const double s = p[0] + p[1] + p[2];
  for (double& v : p) v /= s;
  return p;
}

// Cache key on a 1e-9 lattice so that revisiting a point by a different path
// hits the cache.
std::array<long long, 3> lattice(const BandValues& p) {
  return {std::llround(p[0] * 1e9), std::llround(p[1] * 1e9), std::llround(p[2] * 1e9)};
}

}  // namespace

EditConfig high_band_killer() {
  EditConfig e;
  e.name = "high_band_killer";
  e.tag = "global";
  e.mode = EditMode::LinearShrink;
  e.gains = {1.0, 1.0, 0.1};
  e.step_policy = StepPolicy::Proportional;
  return e;
}

void TuneConfig::validate() const {
  auto check = [](bool ok, ErrorCode code, const std::string& msg) { require(ok, code, "tune: " + msg); };
  check(budget >= 20, ErrorCode::InvalidArgument, "budget must be >= 20 evaluations");
  check(std::isfinite(psnr_floor) && psnr_floor >= 30.0, ErrorCode::InvalidArgument, "psnr_floor must be >= 30 dB");
  check(!edit_suite.empty() && !strengths.empty(), ErrorCode::InvalidArgument, "edit suite and strengths must be nonempty");
  check(height >= 8 && width >= 8 && (channels == 1 || channels == 3), ErrorCode::InvalidArgument, "bad image shape");
  check(n_images >= 1 && seeds >= 1 && payload_bits >= 1, ErrorCode::InvalidArgument, "counts must be positive");
  check(ecc_repetition >= 1 && ecc_repetition % 2 == 1, ErrorCode::InvalidArgument, "ecc_repetition must be odd");
  check(workers >= 1, ErrorCode::InvalidArgument, "workers must be >= 1");
  WatermarkKey{key_seed, start}.validate();
  for (const auto& e : edit_suite) e.validate();
  for (double t : strengths) check(t >= 0.0 && t <= 1.0, ErrorCode::InvalidArgument, "strengths must lie in [0, 1]");
  (void)gamma();
}

double TuneConfig::gamma() const {
  const double g = std::pow(10.0, -psnr_floor / 20.0) * (1.0 - 1e-9);
  require(std::isfinite(g) && g > 0.0, ErrorCode::Infeasible,
          "tune: PSNR floor " + std::to_string(psnr_floor) +
              " dB leaves no embedding strength; decoding would sit at the 0.5 BER baseline");
  return g;
}

TuneObjective::TuneObjective(const TuneConfig& cfg, std::uint64_t crn_seed)
    : cfg_(cfg), crn_seed_(crn_seed), sched_(cfg.schedule.build()) {
  cfg_.validate();
  for (int i = 0; i < cfg_.n_images; ++i) {
    auto irng = RngStream::derive(crn_seed_, {static_cast<std::uint64_t>(i), kImageLane});
    images_.push_back(synth_image(cfg_.image_kind, cfg_.height, cfg_.width, irng, cfg_.channels, cfg_.synth));
    auto prng = RngStream::derive(crn_seed_, {static_cast<std::uint64_t>(i), kPayloadLane});
    coded_.push_back(ecc_encode(random_payload(cfg_.payload_bits, prng), cfg_.ecc_repetition));
  }
}

TuneEval TuneObjective::operator()(const BandValues& profile) const {
  TuneEval out;
  const double gamma = cfg_.gamma();
  std::optional<CarrierBank> bank;
  try {
    bank = CarrierBank::make({cfg_.key_seed, profile}, coded_.front().size(), cfg_.height, cfg_.width, cfg_.channels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Capacity && e.code() != ErrorCode::DegenerateBand) throw;
    return out;
  }
  out.feasible = true;
  out.psnr = kInfinity;
  double ber_sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const Image x_w = embed(images_[i], coded_[i], *bank, gamma);
    out.psnr = std::min(out.psnr, psnr(images_[i], x_w));
    for (std::size_t e = 0; e < cfg_.edit_suite.size(); ++e) {
      EditConfig ecfg = cfg_.edit_suite[e];
      for (std::size_t s = 0; s < cfg_.strengths.size(); ++s) {
        ecfg.t_star = cfg_.strengths[s];
        for (int k = 0; k < cfg_.seeds; ++k) {
          auto rng = RngStream::derive(crn_seed_, {i, e, s, static_cast<std::uint64_t>(k), kEditLane});
          const auto outcome = edit(x_w, ecfg, sched_, rng);
          ber_sum += bit_accuracy(decode_bits(decode_soft(outcome.edited, &images_[i], *bank)), coded_[i]).ber;
          ++count;
        }
      }
    }
  }
  out.ber = ber_sum / static_cast<double>(count);
  if (!(out.psnr >= cfg_.psnr_floor)) out.feasible = false;
  return out;
}

TuneResult tune_gains(const TuneConfig& cfg, RngStream& rng) {
  cfg.validate();
  TuneResult result;
  result.crn_seed = rng.next_u64();
  const TuneObjective objective(cfg, result.crn_seed);
  result.gamma = cfg.gamma();

  std::map<std::array<long long, 3>, TuneEval> cache;
  int used = 0;
  bool have_best = false;

  auto evaluate = [&](const BandValues& p, int restart) -> std::optional<TuneEval> {
    const auto key = lattice(p);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    if (used >= cfg.budget) return std::nullopt;
    const TuneEval ev = objective(p);
    ++used;
    cache.emplace(key, ev);
    TraceEntry t;
    t.iteration = used;
    t.restart = restart;
    t.profile = p;
    t.gamma = result.gamma;
    t.ber = ev.ber;
    t.psnr = ev.psnr;
    t.feasible = ev.feasible;
    result.trace.push_back(t);
    if (ev.feasible && (!have_best || ev.ber < result.ber)) {
      have_best = true;
      result.profile = p;
      result.ber = ev.ber;
      result.psnr = ev.psnr;
    }
    return ev;
  };

  // Dirichlet(1, 1, 1) via normalized exponentials.
  BandValues random_start{};
  for (double& v : random_start) v = -std::log(1.0 - rng.uniform());
  random_start = clean_profile(random_start);
  const std::array<BandValues, kRestarts> starts{clean_profile(cfg.start), BandValues{1.0 / 3, 1.0 / 3, 1.0 / 3},
                                                 random_start};

  static constexpr std::array<std::array<int, 2>, 6> kDirs{{{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}}};
  for (int restart = 0; restart < kRestarts && used < cfg.budget; ++restart) {
    BandValues point = starts[restart];
    auto current = evaluate(point, restart);
    if (!current) break;
    double step = kStartStep;
    while (step >= kMinStep && used < cfg.budget) {
      std::optional<BandValues> best_p;
      double best_v = current->feasible ? current->ber : 1.0;
      for (const auto& dir : kDirs) {
        BandValues cand = point;
        cand[dir[0]] += step;
        cand[dir[1]] -= step;
        if (cand[dir[1]] < -1e-12) continue;
        cand = clean_profile(cand);
        auto ev = evaluate(cand, restart);
        if (!ev) break;
        if (ev->feasible && ev->ber < best_v) {
          best_v = ev->ber;
          best_p = cand;
        }
      }
      if (best_p) {
        point = *best_p;
        current = evaluate(point, restart);
      } else {
        step *= 0.5;
      }
    }
  }
  require(have_best, ErrorCode::Infeasible, "tune: no evaluated band profile was feasible");
  return result;
}

std::string trace_csv(const TuneResult& result) {
  std::string out = "iteration,restart,p_low,p_mid,p_high,gamma,ber,psnr,feasible\n";
  char buf[256];
  for (const auto& t : result.trace) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", t.iteration, t.restart,
                  t.profile[0], t.profile[1], t.profile[2], t.gamma, t.ber, t.psnr, t.feasible ? 1 : 0);
    out += buf;
  }
  return out;
}

std::string tune_result_json(const TuneResult& r) {
  json j = {{"profile", r.profile},
            {"gamma", r.gamma},
            {"ber", r.ber},
            {"ba", 1.0 - r.ber},
            {"psnr", detail::number_json(r.psnr)},
            {"evaluations", r.trace.size()},
            {"crn_seed", r.crn_seed}};
  return j.dump(2);
}

TuneConfig parse_tune_config(std::string_view text) {
  const json j = detail::parse_json(text, "tune config");
  detail::check_keys(j,
                     {"edit_suite", "strengths", "psnr_floor", "budget", "height", "width", "channels", "n_images",
                      "seeds", "payload_bits", "ecc_repetition", "key_seed", "start", "image_kind", "synth",
                      "schedule", "workers"},
                     "tune config");
  TuneConfig c;
  try {
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j[key].get<std::remove_reference_t<decltype(out)>>();
    };
    get("strengths", c.strengths);
    get("psnr_floor", c.psnr_floor);
    get("budget", c.budget);
    get("height", c.height);
    get("width", c.width);
    get("channels", c.channels);
    get("n_images", c.n_images);
    get("seeds", c.seeds);
    get("payload_bits", c.payload_bits);
    get("ecc_repetition", c.ecc_repetition);
    get("key_seed", c.key_seed);
    get("workers", c.workers);
    if (j.contains("start")) c.start = detail::band_values_from_json(j["start"], "start");
    if (j.contains("image_kind")) {
      const auto k = parse_synth_kind(j["image_kind"].get<std::string>());
      require(k.has_value(), ErrorCode::Config, "tune: unknown image_kind");
      c.image_kind = *k;
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      detail::check_keys(s, {"spectral_exponent", "contrast", "mean", "channel_correlation"}, "synth");
      if (s.contains("spectral_exponent")) c.synth.spectral_exponent = s["spectral_exponent"].get<double>();
      if (s.contains("contrast")) c.synth.contrast = s["contrast"].get<double>();
      if (s.contains("mean")) c.synth.mean = s["mean"].get<double>();
      if (s.contains("channel_correlation")) c.synth.channel_correlation = s["channel_correlation"].get<double>();
    }
    if (j.contains("schedule")) c.schedule = detail::schedule_from_json(j["schedule"]);
    if (j.contains("edit_suite")) {
      c.edit_suite.clear();
      for (const auto& e : j["edit_suite"]) c.edit_suite.push_back(detail::edit_from_json(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("tune config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("tune config: ") + e.what());
  }
  return c;
}

std::string tune_config_to_json(const TuneConfig& c) {
  json suite = json::array();
  for (const auto& e : c.edit_suite) suite.push_back(detail::edit_json(e));
  json j = {{"edit_suite", suite},
            {"strengths", c.strengths},
            {"psnr_floor", c.psnr_floor},
            {"budget", c.budget},
            {"height", c.height},
            {"width", c.width},
            {"channels", c.channels},
            {"n_images", c.n_images},
            {"seeds", c.seeds},
            {"payload_bits", c.payload_bits},
            {"ecc_repetition", c.ecc_repetition},
            {"key_seed", c.key_seed},
            {"start", c.start},
            {"image_kind", synth_kind_name(c.image_kind)},
            {"synth",
             {{"spectral_exponent", c.synth.spectral_exponent},
              {"contrast", c.synth.contrast},
              {"mean", c.synth.mean},
              {"channel_correlation", c.synth.channel_correlation}}},
            {"schedule", detail::schedule_json(c.schedule)},
            {"workers", c.workers}};
  return j.dump(2);
}

}  // namespace dews
