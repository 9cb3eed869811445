#include "dews/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dews/error.hpp"
#include "json_detail.hpp"

namespace dews {

namespace detail {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, std::string(what) + ": " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* what) {
  require(j.is_object(), ErrorCode::Config, std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    require(ok, ErrorCode::Config, std::string(what) + ": unknown field '" + item.key() + "'");
  }
}

namespace {

template <typename T>
T get(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string(what) + "." + key + ": " + e.what());
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out, const char* what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

}  // namespace

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorCode::Format, "expected a number, got " + j.dump());
}

json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

BandValues band_values_from_json(const json& j, const char* what) {
  require(j.is_array() && j.size() == 3, ErrorCode::Config, std::string(what) + " must be an array of 3 numbers");
  BandValues v{};
  for (int i = 0; i < 3; ++i) {
    require(j[i].is_number(), ErrorCode::Config, std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

BandPartition partition_from_json(const json& j) {
  BandPartition p;
  if (j.is_array()) {
    require(j.size() == 2 && j[0].is_number() && j[1].is_number(), ErrorCode::Config,
            "band_edges must be [f1, f2]");
    p.f1 = j[0].get<double>();
    p.f2 = j[1].get<double>();
  } else {
    check_keys(j, {"f1", "f2"}, "band_edges");
    maybe(j, "f1", p.f1, "band_edges");
    maybe(j, "f2", p.f2, "band_edges");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  return p;
}

json partition_json(const BandPartition& p) { return json::array({p.f1, p.f2}); }

ScheduleConfig schedule_from_json(const json& j) {
  check_keys(j, {"kind", "beta_start", "beta_end", "T"}, "schedule");
  ScheduleConfig s;
  if (j.contains("kind")) s.kind = parse_schedule_kind(get<std::string>(j, "kind", "schedule"));
  maybe(j, "beta_start", s.beta_start, "schedule");
  maybe(j, "beta_end", s.beta_end, "schedule");
  maybe(j, "T", s.steps, "schedule");
  try {
    (void)s.build();
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("schedule: ") + e.what());
  }
  return s;
}

json schedule_json(const ScheduleConfig& s) {
  return {{"kind", schedule_kind_name(s.kind)}, {"beta_start", s.beta_start}, {"beta_end", s.beta_end}, {"T", s.steps}};
}

EditConfig edit_from_json(const json& j) {
  check_keys(j,
             {"name", "tag", "mode", "t_star", "n_steps", "step_policy", "gains", "band_edges", "anchor", "kappa",
              "mask"},
             "edit");
  EditConfig e;
  maybe(j, "name", e.name, "edit");
  maybe(j, "tag", e.tag, "edit");
  if (j.contains("mode")) e.mode = parse_edit_mode(get<std::string>(j, "mode", "edit"));
  maybe(j, "t_star", e.t_star, "edit");
  maybe(j, "n_steps", e.n_steps, "edit");
  if (j.contains("step_policy")) e.step_policy = parse_step_policy(get<std::string>(j, "step_policy", "edit"));
  if (j.contains("gains")) e.gains = band_values_from_json(j["gains"], "edit.gains");
  if (j.contains("band_edges")) e.partition = partition_from_json(j["band_edges"]);
  maybe(j, "anchor", e.anchor, "edit");
  maybe(j, "kappa", e.kappa, "edit");
  if (j.contains("mask") && !j["mask"].is_null()) {
    const auto& m = j["mask"];
    MaskRect r;
    if (m.is_array()) {
      require(m.size() == 4, ErrorCode::Config, "edit.mask must be [y0, x0, y1, x1]");
      r = {m[0].get<double>(), m[1].get<double>(), m[2].get<double>(), m[3].get<double>()};
    } else {
      check_keys(m, {"y0", "x0", "y1", "x1"}, "edit.mask");
      maybe(m, "y0", r.y0, "edit.mask");
      maybe(m, "x0", r.x0, "edit.mask");
      maybe(m, "y1", r.y1, "edit.mask");
      maybe(m, "x1", r.x1, "edit.mask");
    }
    e.mask_rect = r;
  }
  try {
    e.validate();
  } catch (const Error& err) {
    fail(ErrorCode::Config, err.what());
  }
  return e;
}

json edit_json(const EditConfig& e) {
  json j = {{"name", e.name},
            {"tag", e.tag},
            {"mode", edit_mode_name(e.mode)},
            {"t_star", e.t_star},
            {"n_steps", e.n_steps},
            {"step_policy", step_policy_name(e.step_policy)},
            {"gains", e.gains},
            {"band_edges", partition_json(e.partition)},
            {"anchor", e.anchor},
            {"kappa", e.kappa}};
  if (e.mask_rect) j["mask"] = {e.mask_rect->y0, e.mask_rect->x0, e.mask_rect->y1, e.mask_rect->x1};
  else j["mask"] = nullptr;
  return j;
}

}  // namespace detail

using detail::json;

NoiseSchedule ScheduleConfig::build() const { return NoiseSchedule::make(kind, beta_start, beta_end, steps); }

std::vector<EditConfig> default_edit_suite() {
  EditConfig global;
  global.name = "global";
  global.tag = "global";
  global.step_policy = StepPolicy::Proportional;

  EditConfig local = global;
  local.name = "local";
  local.tag = "local";
  local.mask_rect = MaskRect{};

  EditConfig resynth = global;
  resynth.name = "resynth";
  resynth.tag = "resynth";
  resynth.mode = EditMode::Resynth;
  return {global, local, resynth};
}

double ProtocolConfig::effective_gamma() const { return gamma ? *gamma : gamma_for_psnr(target_psnr_db); }

void ProtocolConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::Config, msg); };
  check(n_images >= 1, "n_images must be >= 1");
  check(!image_source.empty(), "image_source must not be empty");
  check(height >= 8 && width >= 8, "height and width must be >= 8");
  check(channels == 1 || channels == 3, "channels must be 1 or 3");
  check(!edit_suite.empty(), "edit_suite must not be empty");
  check(!strengths.empty(), "strengths must not be empty");
  for (double t : strengths) check(std::isfinite(t) && t >= 0.0 && t <= 1.0, "strengths must lie in [0, 1]");
  check(seeds_per_instruction >= 1, "seeds_per_instruction must be >= 1");
  check(payload_bits >= 1, "payload_bits must be >= 1");
  check(ecc_repetition >= 1 && ecc_repetition % 2 == 1, "ecc_repetition must be odd");
  check(16 * coded_bits() <= height * width * channels,
        "payload_bits * ecc_repetition exceeds carrier capacity d/16 at this image size");
  const double g = effective_gamma();
  check(std::isfinite(g) && g >= 0.0, "gamma must be finite and >= 0");
  check(workers >= 1, "workers must be >= 1");
  try {
    key.validate();
    band_edges.validate();
    (void)schedule.build();
    for (const auto& e : edit_suite) e.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  for (double f : key.band_profile)
    check(f > 0.0, "key.band_profile entries must be positive: every band needs watermark energy for retention ratios");
}

namespace {

ProtocolConfig protocol_from_json(const json& j) {
  detail::check_keys(j,
                     {"n_images", "image_source", "synth", "height", "width", "channels", "edit_suite", "strengths",
                      "seeds_per_instruction", "payload_bits", "ecc_repetition", "gamma", "target_psnr_db",
                      "master_seed", "key", "schedule", "band_edges", "workers"},
                     "protocol config");
  ProtocolConfig c;
  auto num = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, std::string(key) + ": " + e.what());
    }
  };
  num("n_images", c.n_images);
  num("image_source", c.image_source);
  num("height", c.height);
  num("width", c.width);
  num("channels", c.channels);
  num("seeds_per_instruction", c.seeds_per_instruction);
  num("payload_bits", c.payload_bits);
  num("ecc_repetition", c.ecc_repetition);
  num("target_psnr_db", c.target_psnr_db);
  num("master_seed", c.master_seed);
  num("workers", c.workers);
  num("strengths", c.strengths);
  if (j.contains("gamma") && !j["gamma"].is_null()) {
    double g = 0.0;
    num("gamma", g);
    c.gamma = g;
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::check_keys(s, {"spectral_exponent", "contrast", "mean", "channel_correlation"}, "synth");
    auto sn = [&](const char* key, double& out) {
      if (s.contains(key)) out = s[key].get<double>();
    };
    sn("spectral_exponent", c.synth.spectral_exponent);
    sn("contrast", c.synth.contrast);
    sn("mean", c.synth.mean);
    sn("channel_correlation", c.synth.channel_correlation);
  }
  if (j.contains("edit_suite")) {
    require(j["edit_suite"].is_array(), ErrorCode::Config, "edit_suite must be an array");
    c.edit_suite.clear();
    for (const auto& e : j["edit_suite"]) c.edit_suite.push_back(detail::edit_from_json(e));
  }
  if (j.contains("key")) {
    const auto& k = j["key"];
    detail::check_keys(k, {"seed", "band_profile"}, "key");
    if (k.contains("seed")) c.key.seed = k["seed"].get<std::uint64_t>();
    if (k.contains("band_profile")) c.key.band_profile = detail::band_values_from_json(k["band_profile"], "key.band_profile");
  }
  if (j.contains("schedule")) c.schedule = detail::schedule_from_json(j["schedule"]);
  if (j.contains("band_edges")) c.band_edges = detail::partition_from_json(j["band_edges"]);
  c.validate();
  return c;
}

}  // namespace

ProtocolConfig parse_protocol(std::string_view text) {
  const json j = detail::parse_json(text, "protocol config");
  try {
    return protocol_from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("protocol config: ") + e.what());
  }
}

std::string protocol_to_json(const ProtocolConfig& c) {
  json suite = json::array();
  for (const auto& e : c.edit_suite) suite.push_back(detail::edit_json(e));
  json j = {{"n_images", c.n_images},
            {"image_source", c.image_source},
            {"synth",
             {{"spectral_exponent", c.synth.spectral_exponent},
              {"contrast", c.synth.contrast},
              {"mean", c.synth.mean},
              {"channel_correlation", c.synth.channel_correlation}}},
            {"height", c.height},
            {"width", c.width},
            {"channels", c.channels},
            {"edit_suite", suite},
            {"strengths", c.strengths},
            {"seeds_per_instruction", c.seeds_per_instruction},
            {"payload_bits", c.payload_bits},
            {"ecc_repetition", c.ecc_repetition},
            {"gamma", c.gamma ? json(*c.gamma) : json(nullptr)},
            {"target_psnr_db", c.target_psnr_db},
            {"master_seed", c.master_seed},
            {"key", {{"seed", c.key.seed}, {"band_profile", c.key.band_profile}}},
            {"schedule", detail::schedule_json(c.schedule)},
            {"band_edges", detail::partition_json(c.band_edges)},
            {"workers", c.workers}};
  return j.dump(2);
}

EditConfig parse_edit(std::string_view text) {
  const json j = detail::parse_json(text, "edit config");
  try {
    return detail::edit_from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("edit config: ") + e.what());
  }
}

std::string edit_to_json(const EditConfig& cfg) { return detail::edit_json(cfg).dump(2); }

ScheduleConfig parse_schedule(std::string_view text) {
  return detail::schedule_from_json(detail::parse_json(text, "schedule"));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dews
