#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dews/config.hpp"
#include "dews/harness.hpp"
#include "dews/image_io.hpp"
#include "dews/report.hpp"
#include "dews/theory.hpp"
#include "helpers.hpp"

using namespace dews;
using testing::error_code_of;

namespace {

ProtocolConfig small_config() {
  ProtocolConfig c;
  c.n_images = 2;
  c.height = c.width = 32;
  c.payload_bits = 16;
  c.edit_suite = {default_edit_suite().front()};
  c.strengths = {0.2, 0.8};
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("defaults mirror the protocol table") {
  const ProtocolConfig c;
  CHECK(c.strengths == std::vector<double>{0.2, 0.4, 0.6, 0.8});
  CHECK(c.seeds_per_instruction == 3);
  CHECK(c.payload_bits == 96);
  CHECK(c.ecc_repetition == 3);
  CHECK(c.target_psnr_db == 40.0);
  CHECK(c.effective_gamma() == doctest::Approx(0.01));
  CHECK(c.coded_bits() == 288);
  REQUIRE(c.edit_suite.size() == 3);
  CHECK(c.edit_suite[0].tag == "global");
  CHECK(c.edit_suite[1].tag == "local");
  CHECK(c.edit_suite[1].mask_rect.has_value());
  CHECK(c.edit_suite[2].mode == EditMode::Resynth);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("row count, canonical order and per-row theory columns") {
  const auto cfg = small_config();
  const auto rep = run_dewst(cfg);
  REQUIRE(rep.rows.size() == 12);
  CHECK(rep.clean.size() == 2);
  CHECK(rep.aggregates.size() == 2);
  const auto sched = cfg.schedule.build();
  std::size_t k = 0;
  for (int i = 0; i < 2; ++i)
    for (int s = 0; s < 2; ++s)
      for (int seed = 0; seed < 3; ++seed, ++k) {
        const auto& r = rep.rows[k];
        CHECK(r.image_idx == i);
        CHECK(r.strength_idx == s);
        CHECK(r.seed_idx == seed);
        CHECK(r.start_step == sched.start_step(cfg.strengths[s]));
        CHECK(r.alpha_bar == sched.alpha_bar(r.start_step));
        CHECK(r.snr_theory == doctest::Approx(snr_theoretical(sched, r.start_step, rep.gamma)));
        CHECK(r.mi_bound_nats == doctest::Approx(mi_upper_bound(32 * 32 * 3, rep.gamma, r.alpha_bar)));
        CHECK(r.fano_bound == doctest::Approx(fano_lower_bound(r.mi_bound_nats, 16)));
        CHECK(r.psnr_wm == doctest::Approx(40.0).epsilon(1e-9));
        CHECK(r.ba + r.ber == doctest::Approx(1.0));
        CHECK(r.payload_hex.size() == 4);
      }
  // the same image shares its payload across edits and seeds
  CHECK(rep.rows[0].payload_hex == rep.rows[5].payload_hex);
  CHECK(rep.rows[0].payload_hex == rep.clean[0].payload_hex);
  for (const auto& c : rep.clean) CHECK(c.ba == 1.0);
}

TEST_CASE("identity suite keeps every bit") {
  auto cfg = small_config();
  EditConfig id;
  id.name = id.tag = "identity";
  id.mode = EditMode::Identity;
  cfg.edit_suite = {id};
  const auto rep = run_dewst(cfg);
  for (const auto& a : rep.aggregates) {
    CHECK(a.ba_mean >= 0.99);
    CHECK(a.msg_acc == 1.0);
    CHECK(a.auc == 1.0);
    CHECK(a.rho_low == doctest::Approx(1.0));
    CHECK(a.rho_high == doctest::Approx(1.0));
  }
}

TEST_CASE("empirical post-noising SNR matches theory within three standard errors") {
  auto cfg = small_config();
  cfg.n_images = 6;
  const auto rep = run_dewst(cfg);
  for (const auto& a : rep.aggregates) CHECK(std::abs(a.snr_empirical_mean - a.snr_theory) <= 3 * a.snr_empirical_stderr);
}

TEST_CASE("reports are identical for any worker count") {
  auto cfg = small_config();
  cfg.n_images = 3;
  const auto a = run_dewst(cfg);
  cfg.workers = 3;
  const auto b = run_dewst(cfg);
  CHECK(rows_csv(a.rows) == rows_csv(b.rows));
  CHECK(aggregates_csv(a) == aggregates_csv(b));
  CHECK(clean_csv(a.clean) == clean_csv(b.clean));
  cfg.master_seed += 1;
  CHECK(rows_csv(run_dewst(cfg).rows) != rows_csv(a.rows));
}

TEST_CASE("report emission and round trips") {
  const auto rep = run_dewst(small_config());
  const auto dir = testing::temp_dir("report");
  emit_report(rep, ReportFormat::Csv, dir / "csv");
  const auto rows = slurp(dir / "csv" / "rows.csv");
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 13);
  CHECK(rows.rfind("image_idx,edit_idx,edit_name,strength_idx,t_star,seed_idx,start_step,alpha_bar,ba,ber,", 0) == 0);
  CHECK(std::filesystem::exists(dir / "csv" / "aggregates.csv"));
  CHECK(std::filesystem::exists(dir / "csv" / "clean.csv"));

  emit_report(rep, ReportFormat::Json, dir / "json");
  const auto from_json = read_report_json(dir / "json" / "report.json");
  CHECK(from_json.gamma == rep.gamma);
  REQUIRE(from_json.rows.size() == rep.rows.size());
  CHECK(rows_csv(from_json.rows) == rows_csv(rep.rows));
  CHECK(aggregates_csv(from_json) == aggregates_csv(rep));

  // json -> csv -> json
  emit_report(from_json, ReportFormat::Csv, dir / "csv2");
  const auto from_csv = read_report_csv(dir / "csv2");
  CHECK(report_json(from_csv) == report_json(rep));
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(std::abs(from_csv.rows[i].snr_empirical - rep.rows[i].snr_empirical) <= 1e-12 * rep.rows[i].snr_empirical);
    CHECK(from_csv.rows[i].decoded_hex == rep.rows[i].decoded_hex);
  }

  StressReport empty;
  emit_report(empty, ReportFormat::Csv, dir / "empty");
  const auto e = slurp(dir / "empty" / "rows.csv");
  CHECK(std::count(e.begin(), e.end(), '\n') == 1);
  CHECK(parse_rows_csv(e).empty());

  CHECK(error_code_of([] { parse_rows_csv("a,b\n1,2\n"); }) == ErrorCode::Format);
  CHECK(error_code_of([&] { emit_report(rep, ReportFormat::Csv, dir / "csv" / "rows.csv" / "x"); }) == ErrorCode::Io);
  CHECK(parse_report_format("json") == ReportFormat::Json);
  CHECK(format_number(kInfinity) == "inf");
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("CSV quoting survives odd edit names") {
  auto cfg = small_config();
  cfg.n_images = 1;
  cfg.strengths = {0.2};
  cfg.seeds_per_instruction = 1;
  cfg.edit_suite[0].name = "shrink, \"mild\"";
  const auto rep = run_dewst(cfg);
  const auto back = parse_rows_csv(rows_csv(rep.rows));
  CHECK(back[0].edit_name == "shrink, \"mild\"");
}

TEST_CASE("config parsing") {
  const auto c = parse_protocol(R"({"n_images": 5, "strengths": [0.1, 0.9], "gamma": 0.02,
    "schedule": {"kind": "linear", "beta_start": 0.0001, "beta_end": 0.2, "T": 50},
    "edit_suite": [{"name": "a", "mode": "resynth", "gains": [1, 0.5, 0.25], "mask": [0, 0, 0.5, 1]}],
    "key": {"seed": 9, "band_profile": [0.2, 0.3, 0.5]}, "band_edges": [0.1, 0.3]})");
  CHECK(c.n_images == 5);
  CHECK(c.effective_gamma() == 0.02);
  CHECK(c.schedule.kind == ScheduleKind::Linear);
  CHECK(c.schedule.steps == 50);
  CHECK(c.edit_suite[0].mode == EditMode::Resynth);
  CHECK(c.edit_suite[0].mask_rect->y1 == 0.5);
  CHECK(c.key.seed == 9);
  CHECK(c.band_edges.f2 == 0.3);

  // serialization is a fixed point
  const auto text = protocol_to_json(c);
  CHECK(protocol_to_json(parse_protocol(text)) == text);
  CHECK(protocol_to_json(parse_protocol(protocol_to_json(ProtocolConfig{}))) == protocol_to_json(ProtocolConfig{}));

  for (const char* bad : {R"({"n_images": 0})", R"({"bogus": 1})", R"({"strengths": []})", R"({"edit_suite": []})",
                          R"({"ecc_repetition": 2})", R"({"payload_bits": 1000})", R"({"n_images": "two"})",
                          R"({"schedule": {"kind": "sigmoid"}})", R"({"key": {"band_profile": [0, 0.5, 0.5]}})",
                          R"({"edit_suite": [{"gains": [1, 1, 2]}]})", R"({"edit_suite": [{"mode": "blur"}]})",
                          R"([1, 2])", "{not json"})
    CHECK_MESSAGE(error_code_of([&] { parse_protocol(bad); }) == ErrorCode::Config, bad);

  const auto e = parse_edit(R"({"name": "x", "t_star": 0.3, "step_policy": "proportional"})");
  CHECK(e.t_star == 0.3);
  CHECK(e.step_policy == StepPolicy::Proportional);
  CHECK(parse_edit(edit_to_json(e)).t_star == 0.3);
  const auto s = parse_schedule(R"({"kind": "cosine", "T": 20})");
  CHECK(s.build().steps() == 20);
}

TEST_CASE("images from a directory") {
  const auto dir = testing::temp_dir("imgdir");
  for (int i = 0; i < 3; ++i) save_raw(Image(32, 32, 3, 0.1 * (i + 1)), dir / ("img" + std::to_string(i) + ".dws"));
  std::ofstream(dir / "notes.txt") << "ignored";
  auto cfg = small_config();
  cfg.image_source = dir.string();
  cfg.n_images = 2;
  const auto imgs = protocol_images(cfg);
  REQUIRE(imgs.size() == 2);
  CHECK(imgs[0].data()[0] == doctest::Approx(0.1f));
  CHECK(imgs[1].data()[0] == doctest::Approx(0.2f));
  cfg.n_images = 4;
  CHECK(error_code_of([&] { protocol_images(cfg); }) == ErrorCode::Config);
  cfg.n_images = 2;
  cfg.height = 16;
  CHECK(error_code_of([&] { protocol_images(cfg); }) == ErrorCode::Config);
  cfg.image_source = (dir / "nope").string();
  CHECK(error_code_of([&] { protocol_images(cfg); }) == ErrorCode::Config);
}

TEST_CASE("vote decode") {
  const Bits truth{1, 0, 1, 1, 0, 0};
  CHECK(vote_decode({truth, truth, truth}, truth) == 1.0);
  const Bits wrong = complement(truth);
  CHECK(vote_decode({wrong, wrong, wrong}, truth) == 0.0);

  // independent coin-flip decodes: voted BA stays at 1/2
  auto rng = RngStream::derive(3, {});
  const Bits big_truth = random_payload(20000, rng);
  std::vector<Bits> seeds;
  for (int s = 0; s < 3; ++s) seeds.push_back(random_payload(20000, rng));
  CHECK(std::abs(vote_decode(seeds, big_truth) - 0.5) <= 0.03);
}
