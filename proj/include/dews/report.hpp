#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dews/harness.hpp"
#include "dews/spectral.hpp"

namespace dews {

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(std::string_view name);

/// Column order of rows.csv (fixed):
/// image_idx, edit_idx, edit_name, strength_idx, t_star, seed_idx, start_step,
/// alpha_bar, ba, ber, msg_ok, msg_ok_raw, ba_blind, detect_score,
/// detect_score_null, psnr_wm, psnr_edit, ssim_edit, rho_low, rho_mid,
/// rho_high, snr_theory, snr_empirical, mi_bound_nats, fano_bound,
/// payload_hex, decoded_hex
const std::vector<std::string>& row_columns();
const std::vector<std::string>& aggregate_columns();
const std::vector<std::string>& clean_columns();

std::string rows_csv(const std::vector<TrialRow>& rows);
std::string aggregates_csv(const StressReport& report);
std::string clean_csv(const std::vector<CleanRow>& clean);
std::string report_json(const StressReport& report);

/// csv: rows.csv, aggregates.csv, clean.csv; json: report.json. Creates `dir`.
void emit_report(const StressReport& report, ReportFormat format, const std::filesystem::path& dir);

std::vector<TrialRow> parse_rows_csv(const std::string& text);
StressReport read_report_csv(const std::filesystem::path& dir);
StressReport parse_report_json(const std::string& text);
StressReport read_report_json(const std::filesystem::path& path);

/// band,numerator_energy,denominator_energy,rho
std::string band_report_csv(const RetentionResult& r);

/// %.17g, with inf/-inf/nan spelled out.
std::string format_number(double v);

}  // namespace dews
