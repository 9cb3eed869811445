#include "dews/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>

#include "dews/config.hpp"
#include "dews/error.hpp"
#include "json_detail.hpp"

namespace dews {

namespace {

using detail::json;

template <typename T>
struct Column {
  std::string name;
  std::function<std::string(const T&)> get;
  std::function<void(T&, const std::string&)> set;
  std::function<json(const T&)> to_json;
  std::function<void(T&, const json&)> from_json;
};

double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorCode::Format, "bad number '" + s + "' in report");
  return v;
}

long parse_int(const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorCode::Format, "bad integer '" + s + "' in report");
  return v;
}

template <typename T, typename F>
Column<T> num(const char* name, F T::*field) {
  return {name,
          [field](const T& t) { return format_number(t.*field); },
          [field](T& t, const std::string& s) { t.*field = parse_number(s); },
          [field](const T& t) { return detail::number_json(t.*field); },
          [field](T& t, const json& j) { t.*field = detail::number_from_json(j); }};
}

template <typename T>
Column<T> integer(const char* name, int T::*field) {
  return {name,
          [field](const T& t) { return std::to_string(t.*field); },
          [field](T& t, const std::string& s) { t.*field = static_cast<int>(parse_int(s)); },
          [field](const T& t) { return json(t.*field); },
          [field](T& t, const json& j) { t.*field = j.get<int>(); }};
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <typename T>
Column<T> text(const char* name, std::string T::*field) {
  return {name,
          [field](const T& t) { return quote(t.*field); },
          [field](T& t, const std::string& s) { t.*field = s; },
          [field](const T& t) { return json(t.*field); },
          [field](T& t, const json& j) { t.*field = j.get<std::string>(); }};
}

const std::vector<Column<TrialRow>>& row_table() {
  using R = TrialRow;
  static const std::vector<Column<R>> cols = {
      integer("image_idx", &R::image_idx),   integer("edit_idx", &R::edit_idx),
      text("edit_name", &R::edit_name),      integer("strength_idx", &R::strength_idx),
      num("t_star", &R::t_star),             integer("seed_idx", &R::seed_idx),
      integer("start_step", &R::start_step), num("alpha_bar", &R::alpha_bar),
      num("ba", &R::ba),                     num("ber", &R::ber),
      integer("msg_ok", &R::msg_ok),         integer("msg_ok_raw", &R::msg_ok_raw),
      num("ba_blind", &R::ba_blind),         num("detect_score", &R::detect_score),
      num("detect_score_null", &R::detect_score_null),
      num("psnr_wm", &R::psnr_wm),           num("psnr_edit", &R::psnr_edit),
      num("ssim_edit", &R::ssim_edit),       num("rho_low", &R::rho_low),
      num("rho_mid", &R::rho_mid),           num("rho_high", &R::rho_high),
      num("snr_theory", &R::snr_theory),     num("snr_empirical", &R::snr_empirical),
      num("mi_bound_nats", &R::mi_bound_nats), num("fano_bound", &R::fano_bound),
      text("payload_hex", &R::payload_hex),  text("decoded_hex", &R::decoded_hex),
  };
  return cols;
}

// aggregates.csv carries the report-level gamma as an extra first column.
const std::vector<Column<AggregateRow>>& aggregate_table() {
  using A = AggregateRow;
  static const std::vector<Column<A>> cols = {
      integer("edit_idx", &A::edit_idx),
      text("edit_name", &A::edit_name),
      integer("strength_idx", &A::strength_idx),
      num("t_star", &A::t_star),
      integer("n", &A::n),
      num("ba_mean", &A::ba_mean),
      num("ba_std", &A::ba_std),
      num("ber_mean", &A::ber_mean),
      num("ba_blind_mean", &A::ba_blind_mean),
      num("ba_blind_std", &A::ba_blind_std),
      num("msg_acc", &A::msg_acc),
      num("msg_acc_raw", &A::msg_acc_raw),
      num("voted_ba", &A::voted_ba),
      num("vote_gain", &A::vote_gain),
      num("auc", &A::auc),
      num("fpr_at_tpr95", &A::fpr_at_tpr95),
      num("psnr_edit_mean", &A::psnr_edit_mean),
      num("ssim_edit_mean", &A::ssim_edit_mean),
      num("rho_low", &A::rho_low),
      num("rho_mid", &A::rho_mid),
      num("rho_high", &A::rho_high),
      num("alpha_bar", &A::alpha_bar),
      num("snr_theory", &A::snr_theory),
      num("snr_empirical_mean", &A::snr_empirical_mean),
      num("snr_empirical_stderr", &A::snr_empirical_stderr),
      num("mi_bound_nats", &A::mi_bound_nats),
      num("fano_bound", &A::fano_bound),
  };
  return cols;
}

const std::vector<Column<CleanRow>>& clean_table() {
  using C = CleanRow;
  static const std::vector<Column<C>> cols = {
      integer("image_idx", &C::image_idx),   num("psnr_wm", &C::psnr_wm),
      num("ba", &C::ba),                     num("ba_blind", &C::ba_blind),
      num("detect_score", &C::detect_score), num("detect_score_null", &C::detect_score_null),
      text("payload_hex", &C::payload_hex),
  };
  return cols;
}

template <typename T>
std::vector<std::string> names(const std::vector<Column<T>>& cols) {
  std::vector<std::string> out;
  for (const auto& c : cols) out.push_back(c.name);
  return out;
}

template <typename T>
std::string header(const std::vector<Column<T>>& cols, const char* prefix = nullptr) {
  std::string out = prefix ? prefix : "";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i || prefix) out += ',';
    out += cols[i].name;
  }
  return out + "\n";
}

template <typename T>
std::string line(const std::vector<Column<T>>& cols, const T& v, const std::string& prefix = {}) {
  std::string out = prefix;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i || !prefix.empty()) out += ',';
    out += cols[i].get(v);
  }
  return out + "\n";
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
std::vector<T> parse_table(const std::vector<Column<T>>& cols, const std::string& text, std::size_t skip_prefix,
                           std::vector<std::string>* prefixes, const char* what) {
  const auto rows = split_csv(text);
  require(!rows.empty(), ErrorCode::Format, std::string(what) + ": missing header");
  require(rows[0].size() == cols.size() + skip_prefix, ErrorCode::Format, std::string(what) + ": unexpected header");
  for (std::size_t i = 0; i < cols.size(); ++i)
    require(rows[0][i + skip_prefix] == cols[i].name, ErrorCode::Format,
            std::string(what) + ": unexpected column '" + rows[0][i + skip_prefix] + "'");
  std::vector<T> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(rows[r].size() == cols.size() + skip_prefix, ErrorCode::Format,
            std::string(what) + ": line " + std::to_string(r + 1) + " has the wrong field count");
    T v{};
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i].set(v, rows[r][i + skip_prefix]);
    if (prefixes && skip_prefix) prefixes->push_back(rows[r][0]);
    out.push_back(std::move(v));
  }
  return out;
}

template <typename T>
json table_json(const std::vector<Column<T>>& cols, const std::vector<T>& items) {
  json arr = json::array();
  for (const auto& it : items) {
    json o = json::object();
    for (const auto& c : cols) o[c.name] = c.to_json(it);
    arr.push_back(std::move(o));
  }
  return arr;
}

template <typename T>
std::vector<T> table_from_json(const std::vector<Column<T>>& cols, const json& arr, const char* what) {
  require(arr.is_array(), ErrorCode::Format, std::string(what) + " must be an array");
  std::vector<T> out;
  for (const auto& o : arr) {
    T v{};
    for (const auto& c : cols) {
      require(o.contains(c.name), ErrorCode::Format, std::string(what) + ": missing field '" + c.name + "'");
      c.from_json(v, o[c.name]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << content;
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  fail(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

const std::vector<std::string>& row_columns() {
  static const auto n = names(row_table());
  return n;
}
const std::vector<std::string>& aggregate_columns() {
  static const auto n = [] {
    auto v = names(aggregate_table());
    v.insert(v.begin(), "gamma");
    return v;
  }();
  return n;
}
const std::vector<std::string>& clean_columns() {
  static const auto n = names(clean_table());
  return n;
}

std::string rows_csv(const std::vector<TrialRow>& rows) {
  std::string out = header(row_table());
  for (const auto& r : rows) out += line(row_table(), r);
  return out;
}

std::string aggregates_csv(const StressReport& report) {
  std::string out = header(aggregate_table(), "gamma");
  const std::string g = format_number(report.gamma);
  for (const auto& a : report.aggregates) out += line(aggregate_table(), a, g);
  return out;
}

std::string clean_csv(const std::vector<CleanRow>& clean) {
  std::string out = header(clean_table());
  for (const auto& c : clean) out += line(clean_table(), c);
  return out;
}

std::string report_json(const StressReport& report) {
  json j = {{"gamma", detail::number_json(report.gamma)},
            {"rows", table_json(row_table(), report.rows)},
            {"aggregates", table_json(aggregate_table(), report.aggregates)},
            {"clean", table_json(clean_table(), report.clean)}};
  return j.dump(1);
}

void emit_report(const StressReport& report, ReportFormat format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::Io, "cannot create directory '" + dir.string() + "'");
  if (format == ReportFormat::Csv) {
    write_file(dir / "rows.csv", rows_csv(report.rows));
    write_file(dir / "aggregates.csv", aggregates_csv(report));
    write_file(dir / "clean.csv", clean_csv(report.clean));
  } else {
    write_file(dir / "report.json", report_json(report));
  }
}

std::vector<TrialRow> parse_rows_csv(const std::string& text) {
  return parse_table(row_table(), text, 0, nullptr, "rows.csv");
}

StressReport read_report_csv(const std::filesystem::path& dir) {
  StressReport r;
  r.rows = parse_rows_csv(read_text_file((dir / "rows.csv").string()));
  std::vector<std::string> gammas;
  r.aggregates = parse_table(aggregate_table(), read_text_file((dir / "aggregates.csv").string()), 1, &gammas,
                             "aggregates.csv");
  if (!gammas.empty()) r.gamma = parse_number(gammas.front());
  r.clean = parse_table(clean_table(), read_text_file((dir / "clean.csv").string()), 0, nullptr, "clean.csv");
  return r;
}

StressReport parse_report_json(const std::string& text) {
  const json j = detail::parse_json(text, "report");
  try {
    StressReport r;
    r.gamma = detail::number_from_json(j.at("gamma"));
    r.rows = table_from_json(row_table(), j.at("rows"), "rows");
    r.aggregates = table_from_json(aggregate_table(), j.at("aggregates"), "aggregates");
    r.clean = table_from_json(clean_table(), j.at("clean"), "clean");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("report: ") + e.what());
  }
}

StressReport read_report_json(const std::filesystem::path& path) {
  return parse_report_json(read_text_file(path.string()));
}

std::string band_report_csv(const RetentionResult& r) {
  std::string out = "band,numerator_energy,denominator_energy,rho\n";
  for (Band b : kAllBands) {
    const int i = static_cast<int>(b);
    out += std::string(band_name(b)) + "," + format_number(r.numerator[i]) + "," + format_number(r.denominator[i]) +
           "," + format_number(r.rho[i]) + "\n";
  }
  return out;
}

}  // namespace dews
