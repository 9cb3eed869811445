#pragma once

// JSON mapping helpers shared by the config, report and tuner code.

#include <json.hpp>

#include "dews/config.hpp"

namespace dews::detail {

using nlohmann::json;

json parse_json(std::string_view text, const char* what);

// Rejects keys outside `allowed`.
void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* what);

EditConfig edit_from_json(const json& j);
json edit_json(const EditConfig& e);

ScheduleConfig schedule_from_json(const json& j);
json schedule_json(const ScheduleConfig& s);

BandPartition partition_from_json(const json& j);
json partition_json(const BandPartition& p);

BandValues band_values_from_json(const json& j, const char* what);

// number that may also be the string "inf" / "-inf" / "nan".
double number_from_json(const json& j);
json number_json(double v);

}  // namespace dews::detail
