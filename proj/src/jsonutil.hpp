#pragma once

// Private helpers for reading JSON config with field-path error messages.

#include <json.hpp>
#include <string>
#include <string_view>

#include "loadsig/filtration.hpp"

namespace loadsig::jsonutil {

using json = nlohmann::ordered_json;

json parse(std::string_view text, std::string_view what);

const json& require(const json& obj, std::string_view key, const std::string& path);
bool has(const json& obj, std::string_view key);

double number(const json& j, const std::string& path);
double non_negative(const json& j, const std::string& path);
std::int64_t integer(const json& j, const std::string& path);
std::string string(const json& j, const std::string& path);
bool boolean(const json& j, const std::string& path);
Range range(const json& j, const std::string& path);

// "HH:MM" or "HH:MM:SS"; "24:00" is accepted as the end of day.
int clock_seconds(const json& j, const std::string& path);
std::string format_clock(int seconds);

[[noreturn]] void fail(const std::string& path, const std::string& message);

// Condition rows in the table-file layout.
json to_json(const ConditionRow& row);
ConditionRow condition_row_from_json(const json& j, const std::string& path);

}  // namespace loadsig::jsonutil
