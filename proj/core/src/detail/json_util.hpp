#pragma once

#include <string>

#include "json.hpp"
#include "kanopf/distribution_spec.hpp"
#include "kanopf/errors.hpp"

namespace kanopf::detail {

using Json = nlohmann::ordered_json;

/// Parses `text`, turning syntax errors into ConfigError with line/column.
Json parse_json(const std::string& text, const std::string& origin);

/// Field accessors that report the JSON path of a missing or mistyped key.
const Json& member(const Json& obj, const std::string& key, const std::string& path);
double number(const Json& obj, const std::string& key, const std::string& path);
double number_or(const Json& obj, const std::string& key, double fallback, const std::string& path);
long long integer(const Json& obj, const std::string& key, const std::string& path);
long long integer_or(const Json& obj, const std::string& key, long long fallback, const std::string& path);
bool boolean_or(const Json& obj, const std::string& key, bool fallback, const std::string& path);
std::string string(const Json& obj, const std::string& key, const std::string& path);
std::string string_or(const Json& obj, const std::string& key, const std::string& fallback,
                      const std::string& path);
const Json& array(const Json& obj, const std::string& key, const std::string& path);
void require_object(const Json& j, const std::string& path);
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path);

DistributionSpec distribution_from_json(const Json& j, const std::string& path);
Json distribution_to_json(const DistributionSpec& d);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace kanopf::detail
