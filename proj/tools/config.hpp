#pragma once

// Run configuration: one JSON document merged over built-in defaults. Every field the
// user supplies must exist in the defaults (except under "params", which binds free
// symbol parameters), and leaf types must match.

#include <optional>
#include <string>
#include <vector>

#include "tpdo/report.hpp"

namespace tpdo::cli {

Json default_config();

/// Merges `user` into `base`; errors name the offending dotted field path.
void merge_config(Json& base, const Json& user, const std::string& path = "");

/// Applies "a.b.c" = value through merge_config, so overrides obey the same rules.
void set_path(Json& config, const std::string& dotted, const Json& value);

/// Parses a flag value: JSON when it parses, otherwise the literal string.
Json flag_value(const std::string& text);

/// Typed reads; failures name the field.
const Json& at(const Json& config, const std::string& dotted);
double get_double(const Json& config, const std::string& dotted);
std::optional<double> get_optional_double(const Json& config, const std::string& dotted);
int get_int(const Json& config, const std::string& dotted);
std::uint64_t get_u64(const Json& config, const std::string& dotted);
bool get_bool(const Json& config, const std::string& dotted);
std::string get_string(const Json& config, const std::string& dotted);
std::optional<std::string> get_optional_string(const Json& config, const std::string& dotted);
std::vector<double> get_doubles(const Json& config, const std::string& dotted);
std::vector<int> get_ints(const Json& config, const std::string& dotted);

[[noreturn]] void field_error(const std::string& dotted, const std::string& what);

}  // namespace tpdo::cli
