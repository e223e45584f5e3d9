#include "config.hpp"

#include <cmath>
#include <limits>

#include "tpdo/errors.hpp"

namespace tpdo::cli {

Json default_config() {
  return Json::parse(R"json({
    "dim": 1,
    "grid": [64],
    "symbol": "bessel(-1)",
    "params": {},
    "nominal": null,
    "seed": 1,
    "jobs": 0,
    "input": {"file": null, "generator": "sin(2*pi*x1) + 0.5*cos(6*pi*x1)"},
    "symbol_class": {"shell_lo": 8, "shell_hi": 512, "max_order": -1, "x_points": 0},
    "kernel": {
      "mode": "decay",
      "oversample": 2,
      "exponent": 0,
      "truncations": [128, 256, 512],
      "truncation": 256,
      "cutoff_cells": 4,
      "cutoff": null,
      "alpha": null,
      "beta": null,
      "max_rows": null,
      "variant": "b",
      "sigmas": [0.03125, 0.0625, 0.125, 0.25],
      "samples": 64,
      "unit_scale": 0.125,
      "dump_rows": 1
    },
    "norms": {"p": [1, 2, "inf"], "weak_p": [1], "bmo": true, "maximal": true},
    "cz": {"lambda": 1.0},
    "sweep": {"p": 2, "orders": [], "offset": 0.25, "truncations": [64, 128, 256, 512], "trials": 16, "ascent_steps": 50},
    "experiment": {
      "truncations": [128, 256],
      "trials": 100,
      "lambda_grid": [],
      "atom_radii": [],
      "unit_scale": 0.125,
      "bessel_shift": null,
      "adjoint": false
    },
    "admissible": {"p": 2, "q": 2, "m": 0, "rho": 1, "delta": 0}
  })json");
}

namespace {

bool open_object(const std::string& path) { return path == "params"; }

bool numeric_like(const Json& v) {
  if (v.is_number()) return true;
  if (!v.is_string()) return false;
  const auto s = v.get<std::string>();
  return s == "inf" || s == "-inf" || s == "infinity" || s == "-infinity";
}

void check_leaf(const Json& def, const Json& v, const std::string& path) {
  if (def.is_null()) return;
  if (def.is_number() && !numeric_like(v)) field_error(path, "expected a number, got " + v.dump());
  if (def.is_boolean() && !v.is_boolean()) field_error(path, "expected true or false, got " + v.dump());
  if (def.is_string() && !v.is_string()) field_error(path, "expected a string, got " + v.dump());
  if (def.is_array() && !v.is_array()) field_error(path, "expected an array, got " + v.dump());
}

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts)
    if (p.empty()) throw ValidationError("malformed config path '" + dotted + "'");
  return parts;
}

}  // namespace

void field_error(const std::string& dotted, const std::string& what) {
  throw ValidationError("config field '" + dotted + "': " + what);
}

void merge_config(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) {
    if (path.empty()) throw ValidationError("config must be a JSON object");
    field_error(path, "expected an object, got " + user.dump());
  }
  for (const auto& [key, value] : user.items()) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) {
      if (open_object(path)) {
        if (!value.is_number()) field_error(p, "symbol parameters must be numbers");
        base[key] = value;
        continue;
      }
      throw ValidationError("unknown config field '" + p + "'");
    }
    Json& slot = base[key];
    if (slot.is_object()) {
      merge_config(slot, value, p);
    } else {
      check_leaf(slot, value, p);
      slot = value;
    }
  }
}

void set_path(Json& config, const std::string& dotted, const Json& value) {
  const auto parts = split_path(dotted);
  Json patch = value;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
  merge_config(config, patch);
}

Json flag_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

const Json& at(const Json& config, const std::string& dotted) {
  const Json* node = &config;
  for (const auto& part : split_path(dotted)) {
    if (!node->is_object() || !node->contains(part)) field_error(dotted, "missing");
    node = &(*node)[part];
  }
  return *node;
}

namespace {

double as_double(const Json& v, const std::string& path) {
  try {
    return to_double(v);
  } catch (const ValidationError&) {
    field_error(path, "expected a number, got " + v.dump());
  }
}

}  // namespace

double get_double(const Json& config, const std::string& dotted) { return as_double(at(config, dotted), dotted); }

std::optional<double> get_optional_double(const Json& config, const std::string& dotted) {
  const Json& v = at(config, dotted);
  if (v.is_null()) return std::nullopt;
  return as_double(v, dotted);
}

int get_int(const Json& config, const std::string& dotted) {
  const double v = get_double(config, dotted);
  if (v != std::floor(v) || std::fabs(v) > std::numeric_limits<int>::max())
    field_error(dotted, "expected an integer");
  return static_cast<int>(v);
}

std::uint64_t get_u64(const Json& config, const std::string& dotted) {
  const Json& v = at(config, dotted);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  field_error(dotted, "expected a non-negative integer, got " + v.dump());
}

bool get_bool(const Json& config, const std::string& dotted) {
  const Json& v = at(config, dotted);
  if (!v.is_boolean()) field_error(dotted, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const Json& config, const std::string& dotted) {
  const Json& v = at(config, dotted);
  if (!v.is_string()) field_error(dotted, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& config, const std::string& dotted) {
  if (at(config, dotted).is_null()) return std::nullopt;
  return get_string(config, dotted);
}

std::vector<double> get_doubles(const Json& config, const std::string& dotted) {
  const Json& v = at(config, dotted);
  if (!v.is_array()) field_error(dotted, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], dotted + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> get_ints(const Json& config, const std::string& dotted) {
  std::vector<int> out;
  for (double d : get_doubles(config, dotted)) {
    if (d != std::floor(d) || std::fabs(d) > std::numeric_limits<int>::max())
      field_error(dotted, "expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

}  // namespace tpdo::cli
