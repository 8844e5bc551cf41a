#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ep3/io.hpp"

namespace ep3 {

using nlohmann::ordered_json;

namespace {

bool is_number_array(const ordered_json& v) {
  if (!v.is_array()) return false;
  for (const auto& x : v)
    if (!x.is_number()) return false;
  return true;
}

bool compatible(const ordered_json& def, const ordered_json& v) {
  if (def.is_null()) return v.is_null() || v.is_string() || v.is_number() || is_number_array(v);
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return is_number_array(v);
  return false;
}

const char* kind(const ordered_json& def) {
  if (def.is_null()) return "a string, number or list of numbers";
  if (def.is_string()) return "a string";
  if (def.is_number_integer()) return "an integer";
  if (def.is_number()) return "a number";
  if (def.is_boolean()) return "true or false";
  return "a list of numbers";
}

}  // namespace

RunConfig::RunConfig(std::string command, ordered_json defaults, std::vector<std::string> rate_keys)
    : command_(std::move(command)), values_(std::move(defaults)), rate_keys_(std::move(rate_keys)) {
  if (!values_.is_object()) values_ = ordered_json::object();
  if (!values_.contains("units")) values_["units"] = "angular";
  defaults_ = values_;
}

void RunConfig::assign(const std::string& key, const ordered_json& v, const std::string& origin) {
  if (finalized_) throw Error("configuration already finalized");
  if (!values_.contains(key))
    throw ValidationError("unknown key '" + key + "' for command " + command_ + " (" + origin + ")");
  const ordered_json& def = defaults_.at(key);
  if (!compatible(def, v))
    throw ValidationError("key '" + key + "' must be " + kind(def) + " (" + origin + ")");
  if (v.is_number_float() && !std::isfinite(v.get<double>()))
    throw ValidationError("key '" + key + "' must be finite (" + origin + ")");
  values_[key] = v;
}

void RunConfig::merge_json(const ordered_json& j, const std::string& origin) {
  if (!j.is_object()) throw ValidationError("configuration must be a JSON object (" + origin + ")");
  for (const auto& [k, v] : j.items()) assign(k, v, origin);
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ParseError("invalid JSON in " + path.string(), line);
  }
  merge_json(j, path.string());
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  if (!values_.contains(key)) throw ValidationError("unknown key '" + key + "' for command " + command_ + " (--set)");
  const ordered_json& def = defaults_.at(key);
  ordered_json v;
  if (def.is_string()) {
    v = raw;
  } else if (def.is_null()) {
    try {
      v = ordered_json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      v = raw;
    }
  } else {
    try {
      v = ordered_json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      throw ValidationError("cannot parse value for '" + key + "': " + raw);
    }
  }
  assign(key, v, "--set");
}

void RunConfig::finalize() {
  if (finalized_) return;
  units_ = parse_units(values_.at("units").get<std::string>());
  const double f = rate_factor(units_);
  for (const auto& k : rate_keys_) {
    auto& v = values_.at(k);
    if (v.is_number()) v = v.get<double>() * f;
    else if (v.is_array())
      for (auto& x : v) x = x.get<double>() * f;
  }
  finalized_ = true;
}

bool RunConfig::has(const std::string& key) const { return values_.contains(key) && !values_.at(key).is_null(); }

double RunConfig::number(const std::string& key) const {
  const auto& v = values_.at(key);
  if (!v.is_number()) throw ValidationError("key '" + key + "' must be a number");
  return v.get<double>();
}

long long RunConfig::integer(const std::string& key) const {
  const auto& v = values_.at(key);
  if (!v.is_number_integer()) throw ValidationError("key '" + key + "' must be an integer");
  return v.get<long long>();
}

std::string RunConfig::string(const std::string& key) const {
  const auto& v = values_.at(key);
  if (v.is_null()) return {};
  if (!v.is_string()) throw ValidationError("key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool RunConfig::flag(const std::string& key) const {
  const auto& v = values_.at(key);
  if (!v.is_boolean()) throw ValidationError("key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  const auto& v = values_.at(key);
  if (!is_number_array(v)) throw ValidationError("key '" + key + "' must be a list of numbers");
  return v.get<std::vector<double>>();
}

}  // namespace ep3
