#include "settings.hpp"

#include "ecgraph/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ecgraph::cli {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

nlohmann::json convert(const OptionSpec& spec, const nlohmann::json& raw) {
  const std::string what = "--" + spec.name;
  switch (spec.kind) {
    case Kind::Int:
      if (raw.is_number_integer()) return raw.get<std::int64_t>();
      if (raw.is_string()) return parse_int(raw.get<std::string>(), what);
      break;
    case Kind::Real:
      if (raw.is_number()) {
        const double value = raw.get<double>();
        if (!std::isfinite(value)) break;
        return value;
      }
      if (raw.is_string()) return parse_real(raw.get<std::string>(), what);
      break;
    case Kind::Text:
      if (raw.is_string()) return raw;
      break;
    case Kind::RealList:
      if (raw.is_string()) return parse_real_list(raw.get<std::string>(), what);
      if (raw.is_number()) return nlohmann::json::array({raw.get<double>()});
      if (raw.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& item : raw) {
          if (!item.is_number()) throw ValidationError(what + ": list entries must be numbers");
          out.push_back(item.get<double>());
        }
        if (out.empty()) throw ValidationError(what + ": list must not be empty");
        return out;
      }
      break;
    case Kind::Flag:
      if (raw.is_boolean()) return raw;
      break;
  }
  throw ValidationError(what + ": unexpected value " + raw.dump());
}

}  // namespace

Settings Settings::merge(const std::vector<OptionSpec>& specs, const nlohmann::json& file,
                         const std::map<std::string, std::string>& flags) {
  auto find = [&](std::string_view name) -> const OptionSpec* {
    const auto it = std::find_if(specs.begin(), specs.end(),
                                 [&](const OptionSpec& s) { return s.name == name; });
    return it == specs.end() ? nullptr : &*it;
  };

  Settings settings;
  if (!file.is_null()) {
    if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
    for (const auto& [key, raw] : file.items()) {
      const OptionSpec* spec = find(key);
      if (spec == nullptr) throw ValidationError("config file: unknown key '" + key + "'");
      settings.values_[key] = convert(*spec, raw);
    }
  }
  for (const auto& [key, raw] : flags) {
    const OptionSpec* spec = find(key);
    if (spec == nullptr) throw ValidationError("unknown option --" + key);
    settings.values_[key] = spec->kind == Kind::Flag ? nlohmann::json(raw != "false")
                                                     : convert(*spec, nlohmann::json(raw));
  }
  return settings;
}

bool Settings::has(std::string_view key) const { return values_.contains(key); }

std::int64_t Settings::integer(std::string_view key, std::int64_t fallback) const {
  return has(key) ? values_.at(std::string(key)).get<std::int64_t>() : fallback;
}

double Settings::real(std::string_view key, double fallback) const {
  return has(key) ? values_.at(std::string(key)).get<double>() : fallback;
}

std::string Settings::text(std::string_view key, std::string_view fallback) const {
  return has(key) ? values_.at(std::string(key)).get<std::string>() : std::string(fallback);
}

std::vector<double> Settings::reals(std::string_view key, std::vector<double> fallback) const {
  return has(key) ? values_.at(std::string(key)).get<std::vector<double>>() : fallback;
}

bool Settings::flag(std::string_view key, bool fallback) const {
  return has(key) ? values_.at(std::string(key)).get<bool>() : fallback;
}

std::optional<std::string> Settings::maybe_text(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return values_.at(std::string(key)).get<std::string>();
}

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + path + ": " + e.what());
  }
}

double parse_real(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw ValidationError(std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
  }
  return value;
}

std::vector<double> parse_real_list(std::string_view text, std::string_view what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    values.push_back(parse_real(text.substr(start, end - start), what));
    start = end + 1;
  }
  return values;
}

}  // namespace ecgraph::cli
