#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecgraph::cli {

enum class Kind { Int, Real, Text, RealList, Flag };

struct OptionSpec {
  std::string name;  // long flag without dashes; also the config-file key
  Kind kind;
  std::string help;
};

/// Typed, validated key/value settings for one subcommand run.
///
/// Built from an optional JSON config object overlaid with the flags given on
/// the command line. Every value is converted to its declared kind during the
/// merge, so type errors surface before any computation starts.
class Settings {
 public:
  static Settings merge(const std::vector<OptionSpec>& specs, const nlohmann::json& file,
                        const std::map<std::string, std::string>& flags);

  bool has(std::string_view key) const;

  std::int64_t integer(std::string_view key, std::int64_t fallback) const;
  double real(std::string_view key, double fallback) const;
  std::string text(std::string_view key, std::string_view fallback) const;
  std::vector<double> reals(std::string_view key, std::vector<double> fallback) const;
  bool flag(std::string_view key, bool fallback) const;

  std::optional<std::string> maybe_text(std::string_view key) const;

 private:
  nlohmann::json values_ = nlohmann::json::object();
};

nlohmann::json read_config_file(const std::string& path);

// Strict whole-string numeric parsing; throws ValidationError naming `what`.
double parse_real(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::vector<double> parse_real_list(std::string_view text, std::string_view what);

}  // namespace ecgraph::cli
