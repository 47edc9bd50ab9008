#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kta/federation/experiment.hpp"

namespace kta::cli {

using federation::ExperimentConfig;

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const ExperimentConfig&)> get;
  // Throws std::invalid_argument with a short reason.
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

const std::vector<ConfigKey>& config_schema();
const ConfigKey* find_key(std::string_view name);

// KTA_ + upper-cased key with '.' replaced by "__", e.g. KTA_TRAIN__LAMBDA.
std::string env_name(std::string_view key);

// Flat "key = value" lines; '#' starts a comment. Unknown keys, malformed
// lines and bad values are all collected and thrown as one ConfigError.
// Environment overrides apply after the file; `env` maps variable names to
// values (pass environment_overrides() for the process environment).
ExperimentConfig parse_config(std::string_view text,
                              const std::map<std::string, std::string>& env = {});
ExperimentConfig load_config(const std::string& path,
                             const std::map<std::string, std::string>& env = {});
std::map<std::string, std::string> environment_overrides();

// Sets one key, throwing ConfigError naming it.
void set_key(ExperimentConfig& config, std::string_view key, std::string_view value);

// Canonical dump: every key in schema order as "key = value", with the help
// text as a trailing comment when `with_help` is set.
std::string dump_config(const ExperimentConfig& config, bool with_help = false);

std::string format_double(double value);

}  // namespace kta::cli
