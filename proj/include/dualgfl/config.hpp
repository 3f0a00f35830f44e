#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dualgfl/fedsim.hpp"

namespace dualgfl {

// Flat key-value configuration. Every SimConfig field has one key; the
// document format is a single YAML mapping of scalars.

// Keys in emission order.
const std::vector<std::string>& config_keys();

// One-line description of a key, used as the comment in emitted documents.
std::string_view config_key_help(std::string_view key);

// Parses `value` into the field named `key`. Throws ConfigError naming the key
// for an unknown key or a malformed value. Does not run SimConfig::validate.
void set_config_value(SimConfig& config, std::string_view key, std::string_view value);

// Shortest text that set_config_value parses back to the same value.
std::string get_config_value(const SimConfig& config, std::string_view key);

// Parses a document, starting from the defaults. Unknown keys, nested values
// and invariant violations throw ConfigError.
SimConfig parse_config(std::string_view document);

// Reads and parses a file; an unreadable file is a ConfigError on "config".
SimConfig load_config(const std::filesystem::path& path);

// Commented document that parse_config maps back to an equal SimConfig.
std::string emit_config(const SimConfig& config);

// Every key with its typed value, as a JSON object string.
std::string config_json(const SimConfig& config);

}  // namespace dualgfl
