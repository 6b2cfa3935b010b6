// Flat key-value configuration, JSON round-tripping and output emission.
//
// Config documents are either `key = value` lines ('#' starts a comment) or a
// JSON object with the same flat keys. A JSON file written by the CLI can be
// read back as a config: its metadata.config and metadata.truncation blocks
// are used. Real values accept plain numbers and multiples of pi ("pi/2",
// "-3*pi", "0.5pi").

#pragma once

#include "dce/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dce {

using ConfigEntries = std::map<std::string, std::string, std::less<>>;

struct ParsedConfig {
  CavityConfig config;
  Truncation trunc;
  std::vector<std::string> defaulted;  // keys filled from defaults, schema order
};

/// The flat schema, in canonical order.
const std::vector<std::string>& config_keys();

/// Splits a document into raw entries without interpreting values.
/// Throws ConfigError on malformed lines or duplicate keys.
ConfigEntries read_entries(std::string_view text);

/// Applies defaults and validates every invariant. Unknown keys are rejected.
ParsedConfig parse_entries(const ConfigEntries& entries);
ParsedConfig parse_config(std::string_view text);

/// Parses a real value; throws ConfigError naming `key` on failure.
double parse_real(std::string_view key, std::string_view text);
int parse_positive_int(std::string_view key, std::string_view text);

nlohmann::ordered_json to_json(const CavityConfig& cfg);
nlohmann::ordered_json to_json(const Truncation& trunc);
ParsedConfig config_from_json(const nlohmann::json& doc);

/// 17 significant digits, so re-parsing is lossless.
std::string format_number(double x);

/// Writes via a temporary sibling file and rename, so `path` is either
/// untouched or complete.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Tabular output with a metadata block, rendered as CSV or JSON.
struct Table {
  using Cell = nlohmann::ordered_json;  // number, string, bool or null

  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// '#'-prefixed "key: value" metadata lines, header, then rows.
  std::string to_csv() const;
  /// {"metadata": ..., "rows": [{column: value, ...}, ...]}
  std::string to_json() const;
};

}  // namespace dce
