#include "dce/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace dce {

namespace {

const std::set<std::string, std::less<>> kIntegerKeys = {"k_max", "steps_per_fastest_period"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_plain(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// [coefficient[*]]pi[/divisor]
bool parse_pi_multiple(std::string_view s, double& out) {
  s = trim(s);
  const auto at = s.find("pi");
  if (at == std::string_view::npos) return false;
  std::string_view head = trim(s.substr(0, at));
  std::string_view tail = trim(s.substr(at + 2));
  if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
  double coefficient = 1.0;
  if (head == "-") {
    coefficient = -1.0;
  } else if (head == "+" || head.empty()) {
    coefficient = 1.0;
  } else if (!parse_plain(head, coefficient)) {
    return false;
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/' || !parse_plain(tail.substr(1), divisor) || divisor == 0.0) return false;
  }
  out = coefficient * std::numbers::pi / divisor;
  return true;
}

void check_field(const std::string& key, double v) {
  auto fail = [&](const std::string& constraint) {
    throw ConfigError(key, key + " must be " + constraint);
  };
  if (!std::isfinite(v)) fail("finite");
  if (key == "lambda" || key == "t_final" || key == "gamma_left" || key == "gamma_right" ||
      key == "rel_tolerance") {
    if (!(v > 0)) fail("> 0");
  } else if (key == "epsilon" || key == "a_left" || key == "a_right") {
    if (!(v >= 0)) fail(">= 0");
  }
}

std::string csv_cell(const Table::Cell& cell) {
  if (cell.is_null()) return "";
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_float()) return format_number(cell.get<double>());
  if (cell.is_number()) return cell.dump();
  if (cell.is_string()) {
    const auto s = cell.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + '"';
  }
  return cell.dump();
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "lambda",    "epsilon",   "a_left",  "a_right", "gamma_left", "gamma_right",
      "phi_left",  "phi_right", "t_final", "k_max",   "steps_per_fastest_period",
      "rel_tolerance"};
  return keys;
}

double parse_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  if (parse_plain(text, v) || parse_pi_multiple(text, v)) return v;
  throw ConfigError(std::string(key),
                    std::string(key) + ": malformed value '" + std::string(trim(text)) + "'");
}

int parse_positive_int(std::string_view key, std::string_view text) {
  const auto s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(std::string(key),
                      std::string(key) + ": malformed integer '" + std::string(s) + "'");
  }
  if (v < 1) throw ConfigError(std::string(key), std::string(key) + " must be >= 1");
  return v;
}

ConfigEntries read_entries(std::string_view text) {
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("", std::string("malformed JSON config: ") + e.what());
    }
    nlohmann::json flat = nlohmann::json::object();
    if (doc.contains("metadata")) {
      const auto& meta = doc.at("metadata");
      for (const char* block : {"config", "truncation"}) {
        if (meta.contains(block)) flat.update(meta.at(block));
      }
    } else {
      flat = doc;
    }
    if (!flat.is_object()) throw ConfigError("", "JSON config must be an object");
    ConfigEntries entries;
    for (const auto& [key, value] : flat.items()) {
      if (value.is_number_float()) {
        entries[key] = format_number(value.get<double>());
      } else if (value.is_number()) {
        entries[key] = value.dump();
      } else if (value.is_string()) {
        entries[key] = value.get<std::string>();
      } else {
        throw ConfigError(key, key + ": value must be a number or string");
      }
    }
    return entries;
  }

  ConfigEntries entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto sep = view.find_first_of("=:");
    if (sep == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, sep)));
    const std::string value(trim(view.substr(sep + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError(key, "line " + std::to_string(number) + ": expected 'key = value'");
    }
    if (!entries.emplace(key, value).second) throw ConfigError(key, "duplicate key: " + key);
  }
  return entries;
}

ParsedConfig parse_entries(const ConfigEntries& entries) {
  const auto& keys = config_keys();
  for (const auto& [key, value] : entries) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, "unknown key: " + key);
    }
  }

  std::map<std::string, double, std::less<>> reals;
  std::map<std::string, int, std::less<>> ints;
  for (const auto& key : keys) {
    const auto it = entries.find(key);
    if (it == entries.end()) continue;
    if (kIntegerKeys.contains(key)) {
      ints[key] = parse_positive_int(key, it->second);
    } else {
      const double v = parse_real(key, it->second);
      check_field(key, v);
      reals[key] = v;
    }
  }

  {
    // Invariants among the keys that are present win over missing-key errors.
    CavityConfig provisional;
    provisional.epsilon = 0.0;
    for (const auto& [key, value] : reals) {
      if (key == "lambda") provisional.lambda = value;
      if (key == "epsilon") provisional.epsilon = value;
      if (key == "a_left") provisional.a_left = value;
      if (key == "a_right") provisional.a_right = value;
    }
    provisional.validate();
  }

  for (const char* key : {"epsilon", "t_final"}) {
    if (!reals.contains(key)) throw ConfigError(key, std::string(key) + " is required");
  }
  if (!reals.contains("gamma_left") && !reals.contains("gamma_right")) {
    throw ConfigError("gamma_right", "gamma_left or gamma_right is required");
  }

  ParsedConfig out;
  CavityConfig& cfg = out.config;
  auto take = [&](const std::string& key, double& field) {
    if (const auto it = reals.find(key); it != reals.end()) {
      field = it->second;
    } else {
      out.defaulted.push_back(key);
    }
  };
  take("lambda", cfg.lambda);
  take("epsilon", cfg.epsilon);
  take("a_left", cfg.a_left);
  take("a_right", cfg.a_right);
  // An unspecified wall frequency follows the other wall.
  cfg.gamma_left = reals.contains("gamma_left") ? reals["gamma_left"] : reals["gamma_right"];
  cfg.gamma_right = reals.contains("gamma_right") ? reals["gamma_right"] : reals["gamma_left"];
  if (!reals.contains("gamma_left")) out.defaulted.emplace_back("gamma_left");
  if (!reals.contains("gamma_right")) out.defaulted.emplace_back("gamma_right");
  take("phi_left", cfg.phi_left);
  take("phi_right", cfg.phi_right);
  take("t_final", cfg.t_final);
  cfg.validate();

  out.trunc = default_truncation(cfg);
  if (ints.contains("k_max")) out.trunc.k_max = ints["k_max"]; else out.defaulted.emplace_back("k_max");
  if (ints.contains("steps_per_fastest_period")) {
    out.trunc.steps_per_fastest_period = ints["steps_per_fastest_period"];
  } else {
    out.defaulted.emplace_back("steps_per_fastest_period");
  }
  take("rel_tolerance", out.trunc.rel_tolerance);
  out.trunc.validate_for(cfg);
  return out;
}

ParsedConfig parse_config(std::string_view text) { return parse_entries(read_entries(text)); }

nlohmann::ordered_json to_json(const CavityConfig& cfg) {
  return {{"lambda", cfg.lambda},         {"epsilon", cfg.epsilon},
          {"a_left", cfg.a_left},         {"a_right", cfg.a_right},
          {"gamma_left", cfg.gamma_left}, {"gamma_right", cfg.gamma_right},
          {"phi_left", cfg.phi_left},     {"phi_right", cfg.phi_right},
          {"t_final", cfg.t_final}};
}

nlohmann::ordered_json to_json(const Truncation& trunc) {
  return {{"k_max", trunc.k_max},
          {"steps_per_fastest_period", trunc.steps_per_fastest_period},
          {"rel_tolerance", trunc.rel_tolerance}};
}

ParsedConfig config_from_json(const nlohmann::json& doc) { return parse_config(doc.dump()); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path())) {
    throw std::runtime_error("output directory does not exist: " + target.parent_path().string());
  }
  fs::path temp = target;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(temp, ec);
      throw std::runtime_error("write failed: " + temp.string());
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw std::runtime_error("cannot move output into place: " + target.string());
  }
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (const auto& [key, value] : metadata.items()) {
    os << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
  return os.str();
}

std::string Table::to_json() const {
  nlohmann::ordered_json doc;
  doc["metadata"] = metadata;
  auto& out_rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json obj;
    for (std::size_t c = 0; c < columns.size() && c < row.size(); ++c) {
      const auto& cell = row[c];
      obj[columns[c]] = (cell.is_number_float() && !std::isfinite(cell.get<double>())) ? nullptr : cell;
    }
    out_rows.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

}  // namespace dce
