// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Flat `key = value` run configuration with dotted keys. Every key has a
// registered type and default; unknown keys and ill-typed values are
// rejected with the offending line.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdssm/metrics.hpp"
#include "gdssm/training.hpp"

namespace gdssm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { kInt, kReal, kBool, kString, kChoice, kRealList, kRealOrAuto, kIntOrAuto };

struct KeySpec {
  std::string key;
  KeyType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // kChoice only
};

const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(const std::string& key);

// "train.lr_ssm" → "lr-ssm"; leaf names are unique across the registry.
std::string leaf_flag(const std::string& key);

class RunConfig {
 public:
  RunConfig();  // every key at its default

  // Throws ConfigError for unknown keys or values that do not parse.
  void set(const std::string& key, const std::string& value);

  const std::string& raw(const std::string& key) const;
  bool is_explicit(const std::string& key) const { return explicit_.count(key) != 0; }

  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::optional<double> real_or_auto(const std::string& key) const;
  std::optional<std::size_t> count_or_auto(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::map<std::string, std::string> explicit_values() const;

  // Sorted `key = value` lines; the config hash is FNV-1a of this text.
  std::string canonical() const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

// Applies `key = value` lines on top of `base`. Blank lines and `#` comments
// are skipped; an inline `#` starts a comment. Errors name the source, line
// number and the line itself.
void apply_config_text(RunConfig& base, const std::string& text, const std::string& source);
void apply_config_file(RunConfig& base, const std::string& path);

ModelSpec model_spec_from(const RunConfig& cfg);
TaskKind task_kind_from(const RunConfig& cfg);
TrainConfig train_config_from(const RunConfig& cfg);
GdConfig oracle_config_from(const RunConfig& cfg);

}  // namespace gdssm
