// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "selflabel/synthdata.hpp"

namespace selflabel {

/// Flat `key = value` configuration text. Lines starting with '#' are
/// comments; keys are dotted (`train.epochs`). Lookups record which keys
/// were consumed so callers can reject typos.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;

  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view key) const;
  std::optional<std::uint64_t> get_u64(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;
  std::optional<std::vector<std::size_t>> get_counts(std::string_view key) const;

  void read(std::string_view key, std::size_t& out) const;
  void read(std::string_view key, double& out) const;
  void read(std::string_view key, bool& out) const;
  void read(std::string_view key, std::string& out) const;

  /// Keys present in the text but never looked up.
  std::vector<std::string> unused_keys() const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  const std::string* find(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> entries_;
  std::string source_;
  mutable std::set<std::string, std::less<>> used_;
};

void apply_config(const KeyValueConfig& kv, std::string_view prefix, SynthConfig& config);
std::string to_config_text(const SynthConfig& config, std::string_view prefix);

}  // namespace selflabel
