// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string join_key(std::string_view prefix, std::string_view key) {
  if (prefix.empty()) return std::string(key);
  return std::string(prefix) + "." + std::string(key);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    if (kv.contains(key))
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    kv.entries_.emplace(std::string(key), std::string(value));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void KeyValueConfig::set(std::string key, std::string value) {
  entries_.insert_or_assign(std::move(key), std::move(value));
}

bool KeyValueConfig::contains(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

const std::string* KeyValueConfig::find(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(std::string(key));
  return &it->second;
}

std::optional<std::string> KeyValueConfig::get_string(std::string_view key) const {
  if (const auto* v = find(key)) return *v;
  return std::nullopt;
}

std::optional<std::int64_t> KeyValueConfig::get_int(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw ConfigError(source_ + ": key '" + std::string(key) + "' expects an integer, got '" + *v + "'");
  return out;
}

std::optional<std::uint64_t> KeyValueConfig::get_u64(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw ConfigError(source_ + ": key '" + std::string(key) + "' expects an unsigned integer, got '" +
                      *v + "'");
  return out;
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw ConfigError(source_ + ": key '" + std::string(key) + "' expects a number, got '" + *v + "'");
  return out;
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(source_ + ": key '" + std::string(key) + "' expects a boolean, got '" + *v + "'");
}

std::optional<std::vector<std::size_t>> KeyValueConfig::get_counts(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  std::vector<std::size_t> out;
  std::string_view rest = *v;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw ConfigError(source_ + ": key '" + std::string(key) + "' expects a comma-separated count list");
    out.push_back(n);
  }
  return out;
}

void KeyValueConfig::read(std::string_view key, std::size_t& out) const {
  if (const auto v = get_int(key)) {
    if (*v < 0) throw ConfigError(source_ + ": key '" + std::string(key) + "' must be non-negative");
    out = static_cast<std::size_t>(*v);
  }
}

void KeyValueConfig::read(std::string_view key, double& out) const {
  if (const auto v = get_double(key)) out = *v;
}

void KeyValueConfig::read(std::string_view key, bool& out) const {
  if (const auto v = get_bool(key)) out = *v;
}

void KeyValueConfig::read(std::string_view key, std::string& out) const {
  if (const auto v = get_string(key)) out = *v;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : entries_)
    if (!used_.contains(key)) out.push_back(key);
  return out;
}

void apply_config(const KeyValueConfig& kv, std::string_view prefix, SynthConfig& config) {
  kv.read(join_key(prefix, "num_identities"), config.num_identities);
  kv.read(join_key(prefix, "groups_per_identity"), config.groups_per_identity);
  kv.read(join_key(prefix, "segments_per_group"), config.segments_per_group);
  kv.read(join_key(prefix, "audio_dim"), config.audio_dim);
  kv.read(join_key(prefix, "visual_dim"), config.visual_dim);
  kv.read(join_key(prefix, "within_identity_spread"), config.within_identity_spread);
  kv.read(join_key(prefix, "observation_noise"), config.observation_noise);
  kv.read(join_key(prefix, "augmentation_noise_low"), config.augmentation_noise.low);
  kv.read(join_key(prefix, "augmentation_noise_high"), config.augmentation_noise.high);
  kv.read(join_key(prefix, "channel_rank"), config.channel_rank);
  if (const auto seed = kv.get_u64(join_key(prefix, "seed"))) config.seed = *seed;
}

std::string to_config_text(const SynthConfig& c, std::string_view prefix) {
  std::ostringstream out;
  out.precision(17);
  out << join_key(prefix, "num_identities") << " = " << c.num_identities << '\n'
      << join_key(prefix, "groups_per_identity") << " = " << c.groups_per_identity << '\n'
      << join_key(prefix, "segments_per_group") << " = " << c.segments_per_group << '\n'
      << join_key(prefix, "audio_dim") << " = " << c.audio_dim << '\n'
      << join_key(prefix, "visual_dim") << " = " << c.visual_dim << '\n'
      << join_key(prefix, "within_identity_spread") << " = " << c.within_identity_spread << '\n'
      << join_key(prefix, "observation_noise") << " = " << c.observation_noise << '\n'
      << join_key(prefix, "augmentation_noise_low") << " = " << c.augmentation_noise.low << '\n'
      << join_key(prefix, "augmentation_noise_high") << " = " << c.augmentation_noise.high << '\n'
      << join_key(prefix, "channel_rank") << " = " << c.channel_rank << '\n'
      << join_key(prefix, "seed") << " = " << c.seed << '\n';
  return out.str();
}

}  // namespace selflabel
