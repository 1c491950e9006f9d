// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/text_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + text + "'");
  return value;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_assignment(const std::vector<std::string>& ids, const Assignment& assignment,
                      const std::filesystem::path& path) {
  if (ids.size() != assignment.size()) throw ArgumentError("assignment/id count mismatch");
  std::string text;
  for (std::size_t i = 0; i < ids.size(); ++i)
    text += ids[i] + '\t' + std::to_string(assignment.labels[i]) + '\n';
  write_text_file(path, text);
}

std::pair<std::vector<std::string>, std::vector<int>> read_assignment_rows(
    const std::filesystem::path& path) {
  std::pair<std::vector<std::string>, std::vector<int>> rows;
  std::size_t line_no = 0;
  for (const auto& line : lines_of(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected sample_id<TAB>label");
    rows.first.push_back(line.substr(0, tab));
    const int label = parse_number<int>(line.substr(tab + 1), path, line_no);
    if (label < 0) throw DataError(path.string() + ":" + std::to_string(line_no) + ": negative label");
    rows.second.push_back(label);
  }
  return rows;
}

Assignment read_assignment(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           std::optional<std::size_t> k) {
  auto [file_ids, labels] = read_assignment_rows(path);
  if (file_ids.size() != ids.size())
    throw ConsistencyError(path.string() + " has " + std::to_string(file_ids.size()) +
                           " rows, expected " + std::to_string(ids.size()));
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);

  Assignment out{std::vector<int>(ids.size(), -1), 0};
  int max_label = -1;
  for (std::size_t r = 0; r < file_ids.size(); ++r) {
    const auto it = position.find(file_ids[r]);
    if (it == position.end())
      throw ConsistencyError(path.string() + ": unknown sample id " + file_ids[r]);
    if (out.labels[it->second] != -1)
      throw ConsistencyError(path.string() + ": duplicate sample id " + file_ids[r]);
    out.labels[it->second] = labels[r];
    max_label = std::max(max_label, labels[r]);
  }
  out.k = k ? *k : static_cast<std::size_t>(max_label + 1);
  if (max_label >= 0 && static_cast<std::size_t>(max_label) >= out.k)
    throw ConsistencyError(path.string() + ": label " + std::to_string(max_label) +
                           " outside [0, " + std::to_string(out.k) + ")");
  return out;
}

void write_wss_curve(const WssCurve& curve, const std::filesystem::path& path) {
  curve.validate();
  std::string text;
  char buf[64];
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", curve.ks[i], curve.wss[i]);
    text += buf;
  }
  write_text_file(path, text);
}

WssCurve read_wss_curve(const std::filesystem::path& path) {
  WssCurve curve;
  std::size_t line_no = 0;
  for (const auto& line : lines_of(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected K<TAB>W");
    curve.ks.push_back(parse_number<std::size_t>(line.substr(0, tab), path, line_no));
    curve.wss.push_back(parse_number<double>(line.substr(tab + 1), path, line_no));
  }
  curve.validate();
  return curve;
}

void write_trials(const std::vector<Trial>& trials, const std::filesystem::path& path) {
  std::string text;
  for (const auto& t : trials) text += t.enroll_id + ' ' + t.test_id + (t.is_target ? " 1\n" : " 0\n");
  write_text_file(path, text);
}

std::vector<Trial> read_trials(const std::filesystem::path& path) {
  std::vector<Trial> trials;
  std::size_t line_no = 0;
  for (const auto& line : lines_of(path)) {
    ++line_no;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 3 || (f[2] != "0" && f[2] != "1"))
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'enroll test 1|0'");
    trials.push_back({f[0], f[1], f[2] == "1"});
  }
  return trials;
}

double round_score(double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  double v = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), v);
  return v;
}

void write_scores(const ScoreSet& scores, const std::filesystem::path& path) {
  scores.validate();
  std::string text;
  char buf[64];
  for (std::size_t t = 0; t < scores.size(); ++t) {
    std::snprintf(buf, sizeof buf, " %.6f\n", scores.scores[t]);
    text += scores.trials[t].enroll_id + ' ' + scores.trials[t].test_id + buf;
  }
  write_text_file(path, text);
}

ScoreSet read_scores(const std::filesystem::path& path, const std::vector<Trial>& trials) {
  ScoreSet out{trials, {}, false};
  std::size_t line_no = 0;
  for (const auto& line : lines_of(path)) {
    ++line_no;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 3)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'enroll test score'");
    const std::size_t t = out.scores.size();
    if (t >= trials.size() || trials[t].enroll_id != f[0] || trials[t].test_id != f[1])
      throw ConsistencyError(path.string() + ":" + std::to_string(line_no) +
                             ": score row does not match the trial list");
    out.scores.push_back(parse_number<double>(f[2], path, line_no));
  }
  if (out.scores.size() != trials.size())
    throw ConsistencyError(path.string() + " has " + std::to_string(out.scores.size()) +
                           " scores for " + std::to_string(trials.size()) + " trials");
  return out;
}

}  // namespace selflabel
