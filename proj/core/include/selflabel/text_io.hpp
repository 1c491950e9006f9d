// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selflabel/assignment.hpp"
#include "selflabel/clustering.hpp"
#include "selflabel/scoring.hpp"

namespace selflabel {

/// `sample_id<TAB>label` per line, in the order of `ids`.
void write_assignment(const std::vector<std::string>& ids, const Assignment& assignment,
                      const std::filesystem::path& path);

/// Reads an assignment file and orders it by `ids` (every id must appear
/// exactly once). K is `k` when given, otherwise max label + 1.
Assignment read_assignment(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           std::optional<std::size_t> k = std::nullopt);

/// Assignment file contents in file order.
std::pair<std::vector<std::string>, std::vector<int>> read_assignment_rows(
    const std::filesystem::path& path);

/// `K<TAB>W` per line; W printed with 17 significant digits.
void write_wss_curve(const WssCurve& curve, const std::filesystem::path& path);
WssCurve read_wss_curve(const std::filesystem::path& path);

/// `enroll_id test_id 1|0` per line.
void write_trials(const std::vector<Trial>& trials, const std::filesystem::path& path);
std::vector<Trial> read_trials(const std::filesystem::path& path);

/// `enroll_id test_id score` per line, score with 6 decimals.
void write_scores(const ScoreSet& scores, const std::filesystem::path& path);
/// Keys come from `trials`, which must list the same pairs in the same order.
ScoreSet read_scores(const std::filesystem::path& path, const std::vector<Trial>& trials);

/// Rounds a score the way write_scores prints it.
double round_score(double s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace selflabel
