// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <span>
#include <vector>

#include "selflabel/assignment.hpp"
#include "selflabel/scoring.hpp"

namespace selflabel {

/// Normalized mutual information with arithmetic-mean normalization and
/// natural logs: I(a;b) / ((H(a) + H(b)) / 2). Two constant labelings
/// score 1. Label values are arbitrary integers (ground-truth identities
/// are fine). Symmetric bit-for-bit.
double nmi(std::span<const int> a, std::span<const int> b);
inline double nmi(const Assignment& a, const Assignment& b) { return nmi(a.labels, b.labels); }

/// One point of the ROC staircase: accept every trial scoring >= threshold.
struct OperatingPoint {
  double threshold = 0.0;  // +inf for the reject-all point
  double p_miss = 0.0;
  double p_fa = 0.0;
};

/// All operating points in ascending threshold order: one per distinct
/// score (ties share a point) plus the reject-all point. Throws
/// ArgumentError unless both target and nontarget trials are present.
std::vector<OperatingPoint> operating_points(const ScoreSet& scores);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// Equal error rate. At the first operating point where P_miss >= P_fa the
/// rates either coincide (that point is returned) or the crossing is
/// linearly interpolated on the segment from the previous point.
EerResult eer(const ScoreSet& scores);

struct DcfParams {
  double p_target = 0.05;
  double c_miss = 1.0;
  double c_fa = 1.0;
  void validate() const;
};

struct DcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;
};

/// Minimum over operating points of the normalized detection cost
/// (c_miss p P_miss + c_fa (1-p) P_fa) / min(c_miss p, c_fa (1-p)).
/// Ties keep the highest threshold.
DcfResult min_dcf(const ScoreSet& scores, const DcfParams& params = {});

}  // namespace selflabel
