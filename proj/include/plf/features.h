// Copyright 2026  The PLF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PLF_FEATURES_H_
#define PLF_FEATURES_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "plf/common.h"
#include "plf/objective.h"

namespace plf {

/// Ordered phone indices, no frame duplication.
using PhoneSequence = std::vector<int>;

/// Framewise argmax (ties to the lower phone index), consecutive duplicates
/// collapsed, and `silence` (if >= 0) removed.
PhoneSequence DecodePhones(const PhoneScores& scores, int silence = -1);

struct AlignmentCounts {
  int insertions = 0;
  int deletions = 0;
  int substitutions = 0;
  int ref_length = 0;
  int distance() const { return insertions + deletions + substitutions; }
};

/// Unit-cost Levenshtein alignment. Among minimal alignments the backtrace
/// prefers substitution (or match), then deletion, then insertion.
AlignmentCounts Align(std::span<const int> ref, std::span<const int> hyp);

/// Rates relative to the reference length. `per` can exceed 1 via insertions.
struct PerFeature {
  double per = 0.0;
  double ins_rate = 0.0;
  double del_rate = 0.0;
  double sub_rate = 0.0;
};

PerFeature PerFeatures(std::span<const int> ref, std::span<const int> hyp);
const std::vector<std::string>& PerColumnNames();

constexpr int kHistogramBins = 20;
constexpr int kBinsPerPlf = 7;
/// Bin labels in feature order.
const std::array<std::string, kBinsPerPlf>& BinLabels();

/// F x 7 matrix, columns (L0, L1, L2, M, H2, H1, H0).
struct HistogramFeature {
  Matrix values;
  /// Row-major flattening: PLF-major, bins in label order.
  Vector Flatten() const;
};

/// 20-bin histogram of sigmoid(logit) on [0, 1] per PLF row, normalized by T.
HistogramFeature PlfHistogram(const PlfLogits& logits);
/// Column names "<PLF>_<bin>".
std::vector<std::string> HistogramColumnNames(const std::vector<std::string>& plf_names);

/// Pearson correlation. Throws kUndefined on zero variance, kDimension on
/// length mismatch or fewer than two points.
double Pcc(std::span<const double> x, std::span<const double> y);

struct CorrelationRow {
  std::string plf;
  double mean_r = 0.0;
  double bin_r = 0.0;
  std::string bin_label;  // empty when every bin is constant across utterances
};

/// Per PLF: PCC of the mean frame logit with the scores, and the histogram
/// bin with the largest |PCC| (ties keep the earlier bin).
std::vector<CorrelationRow> CorrelationReport(const std::vector<PlfLogits>& utterances,
                                              std::span<const double> scores,
                                              const std::vector<std::string>& plf_names);
void WriteCorrelationCsv(const std::filesystem::path& path, const std::vector<CorrelationRow>& rows);

}  // namespace plf

#endif  // PLF_FEATURES_H_
