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

#include "plf/features.h"

#include <algorithm>
#include <cmath>

namespace plf {

PhoneSequence DecodePhones(const PhoneScores& scores, int silence) {
  const Matrix& s = scores.values;  // P x T
  PhoneSequence out;
  int previous = -1;
  for (Eigen::Index t = 0; t < s.cols(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index p = 1; p < s.rows(); ++p)
      if (s(p, t) > s(best, t)) best = p;
    const int phone = static_cast<int>(best);
    if (phone != previous && phone != silence) out.push_back(phone);
    previous = phone;
  }
  return out;
}

AlignmentCounts Align(std::span<const int> ref, std::span<const int> hyp) {
  if (ref.empty()) throw Error(ErrorKind::kUndefined, "error rate undefined for an empty reference");
  const size_t n = ref.size(), m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&d, m](size_t i, size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]), at(i - 1, j) + 1,
                           at(i, j - 1) + 1});

  AlignmentCounts c;
  c.ref_length = static_cast<int>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const int cost = ref[i - 1] != hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + cost) {
        c.substitutions += cost;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

PerFeature PerFeatures(std::span<const int> ref, std::span<const int> hyp) {
  const AlignmentCounts c = Align(ref, hyp);
  const double n = c.ref_length;
  PerFeature f;
  f.ins_rate = c.insertions / n;
  f.del_rate = c.deletions / n;
  f.sub_rate = c.substitutions / n;
  f.per = c.distance() / n;
  return f;
}

const std::vector<std::string>& PerColumnNames() {
  static const std::vector<std::string> names = {"per", "ins_rate", "del_rate", "sub_rate"};
  return names;
}

const std::array<std::string, kBinsPerPlf>& BinLabels() {
  static const std::array<std::string, kBinsPerPlf> labels = {"L0", "L1", "L2", "M",
                                                             "H2", "H1", "H0"};
  return labels;
}

Vector HistogramFeature::Flatten() const {
  return Eigen::Map<const Vector>(values.data(), values.size());
}

HistogramFeature PlfHistogram(const PlfLogits& logits) {
  const Matrix& v = logits.values;  // F x T
  if (v.cols() < 1) throw Error(ErrorKind::kEmptyInput, "histogram needs at least one frame");
  HistogramFeature h;
  h.values = Matrix::Zero(v.rows(), kBinsPerPlf);
  const double frames = double(v.cols());
  for (Eigen::Index f = 0; f < v.rows(); ++f) {
    std::array<long, kHistogramBins> counts{};
    for (Eigen::Index t = 0; t < v.cols(); ++t) {
      const double x = v(f, t);
      const double act = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      const int bin = std::min(kHistogramBins - 1, static_cast<int>(act * kHistogramBins));
      ++counts[bin];
    }
    auto row = h.values.row(f);
    row[0] = counts[0] / frames;
    row[1] = counts[1] / frames;
    row[2] = counts[2] / frames;
    row[4] = counts[kHistogramBins - 3] / frames;
    row[5] = counts[kHistogramBins - 2] / frames;
    row[6] = counts[kHistogramBins - 1] / frames;
    row[3] = 1.0 - (row[0] + row[1] + row[2] + row[4] + row[5] + row[6]);
  }
  return h;
}

std::vector<std::string> HistogramColumnNames(const std::vector<std::string>& plf_names) {
  std::vector<std::string> out;
  for (const auto& n : plf_names)
    for (const auto& b : BinLabels()) out.push_back(n + "_" + b);
  return out;
}

double Pcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kDimension, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorKind::kDimension, "correlation needs at least two points");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // Relative threshold so values that differ only by rounding count as constant.
  const double tol = 1e-24;
  if (sxx <= tol * std::max(1.0, mx * mx * n) || syy <= tol * std::max(1.0, my * my * n))
    throw Error(ErrorKind::kUndefined, "correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrelationRow> CorrelationReport(const std::vector<PlfLogits>& utterances,
                                              std::span<const double> scores,
                                              const std::vector<std::string>& plf_names) {
  if (utterances.size() < 2) throw Error(ErrorKind::kInsufficientData, "need at least two utterances");
  if (utterances.size() != scores.size())
    throw Error(ErrorKind::kDimension, "one score per utterance is required");
  const size_t n = utterances.size(), num_plfs = plf_names.size();
  std::vector<HistogramFeature> hists;
  for (const auto& u : utterances) {
    if (static_cast<size_t>(u.values.rows()) != num_plfs)
      throw Error(ErrorKind::kDimension, "logit rows do not match the PLF inventory");
    hists.push_back(PlfHistogram(u));
  }
  // Undefined for constant scores regardless of features.
  {
    double lo = scores[0], hi = scores[0];
    for (double s : scores) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (lo == hi) throw Error(ErrorKind::kUndefined, "correlation undefined for constant scores");
  }
  std::vector<CorrelationRow> rows;
  std::vector<double> feature(n);
  for (size_t f = 0; f < num_plfs; ++f) {
    CorrelationRow row;
    row.plf = plf_names[f];
    for (size_t u = 0; u < n; ++u) feature[u] = utterances[u].values.row(f).mean();
    row.mean_r = Pcc(feature, scores);
    double best = -1.0;
    for (int b = 0; b < kBinsPerPlf; ++b) {
      for (size_t u = 0; u < n; ++u) feature[u] = hists[u].values(f, b);
      double r;
      try {
        r = Pcc(feature, scores);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kUndefined) throw;
        continue;  // bin constant across utterances
      }
      if (std::abs(r) > best) {
        best = std::abs(r);
        row.bin_r = r;
        row.bin_label = BinLabels()[b];
      }
    }
    if (row.bin_label.empty()) row.bin_r = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

void WriteCorrelationCsv(const std::filesystem::path& path, const std::vector<CorrelationRow>& rows) {
  CsvTable t;
  t.header = {"PLF", "mean_r", "bin_r", "bin_label"};
  for (const auto& r : rows)
    t.rows.push_back({r.plf, FormatDouble(r.mean_r), FormatDouble(r.bin_r), r.bin_label});
  WriteCsv(path, t);
}

}  // namespace plf
