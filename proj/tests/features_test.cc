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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "plf/features.h"

namespace plf {
namespace {

PhoneScores ScoresFromArgmax(const std::vector<int>& argmax, int phones) {
  Matrix s = Matrix::Zero(phones, static_cast<Eigen::Index>(argmax.size()));
  for (size_t t = 0; t < argmax.size(); ++t) s(argmax[t], static_cast<Eigen::Index>(t)) = 1.0;
  return {s};
}

TEST(DecodeTest, CollapsesAndRemovesSilence) {
  EXPECT_EQ(DecodePhones(ScoresFromArgmax({0, 0, 0, 1, 1}, 3)), (PhoneSequence{0, 1}));
  EXPECT_EQ(DecodePhones(ScoresFromArgmax({2}, 3)), (PhoneSequence{2}));
  EXPECT_EQ(DecodePhones(ScoresFromArgmax({2, 0, 0, 2, 1, 1, 2}, 3), 2), (PhoneSequence{0, 1}));
  Matrix tie(2, 1);
  tie << 0.5, 0.5;
  EXPECT_EQ(DecodePhones(PhoneScores{tie}), (PhoneSequence{0}));
}

TEST(DecodeTest, IdempotentOnRepeatedFrames) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> frames;
    for (int k = 0; k < 15; ++k) frames.insert(frames.end(), 1 + rng() % 4, static_cast<int>(rng() % 5));
    const PhoneSequence once = DecodePhones(ScoresFromArgmax(frames, 5));
    std::vector<int> repeated;
    for (int p : once) repeated.insert(repeated.end(), 3, p);
    EXPECT_EQ(DecodePhones(ScoresFromArgmax(repeated, 5)), once);
  }
}

TEST(AlignTest, Examples) {
  const std::vector<int> abc = {0, 1, 2};
  AlignmentCounts c = Align(abc, abc);
  EXPECT_EQ(c.distance(), 0);
  EXPECT_EQ(c.ref_length, 3);
  c = Align(abc, std::vector<int>{});
  EXPECT_EQ(c.deletions, 3);
  EXPECT_EQ(c.insertions + c.substitutions, 0);
  EXPECT_THROW(Align(std::vector<int>{}, abc), Error);
}

TEST(AlignTest, AgreesWithOracleAndIsSymmetric) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const int alphabet = 1 + static_cast<int>(rng() % 10);
    std::vector<int> a(1 + rng() % 30), b(rng() % 31);
    for (int& x : a) x = static_cast<int>(rng() % alphabet);
    for (int& x : b) x = static_cast<int>(rng() % alphabet);
    const AlignmentCounts c = Align(a, b);
    ASSERT_EQ(c.distance(), oracle::EditDistance(a, b));
    if (!b.empty()) {
      const AlignmentCounts r = Align(b, a);
      EXPECT_EQ(r.distance(), c.distance());
    }
  }
}

TEST(AlignTest, PrefersSubstitution) {
  // [a] vs [b]: one substitution rather than a deletion plus an insertion.
  const AlignmentCounts c = Align(std::vector<int>{0}, std::vector<int>{1});
  EXPECT_EQ(c.substitutions, 1);
  EXPECT_EQ(c.insertions + c.deletions, 0);
}

TEST(PerTest, Examples) {
  PerFeature f = PerFeatures(std::vector<int>{0, 1}, std::vector<int>{0, 1});
  EXPECT_EQ(f.per, 0.0);
  f = PerFeatures(std::vector<int>{0}, std::vector<int>{1, 1});
  EXPECT_DOUBLE_EQ(f.per, 2.0);
  EXPECT_DOUBLE_EQ(f.ins_rate, 1.0);
  EXPECT_DOUBLE_EQ(f.sub_rate, 1.0);
  EXPECT_EQ(f.del_rate, 0.0);
  f = PerFeatures(std::vector<int>{0, 1, 2, 3}, std::vector<int>{0, 9, 2});
  EXPECT_DOUBLE_EQ(f.per, 0.5);
  EXPECT_DOUBLE_EQ(f.del_rate, 0.25);
  EXPECT_DOUBLE_EQ(f.sub_rate, 0.25);
  EXPECT_EQ(f.ins_rate, 0.0);
  f = PerFeatures(std::vector<int>{4, 5, 6}, std::vector<int>{});
  EXPECT_DOUBLE_EQ(f.per, 1.0);
  EXPECT_EQ(PerColumnNames(), (std::vector<std::string>{"per", "ins_rate", "del_rate", "sub_rate"}));
}

PlfLogits Constant(Eigen::Index f, Eigen::Index t, double v) { return {Matrix::Constant(f, t, v)}; }

TEST(HistogramTest, Examples) {
  HistogramFeature h = PlfHistogram(Constant(3, 10, 0.0));
  for (Eigen::Index f = 0; f < 3; ++f)
    EXPECT_EQ(h.values.row(f), (RowVector(7) << 0, 0, 0, 1, 0, 0, 0).finished());
  h = PlfHistogram(Constant(2, 4, 50.0));
  EXPECT_EQ(h.values.row(1), (RowVector(7) << 0, 0, 0, 0, 0, 0, 1).finished());
  Matrix half(1, 6);
  half << -50, 50, -50, 50, -50, 50;
  h = PlfHistogram(PlfLogits{half});
  EXPECT_EQ(h.values.row(0), (RowVector(7) << 0.5, 0, 0, 0, 0, 0, 0.5).finished());
  EXPECT_THROW(PlfHistogram(PlfLogits{Matrix(2, 0)}), Error);
}

TEST(HistogramTest, MatchesOracleAndSumsToOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix v(4, 37);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
    const HistogramFeature h = PlfHistogram(PlfLogits{v});
    for (Eigen::Index f = 0; f < 4; ++f) {
      std::vector<double> row(v.row(f).data(), v.row(f).data() + v.cols());
      const auto want = oracle::SevenBins(row);
      for (int k = 0; k < 7; ++k) EXPECT_NEAR(h.values(f, k), want[k], 1e-12);
      EXPECT_NEAR(h.values.row(f).sum(), 1.0, 1e-9);
      EXPECT_GE(h.values.row(f).minCoeff(), 0.0);
    }
  }
}

TEST(HistogramTest, FlattenAndNames) {
  Matrix v(2, 3);
  v << 50, 50, 50, -50, -50, -50;
  const Vector flat = PlfHistogram(PlfLogits{v}).Flatten();
  ASSERT_EQ(flat.size(), 14);
  EXPECT_EQ(flat[6], 1.0);
  EXPECT_EQ(flat[7], 1.0);
  const auto names = HistogramColumnNames({"Nasal", "Voiced"});
  ASSERT_EQ(names.size(), 14u);
  EXPECT_EQ(names[0], "Nasal_L0");
  EXPECT_EQ(names[3], "Nasal_M");
  EXPECT_EQ(names[13], "Voiced_H0");
}

TEST(PccTest, Properties) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(40), y(40), neg(40), affine(40);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = 0.5 * x[i] + n(rng);
    neg[i] = -x[i];
    affine[i] = 2 * x[i] + 3;
  }
  EXPECT_NEAR(Pcc(x, x), 1.0, 1e-12);
  EXPECT_NEAR(Pcc(x, neg), -1.0, 1e-12);
  EXPECT_NEAR(Pcc(affine, y), Pcc(x, y), 1e-12);
  EXPECT_NEAR(Pcc(x, y), oracle::Pearson(x, y), 1e-12);
  EXPECT_THROW(Pcc(std::vector<double>(5, 1.0), std::vector<double>{1, 2, 3, 4, 5}), Error);
  EXPECT_THROW(Pcc(std::vector<double>{1.0}, std::vector<double>{2.0}), Error);
  EXPECT_THROW(Pcc(x, std::vector<double>(3, 0.0)), Error);
}

TEST(CorrelationReportTest, FindsPlantedBin) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PlfLogits> utts;
  std::vector<double> scores;
  for (int k = 0; k < 60; ++k) {
    Matrix v(2, 100);
    const double strength = u(rng);
    for (Eigen::Index t = 0; t < 100; ++t) {
      v(0, t) = u(rng) < strength ? 8.0 + 0.1 * n(rng) : 1.5 * n(rng);
      v(1, t) = n(rng);
    }
    const double h0 = PlfHistogram(PlfLogits{v}).values(0, 6);
    utts.push_back({v});
    scores.push_back(100 * h0 + 2 * n(rng));
  }
  const auto rows = CorrelationReport(utts, scores, {"Target", "Noise"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].plf, "Target");
  EXPECT_EQ(rows[0].bin_label, "H0");
  EXPECT_GT(rows[0].bin_r, 0.9);
  EXPECT_THROW(CorrelationReport(utts, std::vector<double>(60, 3.0), {"Target", "Noise"}), Error);
}

TEST(CorrelationReportTest, TwoUtterancesGiveUnitCorrelation) {
  Matrix a(1, 4), b(1, 4);
  a << -5, -5, 5, 5;
  b << 5, 5, 5, 5;
  const auto rows = CorrelationReport({PlfLogits{a}, PlfLogits{b}}, std::vector<double>{10, 20}, {"X"});
  EXPECT_NEAR(std::abs(rows[0].mean_r), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(rows[0].bin_r), 1.0, 1e-12);
}

}  // namespace
}  // namespace plf
