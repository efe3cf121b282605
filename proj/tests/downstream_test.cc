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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "plf/downstream.h"
#include "plf/models.h"

namespace plf {
namespace {

std::vector<SpeakerRecord> Speakers(int n, uint64_t seed, int dims = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<SpeakerRecord> out;
  for (int i = 0; i < n; ++i) {
    SpeakerRecord r;
    r.id = "s" + std::to_string(i);
    r.features = Vector(dims);
    for (int d = 0; d < dims; ++d) r.features[d] = g(rng);
    r.pathology = i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c");
    r.intelligibility = 50.0;
    out.push_back(r);
  }
  return out;
}

TEST(FoldsTest, BalancedSizes) {
  const CvPlan plan = MakeFolds(Speakers(122, 1), 7);
  std::vector<size_t> sizes;
  for (const auto& f : plan.folds) sizes.push_back(f.size());
  std::sort(sizes.rbegin(), sizes.rend());
  EXPECT_EQ(sizes, (std::vector<size_t>{25, 25, 24, 24, 24}));
  const CvPlan five = MakeFolds(Speakers(5, 1), 7);
  for (const auto& f : five.folds) EXPECT_EQ(f.size(), 1u);
  EXPECT_THROW(MakeFolds(Speakers(4, 1), 7), Error);
}

TEST(FoldsTest, PartitionAndDeterminism) {
  const auto recs = Speakers(37, 2);
  const CvPlan a = MakeFolds(recs, 3), b = MakeFolds(recs, 3), c = MakeFolds(recs, 4);
  EXPECT_EQ(a.folds, b.folds);
  EXPECT_NE(a.folds, c.folds);
  std::multiset<size_t> all;
  for (const auto& f : a.folds) all.insert(f.begin(), f.end());
  EXPECT_EQ(all.size(), 37u);
  EXPECT_EQ(std::set<size_t>(all.begin(), all.end()).size(), 37u);
}

TEST(FoldsTest, StratifiedKeepsClassesSpread) {
  const auto recs = Speakers(30, 3);
  const CvPlan plan = MakeFolds(recs, 5, true);
  for (const auto& f : plan.folds) {
    std::map<std::string, int> counts;
    for (size_t i : f) ++counts[recs[i].pathology];
    for (const auto& [cls, n] : counts) EXPECT_EQ(n, 2) << cls;
  }
}

TEST(MetricsTest, Examples) {
  EXPECT_DOUBLE_EQ(Rmse((Vector(2) << 50, 50).finished(), (Vector(2) << 40, 60).finished()), 10.0);
  EXPECT_EQ(Rmse((Vector(2) << 1, 2).finished(), (Vector(2) << 1, 2).finished()), 0.0);
  EXPECT_DOUBLE_EQ(Accuracy({1, 2, 3}, {1, 2, 0}), 2.0 / 3.0);
  EXPECT_THROW(Rmse(Vector::Zero(2), Vector::Zero(3)), Error);
  EXPECT_THROW(Accuracy({1}, {1, 2}), Error);
}

TEST(ModelsTest, BaselinesAndShrinkage) {
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  const Vector y = (Vector(4) << 10, 20, 30, 60).finished();
  const Matrix test = (Matrix(2, 1) << 0, 9).finished();
  const Vector base = FitPredictRegression({Family::kBaseline}, x, y, test, 0);
  EXPECT_DOUBLE_EQ(base[0], 30.0);
  EXPECT_DOUBLE_EQ(base[1], 30.0);
  const Vector heavy = FitPredictRegression({Family::kRidge, 1e12}, x, y, test, 0);
  EXPECT_NEAR(heavy[0], 30.0, 1e-6);
  const Vector far = FitPredictRegression({Family::kRidge, 0.01}, x, y, (Matrix(1, 1) << 100).finished(), 0);
  EXPECT_EQ(far[0], 100.0);  // clamped
  EXPECT_THROW(FitPredictRegression({Family::kRidge, 0.0}, x, y, test, 0), Error);

  const std::vector<int> cls = {2, 2, 0, 1};
  const auto maj = FitPredictClassification({Family::kBaseline}, x, cls, 3, test, 0);
  EXPECT_EQ(maj, (std::vector<int>{2, 2}));
}

TEST(ModelsTest, TreeFitsStepFunction) {
  Matrix x(40, 1);
  Vector y(40);
  for (int i = 0; i < 40; ++i) x(i, 0) = i, y[i] = i < 20 ? 10 : 90;
  DecisionTree t;
  t.FitRegression(x, y, 2);
  const Vector p = t.Predict(x);
  EXPECT_NEAR((p - y).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_LE(t.depth(), 2);
}

TEST(ModelsTest, ClassifiersSeparateClusters) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.3);
  Matrix x(90, 2);
  std::vector<int> y(90);
  for (int i = 0; i < 90; ++i) {
    y[i] = i % 3;
    x(i, 0) = (y[i] == 1 ? 3.0 : 0.0) + n(rng);
    x(i, 1) = (y[i] == 2 ? 3.0 : 0.0) + n(rng);
  }
  for (const ModelPoint& p : {ModelPoint{Family::kLogistic, 0.1}, ModelPoint{Family::kTree, 0, 4},
                              ModelPoint{Family::kMlp, 1e-4, 0, 16}}) {
    const auto pred = FitPredictClassification(p, x, y, 3, x, 1);
    EXPECT_GE(Accuracy(pred, y), 0.95) << p.ToString();
  }
}

TEST(GridSearchTest, LinearDataSelectsLinearFamily) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  auto make = [&](int rows) {
    TaskData d;
    d.x = Matrix(rows, 4);
    d.y = Vector(rows);
    for (int i = 0; i < rows; ++i) {
      for (int k = 0; k < 4; ++k) d.x(i, k) = n(rng);
      d.y[i] = 50 + 8 * d.x(i, 0) - 5 * d.x(i, 2) + 0.5 * n(rng);
    }
    return d;
  };
  const TaskData train = make(150), val = make(50);
  const GridResult g = GridSearch(train, val, ModelSpace::Default(Task::kRegression), Task::kRegression, 1);
  EXPECT_EQ(g.best.family, Family::kRidge);
  EXPECT_EQ(g.audit.size(), ModelSpace::Default(Task::kRegression).points.size());
  for (const auto& e : g.audit) EXPECT_EQ(e.split, "validation");
}

TEST(GridSearchTest, TiesAndSinglePoint) {
  TaskData d;
  d.x = Matrix::Zero(6, 1);
  d.y = Vector::Constant(6, 40.0);
  ModelSpace one{{ModelPoint{Family::kTree, 0, 2}}};
  EXPECT_EQ(GridSearch(d, d, one, Task::kRegression, 0).best, one.points[0]);
  // Every model predicts the constant: the first in enumeration order wins.
  const ModelSpace space = ModelSpace::Default(Task::kRegression);
  EXPECT_EQ(GridSearch(d, d, space, Task::kRegression, 0).best, space.points[0]);
}

TEST(GridSearchTest, SingleClassValidationFallsBack) {
  TaskData train, val;
  train.x = (Matrix(4, 1) << 0, 0, 1, 1).finished();
  train.classes = {0, 0, 1, 1};
  train.num_classes = 2;
  val.x = (Matrix(2, 1) << 0, 0).finished();
  val.classes = {0, 0};
  val.num_classes = 2;
  const GridResult g =
      GridSearch(train, val, ModelSpace::Default(Task::kClassification), Task::kClassification, 0);
  EXPECT_TRUE(g.fallback_to_train);
  for (const auto& e : g.audit) EXPECT_EQ(e.split, "train");
}

std::vector<SpeakerRecord> LinearSpeakers(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto recs = Speakers(n, seed, 3);
  for (auto& r : recs) r.intelligibility = std::clamp(50 + 10 * r.features[0] + 2 * g(rng), 0.0, 100.0);
  return recs;
}

TEST(CrossValidateTest, NoLeakageAndReasonableError) {
  const auto recs = LinearSpeakers(100, 7);
  const CvPlan plan = MakeFolds(recs, 1);
  const CvResult cv = CrossValidate(recs, Task::kRegression, ModelSpace::Default(Task::kRegression), plan);
  ASSERT_EQ(cv.folds.size(), 5u);
  for (const auto& f : cv.folds) {
    EXPECT_NO_THROW(CheckNoLeakage(recs, f));
    EXPECT_EQ(f.train.size() + f.validation.size() + f.test.size(), 100u);
    EXPECT_EQ(f.test.size(), 20u);
    EXPECT_EQ(f.validation.size(), 16u);
  }
  EXPECT_LT(cv.mean_metric, 3.0);
  EXPECT_GT(cv.mean_baseline, 7.0);
}

TEST(CrossValidateTest, LeakageIsDetected) {
  const auto recs = LinearSpeakers(20, 8);
  const CvResult cv = CrossValidate(recs, Task::kRegression, ModelSpace{{ModelPoint{}}}, MakeFolds(recs, 1));
  FoldResult bad = cv.folds[0];
  bad.train.push_back(bad.test[0]);
  EXPECT_THROW(CheckNoLeakage(recs, bad), Error);
  // A different record index carrying the same speaker id also counts.
  auto dup = recs;
  FoldResult alias = cv.folds[0];
  dup[alias.train[0]].id = dup[alias.test[0]].id;
  EXPECT_THROW(CheckNoLeakage(dup, alias), Error);
}

TEST(CrossValidateTest, ClassificationBaselineIsTrainMajority) {
  auto recs = Speakers(50, 9);
  for (size_t i = 0; i < recs.size(); ++i) recs[i].pathology = i < 30 ? "x" : "y";
  const CvPlan plan = MakeFolds(recs, 2);
  const CvResult cv = CrossValidate(recs, Task::kClassification, ModelSpace{{ModelPoint{}}}, plan);
  for (const auto& f : cv.folds) {
    std::map<std::string, int> train_counts;
    for (size_t i : f.train) ++train_counts[recs[i].pathology];
    for (size_t i : f.validation) ++train_counts[recs[i].pathology];
    const std::string majority = train_counts["x"] >= train_counts["y"] ? "x" : "y";
    int hits = 0;
    for (size_t i : f.test) hits += recs[i].pathology == majority;
    EXPECT_DOUBLE_EQ(f.baseline_metric, double(hits) / f.test.size());
  }
}

TEST(CrossValidateTest, RejectsOutOfRangeTargets) {
  auto recs = LinearSpeakers(10, 10);
  recs[3].intelligibility = 101.0;
  EXPECT_THROW(CrossValidate(recs, Task::kRegression, ModelSpace{{ModelPoint{}}}, MakeFolds(recs, 1)),
               Error);
}

TEST(FeatureColumnsTest, Selectors) {
  const std::vector<std::string> header = {"id", "per", "ins_rate", "del_rate", "sub_rate", "Nasal_L0",
                                           "Nasal_H0"};
  EXPECT_EQ(SelectFeatureColumns(header, "per").size(), 4u);
  EXPECT_EQ(SelectFeatureColumns(header, "histogram"), (std::vector<std::string>{"Nasal_L0", "Nasal_H0"}));
  EXPECT_EQ(SelectFeatureColumns(header, "all").size(), 6u);
}

}  // namespace
}  // namespace plf
