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

#include "plf/downstream.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "plf/features.h"

namespace plf {

namespace fs = std::filesystem;

CvPlan MakeFolds(const std::vector<SpeakerRecord>& records, uint64_t seed, bool stratify,
                 int num_folds) {
  if (num_folds < 2) throw Error(ErrorKind::kConfig, "need at least two folds");
  if (records.size() < static_cast<size_t>(num_folds))
    throw Error(ErrorKind::kInsufficientData, std::to_string(records.size()) + " speakers for " +
                                                  std::to_string(num_folds) + " folds");
  std::vector<size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(DeriveSeed(seed, "folds"));
  std::shuffle(order.begin(), order.end(), rng);
  if (stratify) {
    std::stable_sort(order.begin(), order.end(), [&records](size_t a, size_t b) {
      return records[a].pathology < records[b].pathology;
    });
  }
  CvPlan plan;
  plan.seed = seed;
  plan.folds.resize(num_folds);
  if (stratify) {
    for (size_t i = 0; i < order.size(); ++i) plan.folds[i % num_folds].push_back(order[i]);
  } else {
    const size_t base = order.size() / num_folds, extra = order.size() % num_folds;
    size_t pos = 0;
    for (int k = 0; k < num_folds; ++k) {
      const size_t size = base + (static_cast<size_t>(k) < extra ? 1 : 0);
      plan.folds[k].assign(order.begin() + pos, order.begin() + pos + size);
      pos += size;
    }
  }
  return plan;
}

ModelSpace ModelSpace::Default(Task task) {
  ModelSpace s;
  s.points.push_back({Family::kBaseline});
  const Family linear = task == Task::kRegression ? Family::kRidge : Family::kLogistic;
  for (double l2 : {0.01, 0.1, 1.0, 10.0}) s.points.push_back({linear, l2});
  for (int depth : {2, 4, 8}) s.points.push_back({Family::kTree, 0.0, depth});
  for (int hidden : {16, 64}) s.points.push_back({Family::kMlp, 0.0, 0, hidden});
  return s;
}

std::vector<std::string> ClassVocabulary(const std::vector<SpeakerRecord>& records) {
  std::set<std::string> v;
  for (const auto& r : records) v.insert(r.pathology);
  return {v.begin(), v.end()};
}

TaskData Select(const std::vector<SpeakerRecord>& records, const std::vector<size_t>& rows,
                const std::vector<std::string>& vocabulary) {
  TaskData d;
  d.num_classes = static_cast<int>(vocabulary.size());
  if (rows.empty()) return d;
  const Eigen::Index dim = records[rows.front()].features.size();
  d.x.resize(static_cast<Eigen::Index>(rows.size()), dim);
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = records[rows[i]];
    if (r.features.size() != dim)
      throw Error(ErrorKind::kDimension, "speaker " + r.id + " has inconsistent feature dimension");
    d.x.row(i) = r.features.transpose();
    d.y[i] = r.intelligibility;
    const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), r.pathology);
    if (it == vocabulary.end() || *it != r.pathology)
      throw Error(ErrorKind::kValidation, "pathology '" + r.pathology + "' not in vocabulary");
    d.classes.push_back(static_cast<int>(it - vocabulary.begin()));
  }
  return d;
}

Predictions FitPredict(const ModelPoint& point, const TaskData& train, const Matrix& test, Task task,
                       uint64_t seed) {
  Predictions p;
  if (task == Task::kRegression)
    p.values = FitPredictRegression(point, train.x, train.y, test, seed);
  else
    p.classes = FitPredictClassification(point, train.x, train.classes, train.num_classes, test, seed);
  return p;
}

double Rmse(const Vector& predicted, const Vector& truth) {
  if (predicted.size() != truth.size() || truth.size() == 0)
    throw Error(ErrorKind::kDimension, "prediction and truth lengths differ or are empty");
  return std::sqrt((predicted - truth).squaredNorm() / double(truth.size()));
}

double Accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw Error(ErrorKind::kDimension, "prediction and truth lengths differ or are empty");
  size_t hits = 0;
  for (size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return double(hits) / double(truth.size());
}

double Evaluate(const Predictions& predicted, const TaskData& truth, Task task) {
  return task == Task::kRegression ? Rmse(predicted.values, truth.y)
                                   : Accuracy(predicted.classes, truth.classes);
}

GridResult GridSearch(const TaskData& train, const TaskData& val, const ModelSpace& space, Task task,
                      uint64_t seed) {
  if (space.points.empty()) throw Error(ErrorKind::kConfig, "empty model space");
  if (train.x.rows() == 0 || val.x.rows() == 0)
    throw Error(ErrorKind::kInsufficientData, "grid search needs non-empty train and validation sets");
  GridResult result;
  const TaskData* scored = &val;
  std::string split = "validation";
  if (task == Task::kClassification &&
      std::set<int>(val.classes.begin(), val.classes.end()).size() < 2) {
    std::cerr << "warning: validation set has a single class; selecting on training accuracy\n";
    result.fallback_to_train = true;
    scored = &train;
    split = "train";
  }
  bool first = true;
  for (size_t i = 0; i < space.points.size(); ++i) {
    const ModelPoint& point = space.points[i];
    const Predictions p = FitPredict(point, train, scored->x, task, DeriveSeed(seed, point.ToString()));
    const double metric = Evaluate(p, *scored, task);
    result.audit.push_back({point, metric, split});
    const bool better = task == Task::kRegression ? metric < result.best_metric
                                                  : metric > result.best_metric;
    if (first || better) {
      result.best = point;
      result.best_metric = metric;
      first = false;
    }
  }
  return result;
}

void CheckNoLeakage(const std::vector<SpeakerRecord>& records, const FoldResult& fold) {
  std::set<std::string> seen;
  for (size_t i : fold.train) seen.insert(records[i].id);
  for (size_t i : fold.validation) seen.insert(records[i].id);
  for (size_t i : fold.test)
    if (seen.count(records[i].id))
      throw Error(ErrorKind::kValidation, "speaker " + records[i].id + " leaks into fold " +
                                              std::to_string(fold.fold) + " training data");
}

CvResult CrossValidate(const std::vector<SpeakerRecord>& records, Task task, const ModelSpace& space,
                       const CvPlan& plan) {
  if (task == Task::kRegression)
    for (const auto& r : records)
      if (!(r.intelligibility >= 0.0 && r.intelligibility <= 100.0))
        throw Error(ErrorKind::kValidation, "speaker " + r.id + " intelligibility outside [0,100]");
  const auto vocabulary = ClassVocabulary(records);
  CvResult result;
  result.task = task;
  for (size_t k = 0; k < plan.folds.size(); ++k) {
    FoldResult fold;
    fold.fold = static_cast<int>(k);
    fold.test = plan.folds[k];
    std::vector<size_t> rest;
    for (size_t j = 0; j < plan.folds.size(); ++j)
      if (j != k) rest.insert(rest.end(), plan.folds[j].begin(), plan.folds[j].end());
    std::mt19937_64 rng(DeriveSeed(plan.seed, "inner-" + std::to_string(k)));
    std::shuffle(rest.begin(), rest.end(), rng);
    const size_t n_val = std::clamp<size_t>(
        static_cast<size_t>(std::lround(plan.validation_fraction * double(rest.size()))), 1,
        rest.size() - 1);
    fold.validation.assign(rest.begin(), rest.begin() + n_val);
    fold.train.assign(rest.begin() + n_val, rest.end());
    CheckNoLeakage(records, fold);

    const uint64_t fold_seed = DeriveSeed(plan.seed, "fold-" + std::to_string(k));
    fold.selection = GridSearch(Select(records, fold.train, vocabulary),
                                Select(records, fold.validation, vocabulary), space, task, fold_seed);
    const TaskData full_train = Select(records, rest, vocabulary);
    const TaskData test = Select(records, fold.test, vocabulary);
    const ModelPoint& best = fold.selection.best;
    fold.metric = Evaluate(FitPredict(best, full_train, test.x, task, DeriveSeed(fold_seed, best.ToString())),
                           test, task);
    fold.baseline_metric =
        Evaluate(FitPredict({Family::kBaseline}, full_train, test.x, task, 0), test, task);
    result.mean_metric += fold.metric;
    result.mean_baseline += fold.baseline_metric;
    result.folds.push_back(std::move(fold));
  }
  result.mean_metric /= double(result.folds.size());
  result.mean_baseline /= double(result.folds.size());
  return result;
}

void WriteCvResults(const fs::path& path, const CvResult& result) {
  CsvTable t;
  const std::string metric = result.task == Task::kRegression ? "rmse" : "accuracy";
  t.header = {"fold", "family", "hyperparameters", metric, "baseline_" + metric};
  for (const auto& f : result.folds)
    t.rows.push_back({std::to_string(f.fold), FamilyName(f.selection.best.family),
                      f.selection.best.ToString(), FormatDouble(f.metric),
                      FormatDouble(f.baseline_metric)});
  t.rows.push_back({"mean", "", "", FormatDouble(result.mean_metric), FormatDouble(result.mean_baseline)});
  WriteCsv(path, t);
}

std::vector<std::string> SelectFeatureColumns(const std::vector<std::string>& header,
                                              const std::string& selector) {
  std::vector<std::string> out;
  const auto& per = PerColumnNames();
  for (const auto& h : header) {
    if (h == "id") continue;
    const bool is_per = std::find(per.begin(), per.end(), h) != per.end();
    bool is_hist = false;
    for (const auto& b : BinLabels())
      if (h.size() > b.size() + 1 && h.compare(h.size() - b.size() - 1, std::string::npos, "_" + b) == 0)
        is_hist = true;
    if (selector == "all" || (selector == "per" && is_per) || (selector == "histogram" && is_hist))
      out.push_back(h);
  }
  if (selector != "all" && selector != "per" && selector != "histogram")
    throw Error(ErrorKind::kConfig, "unknown feature selector '" + selector + "'");
  if (out.empty()) throw Error(ErrorKind::kValidation, "no '" + selector + "' feature columns found");
  return out;
}

std::vector<SpeakerRecord> LoadSpeakerRecords(const fs::path& manifest,
                                              const std::vector<std::string>& columns) {
  const CsvTable table = ReadCsv(manifest);
  const size_t c_spk = table.Column("speaker_id"), c_file = table.Column("feature_file"),
               c_path = table.Column("pathology"), c_int = table.Column("intelligibility");
  std::map<std::string, CsvTable> cache;
  std::vector<SpeakerRecord> out;
  std::set<std::string> ids;
  for (const auto& row : table.rows) {
    SpeakerRecord r;
    r.id = row[c_spk];
    if (!ids.insert(r.id).second) throw Error(ErrorKind::kValidation, "duplicate speaker " + r.id);
    fs::path file(row[c_file]);
    if (file.is_relative()) file = manifest.parent_path() / file;
    auto it = cache.find(file.string());
    if (it == cache.end()) it = cache.emplace(file.string(), ReadCsv(file)).first;
    const CsvTable& feats = it->second;
    const size_t c_id = feats.Column("id");
    const std::vector<std::string> cols = columns.empty() ? SelectFeatureColumns(feats.header, "all") : columns;
    const CsvRow* match = nullptr;
    for (const auto& fr : feats.rows)
      if (fr[c_id] == r.id) match = &fr;
    if (!match) throw Error(ErrorKind::kValidation, "no feature row for speaker " + r.id);
    r.features.resize(static_cast<Eigen::Index>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) r.features[i] = ParseDouble((*match)[feats.Column(cols[i])]);
    r.pathology = row[c_path];
    r.intelligibility = ParseDouble(row[c_int]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace plf
