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

#ifndef PLF_DOWNSTREAM_H_
#define PLF_DOWNSTREAM_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plf/common.h"
#include "plf/models.h"

namespace plf {

struct SpeakerRecord {
  std::string id;
  Vector features;
  std::string pathology;
  double intelligibility = 0.0;  // [0, 100]
};

/// Speaker-level folds plus the inner validation fraction.
struct CvPlan {
  std::vector<std::vector<size_t>> folds;  // record indices
  double validation_fraction = 0.2;
  uint64_t seed = 0;
};

constexpr int kNumFolds = 5;

/// Deterministic balanced partition (fold sizes differ by at most one).
/// With `stratify`, records are dealt round-robin within pathology classes.
CvPlan MakeFolds(const std::vector<SpeakerRecord>& records, uint64_t seed, bool stratify = false,
                 int num_folds = kNumFolds);

struct ModelSpace {
  std::vector<ModelPoint> points;  // enumeration order = tie-break order
  /// baseline, ridge/logistic l2 in {0.01, 0.1, 1, 10}, tree depth {2, 4, 8},
  /// MLP hidden {16, 64}.
  static ModelSpace Default(Task task);
};

struct AuditEntry {
  ModelPoint point;
  double metric = 0.0;
  std::string split;  // which partition produced `metric`
};

struct GridResult {
  ModelPoint best;
  double best_metric = 0.0;
  bool fallback_to_train = false;
  std::vector<AuditEntry> audit;
};

/// Task-specific labelled view of a set of records.
struct TaskData {
  Matrix x;
  Vector y;                  // regression targets
  std::vector<int> classes;  // classification targets
  int num_classes = 0;
};

/// Class vocabulary: sorted unique pathology labels.
std::vector<std::string> ClassVocabulary(const std::vector<SpeakerRecord>& records);
TaskData Select(const std::vector<SpeakerRecord>& records, const std::vector<size_t>& rows,
                const std::vector<std::string>& vocabulary);

/// Exhaustive search; RMSE (lower is better) or accuracy (higher is better)
/// on `val`; first in enumeration order wins ties. A single-class validation
/// set falls back to training-set accuracy.
GridResult GridSearch(const TaskData& train, const TaskData& val, const ModelSpace& space, Task task,
                      uint64_t seed);

struct Predictions {
  Vector values;             // regression
  std::vector<int> classes;  // classification
};

Predictions FitPredict(const ModelPoint& point, const TaskData& train, const Matrix& test, Task task,
                       uint64_t seed);

double Rmse(const Vector& predicted, const Vector& truth);
double Accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);
double Evaluate(const Predictions& predicted, const TaskData& truth, Task task);

struct FoldResult {
  int fold = 0;
  std::vector<size_t> train, validation, test;
  GridResult selection;
  double metric = 0.0;
  double baseline_metric = 0.0;
};

struct CvResult {
  Task task = Task::kRegression;
  std::vector<FoldResult> folds;
  double mean_metric = 0.0;
  double mean_baseline = 0.0;
};

CvResult CrossValidate(const std::vector<SpeakerRecord>& records, Task task, const ModelSpace& space,
                       const CvPlan& plan);

/// Throws kValidation if any test speaker also appears in that fold's
/// training or validation data.
void CheckNoLeakage(const std::vector<SpeakerRecord>& records, const FoldResult& fold);

/// Per-fold rows plus a final "mean" row.
void WriteCvResults(const std::filesystem::path& path, const CvResult& result);

/// Dataset manifest columns speaker_id,feature_file,pathology,intelligibility.
/// Each feature file is a CSV with an `id` column; the row matching the
/// speaker is used. `columns` selects feature columns (empty: all but id).
std::vector<SpeakerRecord> LoadSpeakerRecords(const std::filesystem::path& manifest,
                                              const std::vector<std::string>& columns);
/// Feature column names present in a features CSV that match a selector:
/// "histogram", "per" or "all".
std::vector<std::string> SelectFeatureColumns(const std::vector<std::string>& header,
                                              const std::string& selector);

}  // namespace plf

#endif  // PLF_DOWNSTREAM_H_
