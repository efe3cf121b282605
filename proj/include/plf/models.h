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

#ifndef PLF_MODELS_H_
#define PLF_MODELS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "plf/common.h"

namespace plf {

enum class Task { kRegression, kClassification };
enum class Family { kBaseline, kRidge, kLogistic, kTree, kMlp };

const char* FamilyName(Family f);
const char* TaskName(Task t);

struct ModelPoint {
  Family family = Family::kBaseline;
  double l2 = 0.0;    // ridge / logistic penalty
  int max_depth = 0;  // tree
  int hidden = 0;     // MLP hidden units (one layer)

  /// e.g. "ridge(l2=0.1)".
  std::string ToString() const;
  bool operator==(const ModelPoint&) const = default;
};

/// Z-score statistics from training rows; constant columns keep scale 1.
struct Standardizer {
  RowVector mean;
  RowVector scale;
  static Standardizer Fit(const Matrix& x);
  Matrix Apply(const Matrix& x) const;
};

/// Fits on (x_train, y_train) and predicts x_test. Features are standardized
/// with training statistics. Ridge is always regularized.
Vector FitPredictRegression(const ModelPoint& point, const Matrix& x_train, const Vector& y_train,
                            const Matrix& x_test, uint64_t seed);
std::vector<int> FitPredictClassification(const ModelPoint& point, const Matrix& x_train,
                                          const std::vector<int>& y_train, int num_classes,
                                          const Matrix& x_test, uint64_t seed);

/// CART with axis-aligned midpoint splits; variance reduction for regression,
/// Gini impurity for classification.
class DecisionTree {
 public:
  void FitRegression(const Matrix& x, const Vector& y, int max_depth);
  void FitClassification(const Matrix& x, const std::vector<int>& y, int num_classes, int max_depth);
  /// Regression value or class index (as double) per row.
  Vector Predict(const Matrix& x) const;
  int depth() const;

 private:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  int Build(const Matrix& x, const Vector& y, std::vector<int>& rows, int depth, int max_depth,
            bool classify, int num_classes);
  std::vector<Node> nodes_;
};

}  // namespace plf

#endif  // PLF_MODELS_H_
