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

#ifndef PLF_OBJECTIVE_H_
#define PLF_OBJECTIVE_H_

#include <span>
#include <vector>

#include "plf/common.h"
#include "plf/model.h"
#include "plf/phonology.h"

namespace plf {

/// Floor applied to log P(f|p) before compression.
constexpr double kMinLogPosterior = -27.631021115928547;  // log(1e-12)

/// P(f|p): sigmoid(v) when the expected value is nonnegative, sigmoid(-v) otherwise.
double PlfPosterior(double logit, double expected);

/// Weighted mean of the members' posteriors using the phone's (nonnegative)
/// weights in `weights`. Returns 0 when the group is inactive for the phone.
double GroupedPosterior(std::span<const double> logits, const PlfGroup& group,
                        std::span<const double> weights);

/// psi(x) = (exp(x / E) - 1) * E.
double Compress(double x, double e);
double CompressDerivative(double x, double e);

/// Numerically stable log(sigmoid(x)).
double LogSigmoid(double x);

/// F x T frame-level PLF logits.
struct PlfLogits {
  Matrix values;
};

/// P x T per-frame phone scores.
struct PhoneScores {
  Matrix values;
};

/// Per-frame phone scores for T x F logits, using signed weights `weights`
/// (M for path 1, M * exp(S) for path 2). Independent PLFs contribute
/// |w| * psi(log P(f|p)); each active group contributes psi(log P_group) once.
/// Result is T x P.
Matrix ScorePhones(const Matrix& logits, const ConversionSpec& spec, const Matrix& weights,
                   double e);

/// Backpropagates dLoss/dScores (T x P) to the logits (T x F, overwritten)
/// and, if non-null, to the log-scale parameters raw with weights = M * exp(raw)
/// (P x F, accumulated).
void ScorePhonesBackward(const Matrix& logits, const ConversionSpec& spec, const Matrix& weights,
                         double e, const Matrix& d_scores, Matrix* d_logits, Matrix* d_scale_raw);

/// Path-2 calibration a_p * s_p + b_p applied per frame.
Matrix Calibrate(const Matrix& scores, const Vector& scale, const Vector& offset);

struct ObjectiveConfig {
  double e = 4.0;
  double path1_weight = 1.0;
  double path2_weight = 1.0;
  double path3_weight = 1.0;
  bool enable_path2 = true;
  bool enable_path3 = true;

  bool path1_active() const { return path1_weight > 0.0; }
  bool path2_active() const { return enable_path2 && path2_weight > 0.0; }
  bool path3_active() const { return enable_path3 && path3_weight > 0.0; }
  void Validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double path1 = 0.0;
  double path2 = 0.0;
  double path3 = 0.0;
  Eigen::Index frames = 0;
  Eigen::Index correct = 0;  // path-1 argmax agreement with the labels
};

/// Mean-over-frames softmax NLL of each log-score row against `labels`;
/// writes dLoss/dScores when `d_scores` is non-null.
double SoftmaxNll(const Matrix& scores, std::span<const int> labels, Matrix* d_scores);

/// Head-level forward outputs for one utterance.
struct HeadOutputs {
  Matrix logits;        // T' x F
  Matrix path1_scores;  // T' x P
  Matrix path2_scores;  // T' x P (calibrated), empty if path 2 disabled
  Matrix path3_logits;  // T' x P, empty if path 3 disabled
};

HeadOutputs ForwardHead(const PlfHeadParams& head, const ConversionSpec& spec,
                        const Matrix& embedding, const ObjectiveConfig& cfg);

/// Combined objective on an utterance. `labels` are per output frame (see
/// AlignLabels). Gradients are accumulated into `grad` when non-null.
/// `cache` receives the front-end activations (used by the gradient check).
LossBreakdown ComputeLoss(const PlfModel& model, const ConversionSpec& spec, const Matrix& frames,
                          std::span<const int> labels, const ObjectiveConfig& cfg,
                          PlfModel* grad = nullptr, FrontEndCache* cache = nullptr);

/// Same objective starting from embeddings (no front-end).
LossBreakdown ComputeHeadLoss(const PlfHeadParams& head, const ConversionSpec& spec,
                              const Matrix& embedding, std::span<const int> labels,
                              const ObjectiveConfig& cfg, PlfHeadParams* grad,
                              Matrix* d_embedding);

/// Per-frame argmax, ties to the lowest index.
std::vector<int> ArgmaxRows(const Matrix& scores);

}  // namespace plf

#endif  // PLF_OBJECTIVE_H_
