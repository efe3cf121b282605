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

#ifndef PLF_MODEL_H_
#define PLF_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "plf/common.h"

namespace plf {

struct ConvLayerConfig {
  int out_channels = 32;
  int kernel_time = 3;
  int kernel_freq = 3;
  int stride_time = 1;
  int stride_freq = 1;
};

/// Stacked valid 2D convolutions (ReLU) over the T x 24 input, flattened per
/// output frame and mapped to the embedding by a ReLU fully-connected layer.
struct FrontEndConfig {
  int input_dim = 24;
  std::vector<ConvLayerConfig> conv = {{32, 3, 3, 1, 1}, {64, 3, 3, 2, 1}};
  int embedding_dim = 512;

  /// Input frames seen by one output frame.
  int ReceptiveField() const;
  int TotalStride() const;
  /// Output frame t' is centred on input frame t' * TotalStride() + CentreOffset().
  int CentreOffset() const;
  /// Zero when `input_frames` is below the receptive field.
  Eigen::Index OutputFrames(Eigen::Index input_frames) const;
  /// Frequency extent after the conv stack.
  int OutputFreq() const;
};

struct ConvLayer {
  ConvLayerConfig config;
  int in_channels = 1;
  int in_freq = 0;
  int out_freq = 0;
  Matrix weight;  // (in_channels * kt * kf) x out_channels
  RowVector bias;
};

struct FrontEndParams {
  FrontEndConfig config;
  std::vector<ConvLayer> conv;
  Matrix fc_weight;  // (out_freq * channels) x embedding_dim
  RowVector fc_bias;
};

/// PLF bottleneck, path-2 scaling/calibration and the path-3 direct classifier.
struct PlfHeadParams {
  Matrix plf_weight;  // embedding_dim x F
  RowVector plf_bias;
  Matrix scale_raw;    // P x F, effective scale exp(raw)
  Vector calib_scale;  // a_p, initialised to 1
  Vector calib_offset; // b_p, initialised to 0
  Matrix direct_weight;  // embedding_dim x P
  RowVector direct_bias;
};

struct PlfModel {
  FrontEndParams frontend;
  PlfHeadParams head;

  int num_plfs() const { return static_cast<int>(head.plf_bias.size()); }
  int num_phones() const { return static_cast<int>(head.direct_bias.size()); }
};

PlfModel InitModel(const FrontEndConfig& config, int num_plfs, int num_phones, uint64_t seed);
/// Same shapes as `model`, every parameter zero.
PlfModel ZerosLike(const PlfModel& model);

/// Visits every trainable tensor in a fixed order (the checkpoint order).
void ForEachTensor(PlfModel& model,
                   const std::function<void(std::string_view, std::span<double>)>& fn);
void ForEachTensor(const PlfModel& model,
                   const std::function<void(std::string_view, std::span<const double>)>& fn);
size_t NumParameters(const PlfModel& model);

struct FrontEndCache {
  std::vector<Matrix> layer_inputs;  // rows = t * freq + f, cols = channels
  std::vector<Matrix> patches;
  std::vector<Matrix> conv_pre;      // pre-ReLU conv outputs
  Matrix flat;                       // T' x (out_freq * channels)
  Matrix fc_pre;
  Matrix embedding;                  // T' x embedding_dim
};

/// frames: T x input_dim. Returns T' x embedding_dim. Throws kTooShort when T
/// is below the receptive field.
Matrix ForwardFrontEnd(const FrontEndParams& params, const Matrix& frames,
                       FrontEndCache* cache = nullptr);
/// Accumulates parameter gradients into `grad` given dLoss/dEmbedding.
void BackwardFrontEnd(const FrontEndParams& params, const FrontEndCache& cache,
                      const Matrix& d_embedding, FrontEndParams* grad);

/// Sign pattern of every ReLU pre-activation; two forward passes with the
/// same pattern lie on the same linear piece of the front-end.
std::vector<uint8_t> ReluPattern(const FrontEndCache& cache);

/// Maps input-frame labels to output frames (label at each receptive-field centre).
std::vector<int> AlignLabels(const FrontEndConfig& config, std::span<const int> frame_labels);

}  // namespace plf

#endif  // PLF_MODEL_H_
