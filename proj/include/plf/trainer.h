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

#ifndef PLF_TRAINER_H_
#define PLF_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "plf/corpus.h"
#include "plf/model.h"
#include "plf/objective.h"
#include "plf/phonology.h"
#include "plf/signal.h"

namespace plf {

struct TrainConfig {
  ObjectiveConfig objective;
  FrontEndConfig frontend;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 30;
  int batch_size = 1;  // utterances per update
  uint64_t seed = 0;
  bool augment = true;
  AugmentConfig augment_config;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double path1 = 0.0;
  double path2 = 0.0;
  double path3 = 0.0;
  double accuracy = 0.0;  // framewise, path-1 argmax
};

struct TrainResult {
  PlfModel model;
  std::vector<EpochStats> log;
};

/// Adam over every tensor of a PlfModel.
class AdamOptimizer {
 public:
  AdamOptimizer(const PlfModel& model, double lr, double beta1, double beta2, double eps);
  void Step(PlfModel* model, const PlfModel& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

TrainResult Train(const std::vector<Utterance>& corpus, const ConversionSpec& spec,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

void WriteTrainLog(const std::filesystem::path& path, const std::vector<EpochStats>& log);

}  // namespace plf

#endif  // PLF_TRAINER_H_
