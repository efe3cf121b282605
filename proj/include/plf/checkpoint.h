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

#ifndef PLF_CHECKPOINT_H_
#define PLF_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "plf/objective.h"
#include "plf/phonology.h"
#include "plf/trainer.h"

namespace plf {

/// Checkpoint file layout:
///   "PLFCKPT1"                       8-byte magic
///   uint64 little-endian             header length in bytes
///   JSON header                      version, spec, spec hash, config, tensor table
///   little-endian float64 block      tensors in ForEachTensor order
struct Checkpoint {
  ConversionSpec spec;
  TrainConfig config;
  PlfModel model;
  std::string spec_hash;
};

constexpr int kCheckpointVersion = 1;

nlohmann::ordered_json TrainConfigToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(const nlohmann::ordered_json& j);

Checkpoint MakeCheckpoint(const ConversionSpec& spec, const TrainConfig& cfg, PlfModel model);
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
Checkpoint DecodeCheckpoint(std::string_view bytes);

/// Throws kIncompatible when the checkpoint was trained with a different spec.
void CheckSpecMatches(const Checkpoint& ckpt, const ConversionSpec& spec);

struct Extraction {
  PlfLogits logits;    // F x T'
  PhoneScores scores;  // P x T', path-1 scores
};

/// Frame-level PLFs and path-1 phone scores for one utterance.
Extraction ExtractPlf(const Checkpoint& ckpt, const Matrix& frames);

/// Framewise path-1 phone accuracy on labelled utterances.
double FramewiseAccuracy(const Checkpoint& ckpt, const std::vector<Utterance>& corpus);

/// Fraction of (frame, PLF) pairs with |M[label, PLF]| = 1 whose logit sign
/// matches the expected sign.
double SignAgreement(const Checkpoint& ckpt, const std::vector<Utterance>& corpus);

}  // namespace plf

#endif  // PLF_CHECKPOINT_H_
