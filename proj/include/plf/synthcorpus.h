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

#ifndef PLF_SYNTHCORPUS_H_
#define PLF_SYNTHCORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plf/corpus.h"
#include "plf/phonology.h"

namespace plf {

/// Frame-level synthetic corpus. Frame dimension j < F carries
/// cue_scale * M[phone][j] plus Gaussian noise; the remaining dimensions are
/// noise. Pathological speakers have the cues of their suppressed PLFs pulled
/// toward 0 by their severity.
struct SynthConfig {
  int healthy_speakers = 8;
  /// Pathology class -> suppressed PLF names. Speakers are assigned to
  /// classes in map order, `speakers_per_class` each.
  std::map<std::string, std::vector<std::string>> suppression = {{"hypernasal_loss", {"Nasal"}},
                                                                 {"devoicing", {"Voiced"}}};
  int speakers_per_class = 2;
  int utterances_per_speaker = 2;
  int phones_per_utterance = 20;
  int frames_per_phone = 8;
  int frames_jitter = 3;
  double noise_sigma = 0.3;
  double cue_scale = 1.0;
  double severity_min = 0.5;
  double severity_max = 1.0;
  double penalty_per_plf = 15.0;
  double score_noise = 2.0;
  uint64_t seed = 0;

  void Validate(const ConversionSpec& spec) const;
};

struct SynthSpeaker {
  std::string id;
  std::string pathology;  // "healthy" or a suppression class
  std::vector<int> suppressed;
  double severity = 0.0;
  double intelligibility = 100.0;
};

struct SynthCorpus {
  std::vector<SynthSpeaker> speakers;
  std::vector<Utterance> utterances;
};

SynthCorpus GenerateCorpus(const SynthConfig& cfg, const ConversionSpec& spec);

/// Noise-free intelligibility: 100 - penalty * severity * |suppressed|, clamped.
double SynthIntelligibility(const SynthConfig& cfg, size_t num_suppressed, double severity);

/// Utterance-level PLF logits with a known intelligibility model:
///   score = intercept + sum_k coefficient_k * histogram_feature_k + N(0, score_noise^2)
/// clamped to [0, 100]. Each speaker has a per-PLF activation strength; a
/// frame's logit is +/- strength * amplitude plus unit noise.
struct PlfSpeakerConfig {
  int healthy_speakers = 400;
  std::map<std::string, std::vector<std::string>> suppression = {
      {"alveolar_loss", {"Alveolar", "Coronal"}}, {"hypernasal", {"Nasal"}}};
  int speakers_per_class = 300;
  int frames = 300;
  double amplitude = 6.0;
  double intercept = 10.0;
  std::map<std::string, double> coefficients = {{"Alveolar_H0", 140.0}};
  double score_noise = 5.0;
  uint64_t seed = 0;
};

std::vector<LogitsRecord> GeneratePlfSpeakers(const PlfSpeakerConfig& cfg, const ConversionSpec& spec);

}  // namespace plf

#endif  // PLF_SYNTHCORPUS_H_
