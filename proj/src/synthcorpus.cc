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

#include "plf/synthcorpus.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "plf/features.h"
#include "plf/signal.h"

namespace plf {

namespace {

std::vector<int> ResolvePlfs(const std::vector<std::string>& names, const ConversionSpec& spec) {
  std::vector<int> out;
  for (const auto& n : names) {
    const int idx = spec.PlfIndex(n);
    if (idx < 0) throw Error(ErrorKind::kConfig, "suppressed PLF '" + n + "' is not in the spec");
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw Error(ErrorKind::kConfig, "PLF listed twice in a suppression set");
  return out;
}

std::string SpeakerId(const std::string& prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return prefix + buf;
}

}  // namespace

void SynthConfig::Validate(const ConversionSpec& spec) const {
  if (healthy_speakers < 0 || speakers_per_class < 0 || utterances_per_speaker < 1 ||
      phones_per_utterance < 1 || frames_per_phone < 1 || frames_jitter < 0 ||
      frames_jitter >= frames_per_phone)
    throw Error(ErrorKind::kConfig, "synthetic corpus counts must be positive");
  if (healthy_speakers + speakers_per_class * int(suppression.size()) < 1)
    throw Error(ErrorKind::kConfig, "synthetic corpus has no speakers");
  if (noise_sigma < 0.0 || score_noise < 0.0 || cue_scale <= 0.0)
    throw Error(ErrorKind::kConfig, "noise must be nonnegative and cue scale positive");
  if (!(severity_min > 0.0 && severity_min <= severity_max && severity_max <= 1.0))
    throw Error(ErrorKind::kConfig, "severity range must lie in (0, 1]");
  if (spec.num_plfs() > kNumMelBands)
    throw Error(ErrorKind::kConfig, "more PLFs than frame dimensions");
  if (spec.num_phones() < 2) throw Error(ErrorKind::kConfig, "need at least two phones");
  for (const auto& [cls, plfs] : suppression) {
    if (cls == "healthy") throw Error(ErrorKind::kConfig, "'healthy' cannot be a suppression class");
    if (plfs.empty()) throw Error(ErrorKind::kConfig, "suppression class '" + cls + "' is empty");
    ResolvePlfs(plfs, spec);
  }
}

double SynthIntelligibility(const SynthConfig& cfg, size_t num_suppressed, double severity) {
  return std::clamp(100.0 - cfg.penalty_per_plf * severity * double(num_suppressed), 0.0, 100.0);
}

SynthCorpus GenerateCorpus(const SynthConfig& cfg, const ConversionSpec& spec) {
  cfg.Validate(spec);
  SynthCorpus corpus;
  for (int i = 0; i < cfg.healthy_speakers; ++i)
    corpus.speakers.push_back({SpeakerId("healthy", i), "healthy", {}, 0.0, 100.0});
  for (const auto& [cls, plfs] : cfg.suppression)
    for (int i = 0; i < cfg.speakers_per_class; ++i)
      corpus.speakers.push_back({SpeakerId(cls, i), cls, ResolvePlfs(plfs, spec), 0.0, 100.0});

  const Matrix& m = spec.M();
  const int num_plfs = spec.num_plfs(), num_phones = spec.num_phones();
  for (auto& spk : corpus.speakers) {
    std::mt19937_64 rng(DeriveSeed(cfg.seed, "speaker-" + spk.id));
    std::normal_distribution<double> noise(0.0, 1.0);
    if (!spk.suppressed.empty())
      spk.severity = std::uniform_real_distribution<double>(cfg.severity_min, cfg.severity_max)(rng);
    spk.intelligibility = std::clamp(
        SynthIntelligibility(cfg, spk.suppressed.size(), spk.severity) + cfg.score_noise * noise(rng),
        0.0, 100.0);
    std::vector<double> cue_gain(num_plfs, 1.0);
    for (int f : spk.suppressed) cue_gain[f] = 1.0 - spk.severity;

    std::uniform_int_distribution<int> pick_phone(0, num_phones - 1);
    std::uniform_int_distribution<int> duration(cfg.frames_per_phone - cfg.frames_jitter,
                                                cfg.frames_per_phone + cfg.frames_jitter);
    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      Utterance utt;
      utt.id = spk.id + "_u" + std::to_string(u);
      utt.speaker = spk.id;
      utt.pathology = spk.pathology;
      utt.intelligibility = spk.intelligibility;
      int previous = -1;
      for (int k = 0; k < cfg.phones_per_utterance; ++k) {
        int phone;
        do {
          phone = pick_phone(rng);
        } while (phone == previous);
        previous = phone;
        const int frames = duration(rng);
        for (int t = 0; t < frames; ++t) utt.labels.push_back(phone);
      }
      utt.frames.resize(static_cast<Eigen::Index>(utt.labels.size()), kNumMelBands);
      for (size_t t = 0; t < utt.labels.size(); ++t) {
        const int p = utt.labels[t];
        for (int j = 0; j < kNumMelBands; ++j) {
          const double cue = j < num_plfs ? cfg.cue_scale * m(p, j) * cue_gain[j] : 0.0;
          utt.frames(t, j) = cue + (cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise(rng) : 0.0);
        }
      }
      corpus.utterances.push_back(std::move(utt));
    }
  }
  return corpus;
}

std::vector<LogitsRecord> GeneratePlfSpeakers(const PlfSpeakerConfig& cfg, const ConversionSpec& spec) {
  if (cfg.frames < 1 || cfg.healthy_speakers < 0 || cfg.speakers_per_class < 0)
    throw Error(ErrorKind::kConfig, "invalid PLF speaker configuration");
  const auto columns = HistogramColumnNames(spec.inventory().names);
  std::vector<std::pair<size_t, double>> terms;
  for (const auto& [name, coef] : cfg.coefficients) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorKind::kConfig, "unknown histogram feature '" + name + "'");
    terms.emplace_back(static_cast<size_t>(it - columns.begin()), coef);
  }
  struct Plan {
    std::string id, pathology;
    std::vector<int> suppressed;
  };
  std::vector<Plan> plans;
  for (int i = 0; i < cfg.healthy_speakers; ++i) plans.push_back({SpeakerId("healthy", i), "healthy", {}});
  for (const auto& [cls, plfs] : cfg.suppression)
    for (int i = 0; i < cfg.speakers_per_class; ++i)
      plans.push_back({SpeakerId(cls, i), cls, ResolvePlfs(plfs, spec)});

  const int num_plfs = spec.num_plfs();
  std::vector<LogitsRecord> out;
  for (const auto& plan : plans) {
    std::mt19937_64 rng(DeriveSeed(cfg.seed, "plf-speaker-" + plan.id));
    std::uniform_real_distribution<double> healthy(0.5, 1.0), weak(0.0, 0.5);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution active(0.5);
    std::vector<double> strength(num_plfs);
    for (int f = 0; f < num_plfs; ++f) strength[f] = healthy(rng);
    for (int f : plan.suppressed) strength[f] = weak(rng);
    LogitsRecord r;
    r.id = plan.id;
    r.speaker = plan.id;
    r.pathology = plan.pathology;
    r.logits.resize(num_plfs, cfg.frames);
    for (int t = 0; t < cfg.frames; ++t)
      for (int f = 0; f < num_plfs; ++f)
        r.logits(f, t) = (active(rng) ? 1.0 : -1.0) * cfg.amplitude * strength[f] + noise(rng);
    const Vector hist = PlfHistogram(PlfLogits{r.logits}).Flatten();
    double score = cfg.intercept;
    for (const auto& [k, coef] : terms) score += coef * hist[static_cast<Eigen::Index>(k)];
    r.intelligibility = std::clamp(score + cfg.score_noise * noise(rng), 0.0, 100.0);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace plf
