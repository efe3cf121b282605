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

#include "plf/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace plf {

void TrainConfig::Validate() const {
  objective.Validate();
  if (epochs < 0) throw Error(ErrorKind::kConfig, "epochs must be nonnegative");
  if (batch_size < 1) throw Error(ErrorKind::kConfig, "batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kConfig, "learning rate must be positive");
  if (frontend.input_dim != kNumMelBands)
    throw Error(ErrorKind::kConfig, "front-end input must be 24 Mel bands");
}

AdamOptimizer::AdamOptimizer(const PlfModel& model, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  ForEachTensor(model, [this](std::string_view, std::span<const double> t) {
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  });
}

void AdamOptimizer::Step(PlfModel* model, const PlfModel& grad) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, double(step_));
  const double c2 = 1.0 - std::pow(beta2_, double(step_));
  std::vector<std::span<const double>> grads;
  ForEachTensor(grad, [&grads](std::string_view, std::span<const double> g) { grads.push_back(g); });
  size_t k = 0;
  ForEachTensor(*model, [&](std::string_view, std::span<double> p) {
    auto& m = m_[k];
    auto& v = v_[k];
    const auto g = grads[k];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
    ++k;
  });
}

namespace {

void ScaleGrad(PlfModel* grad, double factor) {
  ForEachTensor(*grad, [factor](std::string_view, std::span<double> t) {
    for (double& x : t) x *= factor;
  });
}

}  // namespace

TrainResult Train(const std::vector<Utterance>& corpus, const ConversionSpec& spec,
                  const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.Validate();
  std::vector<size_t> usable;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto& u = corpus[i];
    if (u.labels.empty()) continue;
    if (static_cast<Eigen::Index>(u.labels.size()) != u.frames.rows())
      throw Error(ErrorKind::kDimension, "utterance " + u.id + ": labels do not match frames");
    for (int l : u.labels)
      if (l < 0 || l >= spec.num_phones())
        throw Error(ErrorKind::kIndex, "utterance " + u.id + ": label out of range");
    if (cfg.frontend.OutputFrames(u.frames.rows()) >= 1) usable.push_back(i);
  }
  if (usable.empty()) throw Error(ErrorKind::kEmptyInput, "no labelled utterances to train on");

  TrainResult result;
  result.model = InitModel(cfg.frontend, spec.num_plfs(), spec.num_phones(),
                           DeriveSeed(cfg.seed, "init"));
  AdamOptimizer adam(result.model, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  std::mt19937_64 shuffle_rng(DeriveSeed(cfg.seed, "shuffle"));
  const uint64_t augment_seed = DeriveSeed(cfg.seed, "augment");

  std::vector<size_t> order = usable;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochStats stats;
    stats.epoch = epoch;
    Eigen::Index frames = 0, correct = 0;
    PlfModel grad = ZerosLike(result.model);
    int in_batch = 0;
    for (size_t k = 0; k < order.size(); ++k) {
      const Utterance& u = corpus[order[k]];
      Matrix input = u.frames;
      if (cfg.augment) {
        AugmentConfig ac = cfg.augment_config;
        ac.seed = DeriveSeed(augment_seed + uint64_t(epoch) * 0x100000001b3ULL + order[k], u.id);
        input = SpecAugment(MelFrames{std::move(input)}, ac).values;
      }
      const auto labels = AlignLabels(cfg.frontend, u.labels);
      const LossBreakdown loss =
          ComputeLoss(result.model, spec, input, labels, cfg.objective, &grad);
      if (!std::isfinite(loss.total)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch << ", utterance " << u.id
           << " (path1=" << loss.path1 << ", path2=" << loss.path2 << ", path3=" << loss.path3
           << ")";
        throw Error(ErrorKind::kDivergence, os.str());
      }
      const double n = double(loss.frames);
      stats.loss += loss.total * n;
      stats.path1 += loss.path1 * n;
      stats.path2 += loss.path2 * n;
      stats.path3 += loss.path3 * n;
      frames += loss.frames;
      correct += loss.correct;
      if (++in_batch == cfg.batch_size || k + 1 == order.size()) {
        ScaleGrad(&grad, 1.0 / in_batch);
        adam.Step(&result.model, grad);
        grad = ZerosLike(result.model);
        in_batch = 0;
      }
    }
    stats.loss /= double(frames);
    stats.path1 /= double(frames);
    stats.path2 /= double(frames);
    stats.path3 /= double(frames);
    stats.accuracy = double(correct) / double(frames);
    result.log.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

void WriteTrainLog(const std::filesystem::path& path, const std::vector<EpochStats>& log) {
  CsvTable t;
  t.header = {"epoch", "loss", "path1", "path2", "path3", "accuracy"};
  for (const auto& s : log)
    t.rows.push_back({std::to_string(s.epoch), FormatDouble(s.loss), FormatDouble(s.path1),
                      FormatDouble(s.path2), FormatDouble(s.path3), FormatDouble(s.accuracy)});
  WriteCsv(path, t);
}

}  // namespace plf
