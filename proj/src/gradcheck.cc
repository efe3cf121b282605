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

#include "plf/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace plf {

bool GradCheckReport::passed() const { return checked > 0 && max_relative_error < tolerance; }

ConversionSpec RandomSpec(uint64_t seed, int max_phones, int max_plfs) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int phones = uniform_int(2, std::max(2, max_phones));
  const int plfs = uniform_int(2, std::max(2, max_plfs));
  PlfInventory inv;
  for (int f = 0; f < plfs; ++f) inv.names.push_back("plf" + std::to_string(f));
  // Up to two groups of 2-3 members from the last columns.
  int next = plfs;
  for (int g = 0; g < 2; ++g) {
    const int size = uniform_int(2, 3);
    if (next - size < 1 || uniform_int(0, 3) == 0) break;
    PlfGroup grp{"group" + std::to_string(g), {}};
    for (int k = 0; k < size; ++k) grp.members.push_back(--next);
    std::reverse(grp.members.begin(), grp.members.end());
    inv.groups.push_back(std::move(grp));
  }
  std::vector<int> group_of(plfs, -1);
  for (size_t g = 0; g < inv.groups.size(); ++g)
    for (int f : inv.groups[g].members) group_of[f] = static_cast<int>(g);

  std::vector<std::string> symbols;
  for (int p = 0; p < phones; ++p) symbols.push_back("ph" + std::to_string(p));
  Matrix m = Matrix::Zero(phones, plfs);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int p = 0; p < phones; ++p) {
    for (int f = 0; f < plfs; ++f)
      if (group_of[f] == -1) m(p, f) = uniform_int(-1, 1);
    for (const auto& grp : inv.groups) {
      if (uniform_int(0, 1) == 0) continue;
      for (int f : grp.members)
        if (uniform_int(0, 2) != 0) m(p, f) = weight(rng);
    }
    if (m.row(p).cwiseAbs().sum() == 0.0) m(p, uniform_int(0, plfs - 1)) = group_of[0] == -1 ? 1.0 : 0.5;
  }
  return ConversionSpec(std::move(inv), std::move(symbols), ConversionMatrix{m});
}

namespace {

struct Coordinate {
  std::string tensor;
  size_t tensor_index;
  size_t offset;
};

std::vector<std::span<double>> TensorSpans(PlfModel& model, std::vector<std::string>* names) {
  std::vector<std::span<double>> spans;
  ForEachTensor(model, [&](std::string_view name, std::span<double> t) {
    spans.push_back(t);
    if (names) names->emplace_back(name);
  });
  return spans;
}

}  // namespace

void CheckGradients(const PlfModel& model, const ConversionSpec& spec, const Matrix& frames,
                    const std::vector<int>& labels, const ObjectiveConfig& cfg,
                    const GradCheckOptions& options, uint64_t seed, GradCheckReport* report) {
  PlfModel grad = ZerosLike(model);
  FrontEndCache base_cache;
  ComputeLoss(model, spec, frames, labels, cfg, &grad, &base_cache);
  const auto base_pattern = ReluPattern(base_cache);

  PlfModel probe = model;
  std::vector<std::string> names;
  auto params = TensorSpans(probe, &names);
  auto grads = TensorSpans(grad, nullptr);
  std::mt19937_64 rng(seed);

  for (size_t k = 0; k < params.size(); ++k) {
    std::vector<size_t> offsets(params[k].size());
    std::iota(offsets.begin(), offsets.end(), 0);
    if (offsets.size() > static_cast<size_t>(options.coordinates_per_tensor)) {
      std::shuffle(offsets.begin(), offsets.end(), rng);
      offsets.resize(static_cast<size_t>(options.coordinates_per_tensor));
    }
    for (size_t off : offsets) {
      double& theta = params[k][off];
      const double saved = theta;
      FrontEndCache plus_cache, minus_cache;
      theta = saved + options.step;
      const double plus = ComputeLoss(probe, spec, frames, labels, cfg, nullptr, &plus_cache).total;
      theta = saved - options.step;
      const double minus = ComputeLoss(probe, spec, frames, labels, cfg, nullptr, &minus_cache).total;
      theta = saved;
      if (ReluPattern(plus_cache) != base_pattern || ReluPattern(minus_cache) != base_pattern) {
        ++report->skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = grads[k][off];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), options.magnitude_floor});
      const double rel = std::abs(numeric - analytic) / scale;
      ++report->checked;
      if (rel > report->max_relative_error || report->worst.empty()) {
        if (rel >= report->max_relative_error) {
          report->max_relative_error = rel;
          std::ostringstream os;
          os << names[k] << "[" << off << "] analytic=" << analytic << " numeric=" << numeric;
          report->worst = os.str();
        }
      }
    }
  }
}

GradCheckReport RunGradientCheck(const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  std::mt19937_64 rng(DeriveSeed(options.seed, "gradcheck"));
  for (int c = 0; c < options.configurations; ++c) {
    const uint64_t cseed = DeriveSeed(options.seed, "config-" + std::to_string(c));
    std::mt19937_64 crng(cseed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const ConversionSpec spec = RandomSpec(cseed, options.max_phones, options.max_plfs);

    FrontEndConfig fe;
    fe.conv = {{3, 3, 3, 1, 1}, {4, 3, 3, 2, 1}};
    PlfModel model = InitModel(fe, spec.num_plfs(), spec.num_phones(), DeriveSeed(cseed, "init"));
    // Move the path-2 parameters away from their identity initialisation.
    for (Eigen::Index i = 0; i < model.head.scale_raw.size(); ++i)
      model.head.scale_raw.data()[i] = 0.3 * normal(crng);
    for (Eigen::Index p = 0; p < model.head.calib_scale.size(); ++p) {
      model.head.calib_scale[p] = 0.5 + unit(crng);
      model.head.calib_offset[p] = 0.5 * normal(crng);
    }
    for (Eigen::Index i = 0; i < model.head.plf_bias.size(); ++i)
      model.head.plf_bias[i] = normal(crng);
    for (Eigen::Index i = 0; i < model.head.plf_weight.size(); ++i)
      model.head.plf_weight.data()[i] *= 4.0;

    ObjectiveConfig cfg;
    cfg.e = 0.5 + 7.5 * unit(crng);
    cfg.path1_weight = 0.2 + unit(crng);
    cfg.path2_weight = 0.2 + unit(crng);
    cfg.path3_weight = 0.2 + unit(crng);

    const int out_frames = std::uniform_int_distribution<int>(1, options.max_frames)(crng);
    const int in_frames = fe.ReceptiveField() + (out_frames - 1) * fe.TotalStride();
    Matrix frames(in_frames, fe.input_dim);
    for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = normal(crng);
    std::vector<int> labels(static_cast<size_t>(out_frames));
    for (int& l : labels) l = std::uniform_int_distribution<int>(0, spec.num_phones() - 1)(crng);

    CheckGradients(model, spec, frames, labels, cfg, options, rng(), &report);
    ++report.configurations;
  }
  return report;
}

}  // namespace plf
