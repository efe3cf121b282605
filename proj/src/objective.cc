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

#include "plf/objective.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plf {

double LogSigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double Sign(double w) { return w >= 0.0 ? 1.0 : -1.0; }

/// Log of the group's weighted posterior mass, log(sum w_m sigma(v_m)), via
/// log-sum-exp. Returns -inf if the group has no positive weight.
double GroupLogMass(const double* v, const PlfGroup& group, const double* w) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int m : group.members)
    if (w[m] > 0.0) peak = std::max(peak, std::log(w[m]) + LogSigmoid(v[m]));
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (int m : group.members)
    if (w[m] > 0.0) acc += std::exp(std::log(w[m]) + LogSigmoid(v[m]) - peak);
  return peak + std::log(acc);
}

double GroupWeightSum(const PlfGroup& group, const double* w) {
  double b = 0.0;
  for (int m : group.members) b += w[m];
  return b;
}

}  // namespace

double PlfPosterior(double logit, double expected) {
  return expected >= 0.0 ? Sigmoid(logit) : Sigmoid(-logit);
}

double GroupedPosterior(std::span<const double> logits, const PlfGroup& group,
                        std::span<const double> weights) {
  double a = 0.0, b = 0.0;
  for (int m : group.members) {
    a += weights[m] * Sigmoid(logits[m]);
    b += weights[m];
  }
  return b > 0.0 ? a / b : 0.0;
}

double Compress(double x, double e) { return std::expm1(x / e) * e; }

double CompressDerivative(double x, double e) { return std::exp(x / e); }

Matrix ScorePhones(const Matrix& logits, const ConversionSpec& spec, const Matrix& weights,
                   double e) {
  const int num_plfs = spec.num_plfs(), num_phones = spec.num_phones();
  if (logits.cols() != num_plfs || weights.rows() != num_phones || weights.cols() != num_plfs)
    throw Error(ErrorKind::kDimension, "phone scoring shapes do not match the spec");
  const auto& groups = spec.inventory().groups;
  Matrix scores(logits.rows(), num_phones);
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double* v = logits.row(t).data();
    for (int p = 0; p < num_phones; ++p) {
      const double* w = weights.row(p).data();
      double s = 0.0;
      for (int f = 0; f < num_plfs; ++f) {
        if (spec.group_of(f) != -1 || w[f] == 0.0) continue;
        const double lp = std::max(LogSigmoid(Sign(w[f]) * v[f]), kMinLogPosterior);
        s += std::abs(w[f]) * Compress(lp, e);
      }
      for (const auto& g : groups) {
        const double b = GroupWeightSum(g, w);
        if (b <= 0.0) continue;
        const double lp = std::max(GroupLogMass(v, g, w) - std::log(b), kMinLogPosterior);
        s += Compress(lp, e);
      }
      scores(t, p) = s;
    }
  }
  return scores;
}

void ScorePhonesBackward(const Matrix& logits, const ConversionSpec& spec, const Matrix& weights,
                         double e, const Matrix& d_scores, Matrix* d_logits, Matrix* d_scale_raw) {
  const int num_plfs = spec.num_plfs(), num_phones = spec.num_phones();
  const auto& groups = spec.inventory().groups;
  *d_logits = Matrix::Zero(logits.rows(), num_plfs);
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double* v = logits.row(t).data();
    double* dv = d_logits->row(t).data();
    for (int p = 0; p < num_phones; ++p) {
      const double g = d_scores(t, p);
      if (g == 0.0) continue;
      const double* w = weights.row(p).data();
      for (int f = 0; f < num_plfs; ++f) {
        if (spec.group_of(f) != -1 || w[f] == 0.0) continue;
        const double sign = Sign(w[f]);
        const double raw_lp = LogSigmoid(sign * v[f]);
        const double lp = std::max(raw_lp, kMinLogPosterior);
        const double mag = std::abs(w[f]);
        if (raw_lp > kMinLogPosterior)
          dv[f] += g * mag * CompressDerivative(lp, e) * sign * Sigmoid(-sign * v[f]);
        if (d_scale_raw) (*d_scale_raw)(p, f) += g * mag * Compress(lp, e);
      }
      for (const auto& grp : groups) {
        const double b = GroupWeightSum(grp, w);
        if (b <= 0.0) continue;
        const double log_mass = GroupLogMass(v, grp, w);
        const double raw_lp = log_mass - std::log(b);
        if (raw_lp <= kMinLogPosterior) continue;  // clamped: no gradient
        const double outer = g * CompressDerivative(raw_lp, e);
        for (int m : grp.members) {
          if (w[m] <= 0.0) continue;
          // Responsibility of member m in the weighted posterior mass.
          const double r = std::exp(std::log(w[m]) + LogSigmoid(v[m]) - log_mass);
          dv[m] += outer * r * Sigmoid(-v[m]);
          if (d_scale_raw) (*d_scale_raw)(p, m) += outer * (r - w[m] / b);
        }
      }
    }
  }
}

Matrix Calibrate(const Matrix& scores, const Vector& scale, const Vector& offset) {
  Matrix out = scores;
  for (Eigen::Index p = 0; p < out.cols(); ++p)
    out.col(p) = out.col(p).array() * scale[p] + offset[p];
  return out;
}

void ObjectiveConfig::Validate() const {
  if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorKind::kConfig, "E must be positive");
  if (path1_weight < 0.0 || path2_weight < 0.0 || path3_weight < 0.0)
    throw Error(ErrorKind::kConfig, "path weights must be nonnegative");
  if (!path1_active() && !path2_active() && !path3_active())
    throw Error(ErrorKind::kConfig, "at least one loss path must be enabled");
}

double SoftmaxNll(const Matrix& scores, std::span<const int> labels, Matrix* d_scores) {
  const Eigen::Index frames = scores.rows();
  if (static_cast<Eigen::Index>(labels.size()) != frames)
    throw Error(ErrorKind::kDimension, "label count does not match frame count");
  if (d_scores) d_scores->resize(frames, scores.cols());
  double loss = 0.0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const int y = labels[t];
    if (y < 0 || y >= scores.cols())
      throw Error(ErrorKind::kIndex, "label " + std::to_string(y) + " out of range at frame " +
                                         std::to_string(t));
    const auto row = scores.row(t);
    const double peak = row.maxCoeff();
    const double lse = peak + std::log((row.array() - peak).exp().sum());
    loss += lse - row[y];
    if (d_scores) {
      d_scores->row(t) = (row.array() - lse).exp() / double(frames);
      (*d_scores)(t, y) -= 1.0 / double(frames);
    }
  }
  return loss / double(frames);
}

std::vector<int> ArgmaxRows(const Matrix& scores) {
  std::vector<int> out(static_cast<size_t>(scores.rows()));
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index p = 1; p < scores.cols(); ++p)
      if (scores(t, p) > scores(t, best)) best = p;
    out[t] = static_cast<int>(best);
  }
  return out;
}

HeadOutputs ForwardHead(const PlfHeadParams& head, const ConversionSpec& spec,
                        const Matrix& embedding, const ObjectiveConfig& cfg) {
  HeadOutputs out;
  out.logits = embedding * head.plf_weight;
  out.logits.rowwise() += head.plf_bias;
  out.path1_scores = ScorePhones(out.logits, spec, spec.M(), cfg.e);
  if (cfg.path2_active()) {
    const Matrix w2 = EffectiveMatrix(spec.matrix(), ScalingMatrix{head.scale_raw});
    out.path2_scores = Calibrate(ScorePhones(out.logits, spec, w2, cfg.e), head.calib_scale,
                                 head.calib_offset);
  }
  if (cfg.path3_active()) {
    out.path3_logits = embedding * head.direct_weight;
    out.path3_logits.rowwise() += head.direct_bias;
  }
  return out;
}

LossBreakdown ComputeHeadLoss(const PlfHeadParams& head, const ConversionSpec& spec,
                              const Matrix& embedding, std::span<const int> labels,
                              const ObjectiveConfig& cfg, PlfHeadParams* grad,
                              Matrix* d_embedding) {
  cfg.Validate();
  if (head.plf_weight.cols() != spec.num_plfs() || head.direct_bias.size() != spec.num_phones())
    throw Error(ErrorKind::kIncompatible, "model head does not match the conversion spec");
  LossBreakdown out;
  out.frames = embedding.rows();
  Matrix logits = embedding * head.plf_weight;
  logits.rowwise() += head.plf_bias;
  const Matrix s1 = ScorePhones(logits, spec, spec.M(), cfg.e);
  const bool want_grad = grad != nullptr || d_embedding != nullptr;
  Matrix d_logits_total = Matrix::Zero(logits.rows(), logits.cols());
  Matrix d_embed = Matrix::Zero(embedding.rows(), embedding.cols());

  {
    Matrix d1;
    out.path1 = SoftmaxNll(s1, labels, want_grad ? &d1 : nullptr);
    const auto predicted = ArgmaxRows(s1);
    for (size_t t = 0; t < predicted.size(); ++t) out.correct += predicted[t] == labels[t];
    if (cfg.path1_active()) {
      out.total += cfg.path1_weight * out.path1;
      if (want_grad) {
        d1 *= cfg.path1_weight;
        Matrix dv;
        ScorePhonesBackward(logits, spec, spec.M(), cfg.e, d1, &dv, nullptr);
        d_logits_total += dv;
      }
    }
  }
  if (cfg.path2_active()) {
    const Matrix w2 = EffectiveMatrix(spec.matrix(), ScalingMatrix{head.scale_raw});
    const Matrix s2 = ScorePhones(logits, spec, w2, cfg.e);
    const Matrix z2 = Calibrate(s2, head.calib_scale, head.calib_offset);
    Matrix dz;
    out.path2 = SoftmaxNll(z2, labels, want_grad ? &dz : nullptr);
    out.total += cfg.path2_weight * out.path2;
    if (want_grad) {
      dz *= cfg.path2_weight;
      if (grad) {
        grad->calib_scale += (dz.array() * s2.array()).colwise().sum().transpose().matrix();
        grad->calib_offset += dz.colwise().sum().transpose();
      }
      Matrix ds = dz;
      for (Eigen::Index p = 0; p < ds.cols(); ++p) ds.col(p) *= head.calib_scale[p];
      Matrix dv;
      ScorePhonesBackward(logits, spec, w2, cfg.e, ds, &dv, grad ? &grad->scale_raw : nullptr);
      d_logits_total += dv;
    }
  }
  if (cfg.path3_active()) {
    Matrix q = embedding * head.direct_weight;
    q.rowwise() += head.direct_bias;
    Matrix dq;
    out.path3 = SoftmaxNll(q, labels, want_grad ? &dq : nullptr);
    out.total += cfg.path3_weight * out.path3;
    if (want_grad) {
      dq *= cfg.path3_weight;
      if (grad) {
        grad->direct_weight.noalias() += embedding.transpose() * dq;
        grad->direct_bias += dq.colwise().sum();
      }
      d_embed.noalias() += dq * head.direct_weight.transpose();
    }
  }
  if (want_grad) {
    if (grad) {
      grad->plf_weight.noalias() += embedding.transpose() * d_logits_total;
      grad->plf_bias += d_logits_total.colwise().sum();
    }
    d_embed.noalias() += d_logits_total * head.plf_weight.transpose();
    if (d_embedding) *d_embedding = std::move(d_embed);
  }
  return out;
}

LossBreakdown ComputeLoss(const PlfModel& model, const ConversionSpec& spec, const Matrix& frames,
                          std::span<const int> labels, const ObjectiveConfig& cfg,
                          PlfModel* grad, FrontEndCache* cache) {
  FrontEndCache local;
  FrontEndCache& c = cache ? *cache : local;
  const Matrix embedding = ForwardFrontEnd(model.frontend, frames, &c);
  Matrix d_embedding;
  LossBreakdown out = ComputeHeadLoss(model.head, spec, embedding, labels, cfg,
                                      grad ? &grad->head : nullptr, grad ? &d_embedding : nullptr);
  if (grad) BackwardFrontEnd(model.frontend, c, d_embedding, &grad->frontend);
  return out;
}

}  // namespace plf
