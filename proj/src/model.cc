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

#include "plf/model.h"

#include <cmath>
#include <random>

namespace plf {

int FrontEndConfig::ReceptiveField() const {
  int field = 1, jump = 1;
  for (const auto& c : conv) {
    field += (c.kernel_time - 1) * jump;
    jump *= c.stride_time;
  }
  return field;
}

int FrontEndConfig::TotalStride() const {
  int s = 1;
  for (const auto& c : conv) s *= c.stride_time;
  return s;
}

int FrontEndConfig::CentreOffset() const { return (ReceptiveField() - 1) / 2; }

Eigen::Index FrontEndConfig::OutputFrames(Eigen::Index input_frames) const {
  Eigen::Index t = input_frames;
  for (const auto& c : conv) {
    if (t < c.kernel_time) return 0;
    t = (t - c.kernel_time) / c.stride_time + 1;
  }
  return t;
}

int FrontEndConfig::OutputFreq() const {
  int f = input_dim;
  for (const auto& c : conv) {
    if (f < c.kernel_freq) return 0;
    f = (f - c.kernel_freq) / c.stride_freq + 1;
  }
  return f;
}

namespace {

void FillNormal(Matrix* m, double stddev, std::mt19937_64* rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = dist(*rng);
}

Matrix Im2Col(const Matrix& input, int in_freq, const ConvLayer& layer, Eigen::Index out_time) {
  const auto& c = layer.config;
  const int channels = layer.in_channels;
  Matrix patches(out_time * layer.out_freq, channels * c.kernel_time * c.kernel_freq);
  for (Eigen::Index t = 0; t < out_time; ++t) {
    for (int f = 0; f < layer.out_freq; ++f) {
      auto row = patches.row(t * layer.out_freq + f);
      Eigen::Index col = 0;
      for (int ch = 0; ch < channels; ++ch)
        for (int dt = 0; dt < c.kernel_time; ++dt)
          for (int df = 0; df < c.kernel_freq; ++df)
            row[col++] = input((t * c.stride_time + dt) * in_freq + f * c.stride_freq + df, ch);
    }
  }
  return patches;
}

void Col2ImAdd(const Matrix& d_patches, int in_freq, const ConvLayer& layer, Eigen::Index out_time,
               Matrix* d_input) {
  const auto& c = layer.config;
  for (Eigen::Index t = 0; t < out_time; ++t) {
    for (int f = 0; f < layer.out_freq; ++f) {
      auto row = d_patches.row(t * layer.out_freq + f);
      Eigen::Index col = 0;
      for (int ch = 0; ch < layer.in_channels; ++ch)
        for (int dt = 0; dt < c.kernel_time; ++dt)
          for (int df = 0; df < c.kernel_freq; ++df)
            (*d_input)((t * c.stride_time + dt) * in_freq + f * c.stride_freq + df, ch) += row[col++];
    }
  }
}

}  // namespace

PlfModel InitModel(const FrontEndConfig& config, int num_plfs, int num_phones, uint64_t seed) {
  if (config.conv.empty()) throw Error(ErrorKind::kConfig, "front-end needs at least one conv layer");
  if (config.embedding_dim < 1 || num_plfs < 1 || num_phones < 1)
    throw Error(ErrorKind::kConfig, "model dimensions must be positive");
  if (config.OutputFreq() < 1)
    throw Error(ErrorKind::kConfig, "conv stack collapses the frequency axis");
  std::mt19937_64 rng(seed);
  PlfModel model;
  auto& fe = model.frontend;
  fe.config = config;
  int channels = 1, freq = config.input_dim;
  for (const auto& c : config.conv) {
    if (c.out_channels < 1 || c.kernel_time < 1 || c.kernel_freq < 1 || c.stride_time < 1 ||
        c.stride_freq < 1)
      throw Error(ErrorKind::kConfig, "invalid conv layer configuration");
    ConvLayer layer;
    layer.config = c;
    layer.in_channels = channels;
    layer.in_freq = freq;
    layer.out_freq = (freq - c.kernel_freq) / c.stride_freq + 1;
    const int fan_in = channels * c.kernel_time * c.kernel_freq;
    layer.weight.resize(fan_in, c.out_channels);
    FillNormal(&layer.weight, std::sqrt(2.0 / fan_in), &rng);
    layer.bias = RowVector::Zero(c.out_channels);
    channels = c.out_channels;
    freq = layer.out_freq;
    fe.conv.push_back(std::move(layer));
  }
  const int flat = freq * channels;
  fe.fc_weight.resize(flat, config.embedding_dim);
  FillNormal(&fe.fc_weight, std::sqrt(2.0 / flat), &rng);
  fe.fc_bias = RowVector::Zero(config.embedding_dim);

  auto& h = model.head;
  h.plf_weight.resize(config.embedding_dim, num_plfs);
  FillNormal(&h.plf_weight, std::sqrt(1.0 / config.embedding_dim), &rng);
  h.plf_bias = RowVector::Zero(num_plfs);
  h.scale_raw = Matrix::Zero(num_phones, num_plfs);
  h.calib_scale = Vector::Ones(num_phones);
  h.calib_offset = Vector::Zero(num_phones);
  h.direct_weight.resize(config.embedding_dim, num_phones);
  FillNormal(&h.direct_weight, std::sqrt(1.0 / config.embedding_dim), &rng);
  h.direct_bias = RowVector::Zero(num_phones);
  return model;
}

PlfModel ZerosLike(const PlfModel& model) {
  PlfModel z = model;
  ForEachTensor(z, [](std::string_view, std::span<double> t) { std::fill(t.begin(), t.end(), 0.0); });
  return z;
}

namespace {

template <typename Model, typename Fn>
void VisitTensors(Model& model, Fn&& fn) {
  auto& fe = model.frontend;
  for (size_t i = 0; i < fe.conv.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i);
    fn(prefix + ".weight", fe.conv[i].weight);
    fn(prefix + ".bias", fe.conv[i].bias);
  }
  fn("fc.weight", fe.fc_weight);
  fn("fc.bias", fe.fc_bias);
  auto& h = model.head;
  fn("plf.weight", h.plf_weight);
  fn("plf.bias", h.plf_bias);
  fn("scale.raw", h.scale_raw);
  fn("calib.scale", h.calib_scale);
  fn("calib.offset", h.calib_offset);
  fn("direct.weight", h.direct_weight);
  fn("direct.bias", h.direct_bias);
}

}  // namespace

void ForEachTensor(PlfModel& model,
                   const std::function<void(std::string_view, std::span<double>)>& fn) {
  VisitTensors(model, [&fn](const std::string& name, auto& t) {
    fn(name, std::span<double>(t.data(), static_cast<size_t>(t.size())));
  });
}

void ForEachTensor(const PlfModel& model,
                   const std::function<void(std::string_view, std::span<const double>)>& fn) {
  VisitTensors(model, [&fn](const std::string& name, const auto& t) {
    fn(name, std::span<const double>(t.data(), static_cast<size_t>(t.size())));
  });
}

size_t NumParameters(const PlfModel& model) {
  size_t n = 0;
  ForEachTensor(model, [&n](std::string_view, std::span<const double> t) { n += t.size(); });
  return n;
}

Matrix ForwardFrontEnd(const FrontEndParams& params, const Matrix& frames, FrontEndCache* cache) {
  const auto& config = params.config;
  if (frames.cols() != config.input_dim)
    throw Error(ErrorKind::kDimension, "expected " + std::to_string(config.input_dim) +
                                           " input features, got " + std::to_string(frames.cols()));
  if (config.OutputFrames(frames.rows()) < 1)
    throw Error(ErrorKind::kTooShort, std::to_string(frames.rows()) +
                                          " frames is shorter than the receptive field of " +
                                          std::to_string(config.ReceptiveField()));
  FrontEndCache local;
  FrontEndCache& c = cache ? *cache : local;
  c.layer_inputs.clear();
  c.patches.clear();
  c.conv_pre.clear();

  // T x F row-major is already the (t * F + f, channel=1) layout.
  Matrix act = Eigen::Map<const Matrix>(frames.data(), frames.size(), 1);
  Eigen::Index time = frames.rows();
  for (const auto& layer : params.conv) {
    const Eigen::Index out_time = (time - layer.config.kernel_time) / layer.config.stride_time + 1;
    Matrix patches = Im2Col(act, layer.in_freq, layer, out_time);
    Matrix pre = patches * layer.weight;
    pre.rowwise() += layer.bias;
    c.layer_inputs.push_back(std::move(act));
    act = pre.cwiseMax(0.0);
    c.patches.push_back(std::move(patches));
    c.conv_pre.push_back(std::move(pre));
    time = out_time;
  }
  const Eigen::Index flat_dim = act.size() / time;
  c.flat = Eigen::Map<const Matrix>(act.data(), time, flat_dim);
  c.fc_pre = c.flat * params.fc_weight;
  c.fc_pre.rowwise() += params.fc_bias;
  c.embedding = c.fc_pre.cwiseMax(0.0);
  return c.embedding;
}

void BackwardFrontEnd(const FrontEndParams& params, const FrontEndCache& cache,
                      const Matrix& d_embedding, FrontEndParams* grad) {
  Matrix d_pre = (cache.fc_pre.array() > 0.0).select(d_embedding, 0.0);
  grad->fc_weight.noalias() += cache.flat.transpose() * d_pre;
  grad->fc_bias += d_pre.colwise().sum();
  Matrix d_flat = d_pre * params.fc_weight.transpose();

  const size_t layers = params.conv.size();
  // Gradient w.r.t. the last conv layer's post-ReLU output, in (t*f, c) layout.
  Matrix d_act = Eigen::Map<const Matrix>(d_flat.data(), cache.conv_pre.back().rows(),
                                          cache.conv_pre.back().cols());
  for (size_t i = layers; i-- > 0;) {
    const auto& layer = params.conv[i];
    Matrix d_conv = (cache.conv_pre[i].array() > 0.0).select(d_act, 0.0);
    grad->conv[i].weight.noalias() += cache.patches[i].transpose() * d_conv;
    grad->conv[i].bias += d_conv.colwise().sum();
    if (i == 0) break;
    const Matrix d_patches = d_conv * layer.weight.transpose();
    const Eigen::Index out_time = cache.conv_pre[i].rows() / layer.out_freq;
    Matrix d_input = Matrix::Zero(cache.layer_inputs[i].rows(), cache.layer_inputs[i].cols());
    Col2ImAdd(d_patches, layer.in_freq, layer, out_time, &d_input);
    d_act = std::move(d_input);
  }
}

std::vector<uint8_t> ReluPattern(const FrontEndCache& cache) {
  std::vector<uint8_t> pattern;
  for (const auto& pre : cache.conv_pre)
    for (Eigen::Index i = 0; i < pre.size(); ++i) pattern.push_back(pre.data()[i] > 0.0);
  for (Eigen::Index i = 0; i < cache.fc_pre.size(); ++i)
    pattern.push_back(cache.fc_pre.data()[i] > 0.0);
  return pattern;
}

std::vector<int> AlignLabels(const FrontEndConfig& config, std::span<const int> frame_labels) {
  const Eigen::Index out = config.OutputFrames(static_cast<Eigen::Index>(frame_labels.size()));
  std::vector<int> aligned(static_cast<size_t>(out));
  const int stride = config.TotalStride(), offset = config.CentreOffset();
  for (Eigen::Index t = 0; t < out; ++t) aligned[t] = frame_labels[t * stride + offset];
  return aligned;
}

}  // namespace plf
