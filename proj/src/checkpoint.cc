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

#include "plf/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>

namespace plf {

using json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[] = "PLFCKPT1";
constexpr size_t kMagicLen = 8;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

}  // namespace

json TrainConfigToJson(const TrainConfig& cfg) {
  json j;
  const auto& o = cfg.objective;
  j["objective"] = {{"E", o.e},
                    {"path1_weight", o.path1_weight},
                    {"path2_weight", o.path2_weight},
                    {"path3_weight", o.path3_weight},
                    {"enable_path2", o.enable_path2},
                    {"enable_path3", o.enable_path3}};
  json conv = json::array();
  for (const auto& c : cfg.frontend.conv)
    conv.push_back({{"out_channels", c.out_channels},
                    {"kernel_time", c.kernel_time},
                    {"kernel_freq", c.kernel_freq},
                    {"stride_time", c.stride_time},
                    {"stride_freq", c.stride_freq}});
  j["frontend"] = {{"input_dim", cfg.frontend.input_dim},
                   {"conv", conv},
                   {"embedding_dim", cfg.frontend.embedding_dim}};
  j["optimizer"] = {{"learning_rate", cfg.learning_rate},
                    {"beta1", cfg.beta1},
                    {"beta2", cfg.beta2},
                    {"epsilon", cfg.epsilon}};
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["augment"] = cfg.augment;
  const auto& a = cfg.augment_config;
  j["augment_config"] = {{"max_freq_masks", a.max_freq_masks},
                         {"max_freq_width", a.max_freq_width},
                         {"max_time_masks", a.max_time_masks},
                         {"max_time_width", a.max_time_width}};
  return j;
}

TrainConfig TrainConfigFromJson(const json& j) {
  TrainConfig cfg;
  try {
    const auto& o = j.at("objective");
    cfg.objective.e = o.at("E").get<double>();
    cfg.objective.path1_weight = o.at("path1_weight").get<double>();
    cfg.objective.path2_weight = o.at("path2_weight").get<double>();
    cfg.objective.path3_weight = o.at("path3_weight").get<double>();
    cfg.objective.enable_path2 = o.at("enable_path2").get<bool>();
    cfg.objective.enable_path3 = o.at("enable_path3").get<bool>();
    const auto& fe = j.at("frontend");
    cfg.frontend.input_dim = fe.at("input_dim").get<int>();
    cfg.frontend.embedding_dim = fe.at("embedding_dim").get<int>();
    cfg.frontend.conv.clear();
    for (const auto& c : fe.at("conv"))
      cfg.frontend.conv.push_back({c.at("out_channels").get<int>(), c.at("kernel_time").get<int>(),
                                   c.at("kernel_freq").get<int>(), c.at("stride_time").get<int>(),
                                   c.at("stride_freq").get<int>()});
    const auto& opt = j.at("optimizer");
    cfg.learning_rate = opt.at("learning_rate").get<double>();
    cfg.beta1 = opt.at("beta1").get<double>();
    cfg.beta2 = opt.at("beta2").get<double>();
    cfg.epsilon = opt.at("epsilon").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.augment = j.at("augment").get<bool>();
    const auto& a = j.at("augment_config");
    cfg.augment_config.max_freq_masks = a.at("max_freq_masks").get<int>();
    cfg.augment_config.max_freq_width = a.at("max_freq_width").get<int>();
    cfg.augment_config.max_time_masks = a.at("max_time_masks").get<int>();
    cfg.augment_config.max_time_width = a.at("max_time_width").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed training config: ") + e.what());
  }
  return cfg;
}

Checkpoint MakeCheckpoint(const ConversionSpec& spec, const TrainConfig& cfg, PlfModel model) {
  return Checkpoint{spec, cfg, std::move(model), SpecHash(spec)};
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  json header;
  header["format"] = "plf-checkpoint";
  header["version"] = kCheckpointVersion;
  header["spec_hash"] = ckpt.spec_hash;
  header["spec"] = json::parse(SpecToJson(ckpt.spec));
  header["config"] = TrainConfigToJson(ckpt.config);
  header["num_plfs"] = ckpt.model.num_plfs();
  header["num_phones"] = ckpt.model.num_phones();
  json tensors = json::array();
  std::string block;
  ForEachTensor(ckpt.model, [&](std::string_view name, std::span<const double> t) {
    tensors.push_back({{"name", std::string(name)}, {"size", t.size()}});
    block.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
  });
  header["tensors"] = tensors;
  const std::string text = header.dump();
  std::string out(kMagic, kMagicLen);
  uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += text;
  out += block;
  return out;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  WriteFile(path, EncodeCheckpoint(ckpt));
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kMagicLen + 8 || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen))
    throw Error(ErrorKind::kFormat, "not a PLF checkpoint");
  uint64_t len = 0;
  std::memcpy(&len, bytes.data() + kMagicLen, sizeof(len));
  if (len > bytes.size() - kMagicLen - 8) throw Error(ErrorKind::kFormat, "truncated checkpoint header");
  json header;
  try {
    header = json::parse(bytes.substr(kMagicLen + 8, len));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("bad checkpoint header: ") + e.what());
  }
  if (header.value("version", 0) != kCheckpointVersion)
    throw Error(ErrorKind::kFormat, "unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.spec = ParseSpec(header.at("spec").dump());
  ckpt.spec_hash = header.at("spec_hash").get<std::string>();
  if (ckpt.spec_hash != SpecHash(ckpt.spec))
    throw Error(ErrorKind::kFormat, "checkpoint spec does not match its recorded hash");
  ckpt.config = TrainConfigFromJson(header.at("config"));
  ckpt.model = InitModel(ckpt.config.frontend, header.at("num_plfs").get<int>(),
                         header.at("num_phones").get<int>(), 0);
  const auto& tensors = header.at("tensors");
  size_t offset = kMagicLen + 8 + len, k = 0;
  ForEachTensor(ckpt.model, [&](std::string_view name, std::span<double> t) {
    if (k >= tensors.size() || tensors[k].at("name").get<std::string>() != name ||
        tensors[k].at("size").get<size_t>() != t.size())
      throw Error(ErrorKind::kFormat, "checkpoint tensor table mismatch at " + std::string(name));
    const size_t n = t.size() * sizeof(double);
    if (offset + n > bytes.size()) throw Error(ErrorKind::kFormat, "truncated checkpoint data");
    std::memcpy(t.data(), bytes.data() + offset, n);
    offset += n;
    ++k;
  });
  if (offset != bytes.size()) throw Error(ErrorKind::kFormat, "trailing bytes in checkpoint");
  return ckpt;
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) { return DecodeCheckpoint(ReadFile(path)); }

void CheckSpecMatches(const Checkpoint& ckpt, const ConversionSpec& spec) {
  const std::string hash = SpecHash(spec);
  if (hash != ckpt.spec_hash)
    throw Error(ErrorKind::kIncompatible, "checkpoint was trained with spec " +
                                              ckpt.spec_hash.substr(0, 12) + ", configured spec is " +
                                              hash.substr(0, 12));
}

Extraction ExtractPlf(const Checkpoint& ckpt, const Matrix& frames) {
  const Matrix embedding = ForwardFrontEnd(ckpt.model.frontend, frames);
  ObjectiveConfig cfg = ckpt.config.objective;
  cfg.enable_path2 = false;
  cfg.enable_path3 = false;
  const HeadOutputs out = ForwardHead(ckpt.model.head, ckpt.spec, embedding, cfg);
  return Extraction{PlfLogits{out.logits.transpose()}, PhoneScores{out.path1_scores.transpose()}};
}

double FramewiseAccuracy(const Checkpoint& ckpt, const std::vector<Utterance>& corpus) {
  Eigen::Index total = 0, correct = 0;
  for (const auto& u : corpus) {
    if (u.labels.empty()) continue;
    const Extraction ex = ExtractPlf(ckpt, u.frames);
    const auto labels = AlignLabels(ckpt.config.frontend, u.labels);
    const auto predicted = ArgmaxRows(ex.scores.values.transpose());
    for (size_t t = 0; t < labels.size(); ++t) correct += predicted[t] == labels[t];
    total += static_cast<Eigen::Index>(labels.size());
  }
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "no labelled frames");
  return double(correct) / double(total);
}

double SignAgreement(const Checkpoint& ckpt, const std::vector<Utterance>& corpus) {
  const Matrix& m = ckpt.spec.M();
  Eigen::Index total = 0, agree = 0;
  for (const auto& u : corpus) {
    if (u.labels.empty()) continue;
    const Extraction ex = ExtractPlf(ckpt, u.frames);
    const auto labels = AlignLabels(ckpt.config.frontend, u.labels);
    for (size_t t = 0; t < labels.size(); ++t) {
      for (Eigen::Index f = 0; f < m.cols(); ++f) {
        const double expected = m(labels[t], f);
        if (std::abs(expected) != 1.0) continue;
        ++total;
        agree += (ex.logits.values(f, t) > 0.0) == (expected > 0.0);
      }
    }
  }
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "no labelled frames");
  return double(agree) / double(total);
}

}  // namespace plf
