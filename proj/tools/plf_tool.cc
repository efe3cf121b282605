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

// plf: command-line front end for the PLF toolkit.
//
//   plf synth      generate a synthetic frame corpus or PLF-logit corpus
//   plf train      train the three-path PLF network, write a checkpoint
//   plf extract    frame-level PLF logits for every utterance of a corpus
//   plf per        phone error rate features from extracted logits
//   plf histogram  7-bin PLF histogram features from extracted logits
//   plf crossval   five-fold CV with grid search on speaker features
//   plf analyze    per-PLF correlation report against utterance scores
//   plf gradcheck  analytic vs finite-difference gradients
//
// Every run writes summary.json (inputs hash, effective config, metrics).
// Exit status: 0 ok, 1 domain error, 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plf/checkpoint.h"
#include "plf/corpus.h"
#include "plf/downstream.h"
#include "plf/features.h"
#include "plf/gradcheck.h"
#include "plf/phonology.h"
#include "plf/synthcorpus.h"
#include "plf/trainer.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Input files and their digests; the combined hash identifies a run's inputs.
class InputSet {
 public:
  void Add(const fs::path& path) {
    const std::string key = path.lexically_normal().string();
    if (files_.count(key) || !fs::is_regular_file(path)) return;
    files_[key] = plf::Sha256File(path);
  }
  // A CSV manifest plus every file named in `columns`.
  void AddManifest(const fs::path& manifest, const std::vector<std::string>& columns) {
    Add(manifest);
    const plf::CsvTable table = plf::ReadCsv(manifest);
    for (const auto& name : columns) {
      if (!table.HasColumn(name)) continue;
      const size_t c = table.Column(name);
      for (const auto& row : table.rows) {
        if (row[c].empty()) continue;
        fs::path p(row[c]);
        if (p.is_relative()) p = manifest.parent_path() / p;
        Add(p);
      }
    }
  }
  json ToJson() const {
    // Content only, so the hash does not depend on where the inputs live.
    json files = json::object();
    std::vector<std::string> digests;
    for (const auto& [path, digest] : files_) {
      files[path] = digest;
      digests.push_back(digest);
    }
    std::sort(digests.begin(), digests.end());
    std::string joined;
    for (const auto& d : digests) joined += d + "\n";
    return {{"hash", plf::Sha256Hex(joined)}, {"files", files}};
  }

 private:
  std::map<std::string, std::string> files_;
};

json Summary(const std::string& command, uint64_t seed, const json& derived_seeds,
             const InputSet& inputs, const json& config, const json& metrics) {
  json j;
  j["command"] = command;
  j["tool_version"] = kToolVersion;
  j["seed"] = seed;
  j["derived_seeds"] = derived_seeds;
  const json in = inputs.ToJson();
  j["inputs_hash"] = in["hash"];
  j["inputs"] = in["files"];
  j["config"] = config;
  j["metrics"] = metrics;
  return j;
}

void WriteSummary(const fs::path& out_dir, const json& summary) {
  plf::WriteFile(out_dir / "summary.json", summary.dump(2) + "\n");
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw plf::Error(plf::ErrorKind::kIo, "cannot create output directory " + dir.string());
}

void RequireFile(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw plf::Error(plf::ErrorKind::kIo, what + " not found: " + p.string());
}

fs::path DefaultSpecPath(const std::string& kind) {
  return plf::DataDir() / (kind == "plf" ? "plf21_template.json" : "demo_spec.json");
}

json PathsJson(const plf::ObjectiveConfig& o) {
  return {{"path1", o.path1_active()}, {"path2", o.path2_active()}, {"path3", o.path3_active()}};
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "frames";
  std::string spec;
  std::string out;
  uint64_t seed = 0;
  int healthy = -1;
  int per_class = -1;
  int utterances = 2;
  int phones = 20;
  int frames = 300;
  double sigma = 0.3;
  double cue_scale = 1.0;
  double score_noise = -1.0;
};

int RunSynth(const SynthArgs& a) {
  const fs::path spec_path = a.spec.empty() ? DefaultSpecPath(a.kind) : fs::path(a.spec);
  RequireFile(spec_path, "spec");
  const plf::ConversionSpec spec = plf::LoadSpec(spec_path);
  const fs::path out(a.out);
  EnsureDir(out);
  InputSet inputs;
  inputs.Add(spec_path);
  const uint64_t seed = plf::DeriveSeed(a.seed, "synth");
  json config, metrics;
  if (a.kind == "frames") {
    plf::SynthConfig cfg;
    cfg.seed = seed;
    if (a.healthy >= 0) cfg.healthy_speakers = a.healthy;
    if (a.per_class >= 0) cfg.speakers_per_class = a.per_class;
    cfg.utterances_per_speaker = a.utterances;
    cfg.phones_per_utterance = a.phones;
    cfg.noise_sigma = a.sigma;
    cfg.cue_scale = a.cue_scale;
    if (a.score_noise >= 0) cfg.score_noise = a.score_noise;
    const plf::SynthCorpus corpus = plf::GenerateCorpus(cfg, spec);
    plf::WriteCorpus(out, corpus.utterances, spec);
    plf::CsvTable speakers{{"speaker_id", "pathology", "severity", "intelligibility"}, {}};
    for (const auto& s : corpus.speakers)
      speakers.rows.push_back({s.id, s.pathology, plf::FormatDouble(s.severity),
                               plf::FormatDouble(s.intelligibility)});
    plf::WriteCsv(out / "speakers.csv", speakers);
    config = {{"kind", a.kind},
              {"healthy_speakers", cfg.healthy_speakers},
              {"speakers_per_class", cfg.speakers_per_class},
              {"suppression", cfg.suppression},
              {"utterances_per_speaker", cfg.utterances_per_speaker},
              {"phones_per_utterance", cfg.phones_per_utterance},
              {"frames_per_phone", cfg.frames_per_phone},
              {"frames_jitter", cfg.frames_jitter},
              {"noise_sigma", cfg.noise_sigma},
              {"cue_scale", cfg.cue_scale},
              {"penalty_per_plf", cfg.penalty_per_plf},
              {"score_noise", cfg.score_noise}};
    size_t frames = 0;
    for (const auto& u : corpus.utterances) frames += static_cast<size_t>(u.frames.rows());
    metrics = {{"speakers", corpus.speakers.size()},
               {"utterances", corpus.utterances.size()},
               {"frames", frames}};
  } else if (a.kind == "plf") {
    plf::PlfSpeakerConfig cfg;
    cfg.seed = seed;
    if (a.healthy >= 0) cfg.healthy_speakers = a.healthy;
    if (a.per_class >= 0) cfg.speakers_per_class = a.per_class;
    cfg.frames = a.frames;
    if (a.score_noise >= 0) cfg.score_noise = a.score_noise;
    const auto records = plf::GeneratePlfSpeakers(cfg, spec);
    plf::WriteLogitsManifest(out, records, spec);
    config = {{"kind", a.kind},
              {"healthy_speakers", cfg.healthy_speakers},
              {"speakers_per_class", cfg.speakers_per_class},
              {"suppression", cfg.suppression},
              {"frames", cfg.frames},
              {"amplitude", cfg.amplitude},
              {"intercept", cfg.intercept},
              {"coefficients", cfg.coefficients},
              {"score_noise", cfg.score_noise}};
    metrics = {{"speakers", records.size()}};
  } else {
    throw plf::Error(plf::ErrorKind::kConfig, "unknown synth kind " + a.kind);
  }
  config["spec"] = spec_path.string();
  WriteSummary(out, Summary("synth", a.seed, {{"synth", seed}}, inputs, config, metrics));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string spec;
  std::string corpus;
  std::string out;
  uint64_t seed = 0;
  int epochs = 30;
  double lr = 1e-3;
  double e = 4.0;
  double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 1.0;
  bool no_scaling = false;
  bool no_direct = false;
  bool no_augment = false;
  int embedding_dim = 512;
  int batch_size = 1;
  bool quiet = false;
};

int RunTrain(const TrainArgs& a) {
  const fs::path spec_path = a.spec.empty() ? DefaultSpecPath("frames") : fs::path(a.spec);
  RequireFile(spec_path, "spec");
  RequireFile(a.corpus, "corpus manifest");
  const plf::ConversionSpec spec = plf::LoadSpec(spec_path);
  const auto corpus = plf::LoadCorpus(a.corpus, spec);
  const fs::path out(a.out);
  EnsureDir(out);

  plf::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.batch_size = a.batch_size;
  cfg.objective.e = a.e;
  cfg.objective.path1_weight = a.lambda1;
  cfg.objective.path2_weight = a.lambda2;
  cfg.objective.path3_weight = a.lambda3;
  cfg.objective.enable_path2 = !a.no_scaling;
  cfg.objective.enable_path3 = !a.no_direct;
  cfg.frontend.embedding_dim = a.embedding_dim;
  cfg.augment = !a.no_augment;
  cfg.seed = plf::DeriveSeed(a.seed, "train");

  const auto start = std::chrono::steady_clock::now();
  const plf::TrainResult result = plf::Train(corpus, spec, cfg, [&](const plf::EpochStats& s) {
    if (!a.quiet)
      std::cout << "epoch " << s.epoch << " loss " << s.loss << " accuracy " << s.accuracy << std::endl;
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const plf::Checkpoint ckpt = plf::MakeCheckpoint(spec, cfg, result.model);
  plf::SaveCheckpoint(out / "model.ckpt", ckpt);
  plf::WriteTrainLog(out / "train_log.csv", result.log);

  InputSet inputs;
  inputs.Add(spec_path);
  inputs.AddManifest(a.corpus, {"frames", "labels"});
  json config = plf::TrainConfigToJson(cfg);
  config["spec"] = spec_path.string();
  config["corpus"] = a.corpus;
  config["paths"] = PathsJson(cfg.objective);
  json metrics = {{"epochs", static_cast<int>(result.log.size())},
                  {"parameters", plf::NumParameters(result.model)},
                  {"framewise_accuracy", plf::FramewiseAccuracy(ckpt, corpus)},
                  {"sign_agreement", plf::SignAgreement(ckpt, corpus)},
                  {"train_seconds", seconds}};
  if (!result.log.empty()) {
    metrics["final_loss"] = result.log.back().loss;
    metrics["final_train_accuracy"] = result.log.back().accuracy;
  }
  WriteSummary(out, Summary("train", a.seed, {{"train", cfg.seed}}, inputs, config, metrics));
  std::cout << "framewise accuracy " << metrics["framewise_accuracy"].get<double>()
            << ", sign agreement " << metrics["sign_agreement"].get<double>() << "\n";
  return 0;
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string checkpoint;
  std::string spec;
  std::string corpus;
  std::string out;
  uint64_t seed = 0;
};

int RunExtract(const ExtractArgs& a) {
  RequireFile(a.checkpoint, "checkpoint");
  RequireFile(a.corpus, "corpus manifest");
  const plf::Checkpoint ckpt = plf::LoadCheckpoint(a.checkpoint);
  InputSet inputs;
  inputs.Add(a.checkpoint);
  if (!a.spec.empty()) {
    RequireFile(a.spec, "spec");
    plf::CheckSpecMatches(ckpt, plf::LoadSpec(a.spec));
    inputs.Add(a.spec);
  }
  const auto corpus = plf::LoadCorpus(a.corpus, ckpt.spec);
  inputs.AddManifest(a.corpus, {"frames", "labels"});
  const fs::path out(a.out);
  EnsureDir(out);

  std::vector<plf::LogitsRecord> records;
  size_t frames = 0;
  for (const auto& u : corpus) {
    const plf::Extraction ex = plf::ExtractPlf(ckpt, u.frames);
    frames += static_cast<size_t>(ex.logits.values.cols());
    records.push_back({u.id, u.speaker, ex.logits.values, plf::CollapseLabels(u.labels), u.pathology,
                       u.intelligibility});
  }
  plf::WriteLogitsManifest(out, records, ckpt.spec);
  plf::ExportSpecCsv(out / "conversion_matrix.csv", ckpt.spec);

  json config = {{"checkpoint", a.checkpoint}, {"corpus", a.corpus}, {"spec_hash", ckpt.spec_hash}};
  json metrics = {{"utterances", records.size()}, {"plf_frames", frames}};
  for (const auto& u : corpus)
    if (!u.labels.empty()) {
      metrics["framewise_accuracy"] = plf::FramewiseAccuracy(ckpt, corpus);
      metrics["sign_agreement"] = plf::SignAgreement(ckpt, corpus);
      break;
    }
  WriteSummary(out, Summary("extract", a.seed, json::object(), inputs, config, metrics));
  std::cout << "extracted " << records.size() << " utterances to " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------- per / histogram features

struct FeatureArgs {
  std::string logits;
  std::string spec;
  std::string checkpoint;
  std::string out;
  std::string level = "speaker";
  std::string silence;
  double e = 4.0;
  uint64_t seed = 0;
};

// Spec and compression constant for decoding: from the checkpoint when given.
struct DecodeContext {
  plf::ConversionSpec spec;
  double e = 4.0;
};

DecodeContext ResolveDecodeContext(const FeatureArgs& a, InputSet* inputs) {
  if (!a.checkpoint.empty()) {
    RequireFile(a.checkpoint, "checkpoint");
    inputs->Add(a.checkpoint);
    const plf::Checkpoint ckpt = plf::LoadCheckpoint(a.checkpoint);
    if (!a.spec.empty()) {
      RequireFile(a.spec, "spec");
      inputs->Add(a.spec);
      plf::CheckSpecMatches(ckpt, plf::LoadSpec(a.spec));
    }
    return {ckpt.spec, ckpt.config.objective.e};
  }
  const fs::path spec_path = a.spec.empty() ? DefaultSpecPath("frames") : fs::path(a.spec);
  RequireFile(spec_path, "spec");
  inputs->Add(spec_path);
  return {plf::LoadSpec(spec_path), a.e};
}

// Rows of the feature table: utterances grouped by speaker or kept apart.
struct FeatureUnit {
  std::string id;
  std::string pathology;
  std::vector<const plf::LogitsRecord*> records;
};

std::vector<FeatureUnit> GroupRecords(const std::vector<plf::LogitsRecord>& records,
                                      const std::string& level) {
  std::vector<FeatureUnit> units;
  std::map<std::string, size_t> index;
  for (const auto& r : records) {
    const std::string key = level == "speaker" ? r.speaker : r.id;
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, units.size()).first;
      units.push_back({key, r.pathology, {}});
    } else if (units[it->second].pathology != r.pathology) {
      throw plf::Error(plf::ErrorKind::kValidation, "speaker " + key + " has inconsistent pathology");
    }
    units[it->second].records.push_back(&r);
  }
  return units;
}

double MeanIntelligibility(const FeatureUnit& u) {
  double sum = 0.0;
  int n = 0;
  for (const auto* r : u.records)
    if (!std::isnan(r->intelligibility)) sum += r->intelligibility, ++n;
  return n ? sum / n : std::nan("");
}

void WriteFeatureOutputs(const fs::path& out, const std::string& kind, const FeatureArgs& a,
                         const std::vector<FeatureUnit>& units, const plf::CsvTable& table) {
  const std::string features = kind + "_features.csv";
  plf::WriteCsv(out / features, table);
  if (a.level != "speaker") return;
  plf::CsvTable dataset{{"speaker_id", "feature_file", "pathology", "intelligibility"}, {}};
  for (const auto& u : units)
    dataset.rows.push_back({u.id, features, u.pathology, plf::FormatDouble(MeanIntelligibility(u))});
  plf::WriteCsv(out / (kind + "_dataset.csv"), dataset);
}

void CheckLevel(const std::string& level) {
  if (level != "speaker" && level != "utterance")
    throw plf::Error(plf::ErrorKind::kConfig, "level must be speaker or utterance");
}

std::vector<int> WithoutSymbol(std::vector<int> seq, int symbol) {
  if (symbol >= 0) std::erase(seq, symbol);
  return seq;
}

int RunPer(const FeatureArgs& a) {
  CheckLevel(a.level);
  RequireFile(a.logits, "logits manifest");
  InputSet inputs;
  const DecodeContext ctx = ResolveDecodeContext(a, &inputs);
  const auto records = plf::LoadLogitsManifest(a.logits, ctx.spec);
  inputs.AddManifest(a.logits, {"logits"});
  int silence = -1;
  if (!a.silence.empty()) {
    silence = ctx.spec.PhoneIndex(a.silence);
    if (silence < 0) throw plf::Error(plf::ErrorKind::kValidation, "unknown silence phone " + a.silence);
  }
  const fs::path out(a.out);
  EnsureDir(out);

  const auto units = GroupRecords(records, a.level);
  plf::CsvTable table;
  table.header = {"id"};
  for (const auto& c : plf::PerColumnNames()) table.header.push_back(c);
  double per_sum = 0.0;
  for (const auto& u : units) {
    plf::AlignmentCounts total;
    for (const auto* r : u.records) {
      const plf::Matrix scores =
          plf::ScorePhones(r->logits.transpose(), ctx.spec, ctx.spec.M(), ctx.e);
      const auto hyp = plf::DecodePhones(plf::PhoneScores{scores.transpose()}, silence);
      const auto ref = WithoutSymbol(r->reference, silence);
      const plf::AlignmentCounts c = plf::Align(ref, hyp);
      total.insertions += c.insertions;
      total.deletions += c.deletions;
      total.substitutions += c.substitutions;
      total.ref_length += c.ref_length;
    }
    const double n = total.ref_length;
    const double per = total.distance() / n;
    per_sum += per;
    table.rows.push_back({u.id, plf::FormatDouble(per), plf::FormatDouble(total.insertions / n),
                          plf::FormatDouble(total.deletions / n),
                          plf::FormatDouble(total.substitutions / n)});
  }
  WriteFeatureOutputs(out, "per", a, units, table);
  json config = {{"logits", a.logits}, {"level", a.level}, {"silence", a.silence}, {"E", ctx.e},
                 {"spec_hash", plf::SpecHash(ctx.spec)}};
  json metrics = {{"rows", units.size()}, {"mean_per", units.empty() ? 0.0 : per_sum / units.size()}};
  WriteSummary(out, Summary("per", a.seed, json::object(), inputs, config, metrics));
  std::cout << "mean PER " << metrics["mean_per"].get<double>() << " over " << units.size() << " rows\n";
  return 0;
}

int RunHistogram(const FeatureArgs& a) {
  CheckLevel(a.level);
  RequireFile(a.logits, "logits manifest");
  InputSet inputs;
  const DecodeContext ctx = ResolveDecodeContext(a, &inputs);
  const auto records = plf::LoadLogitsManifest(a.logits, ctx.spec);
  inputs.AddManifest(a.logits, {"logits"});
  const fs::path out(a.out);
  EnsureDir(out);

  const auto units = GroupRecords(records, a.level);
  plf::CsvTable table;
  table.header = {"id"};
  for (const auto& c : plf::HistogramColumnNames(ctx.spec.inventory().names)) table.header.push_back(c);
  for (const auto& u : units) {
    Eigen::Index frames = 0;
    for (const auto* r : u.records) frames += r->logits.cols();
    plf::Matrix pooled(ctx.spec.num_plfs(), frames);
    Eigen::Index col = 0;
    for (const auto* r : u.records) {
      pooled.middleCols(col, r->logits.cols()) = r->logits;
      col += r->logits.cols();
    }
    const plf::Vector flat = plf::PlfHistogram(plf::PlfLogits{pooled}).Flatten();
    plf::CsvRow row{u.id};
    for (Eigen::Index i = 0; i < flat.size(); ++i) row.push_back(plf::FormatDouble(flat[i]));
    table.rows.push_back(std::move(row));
  }
  WriteFeatureOutputs(out, "histogram", a, units, table);
  json config = {{"logits", a.logits}, {"level", a.level}, {"spec_hash", plf::SpecHash(ctx.spec)}};
  json metrics = {{"rows", units.size()}, {"features_per_row", table.header.size() - 1}};
  WriteSummary(out, Summary("histogram", a.seed, json::object(), inputs, config, metrics));
  std::cout << units.size() << " rows x " << table.header.size() - 1 << " histogram features\n";
  return 0;
}

// ---------------------------------------------------------------- crossval

struct CrossvalArgs {
  std::vector<std::string> datasets;
  std::string task = "intelligibility";
  std::string features = "all";
  std::string out;
  bool stratify = false;
  uint64_t seed = 0;
};

// Joins several dataset manifests on speaker id, concatenating features.
std::vector<plf::SpeakerRecord> LoadJoinedRecords(const std::vector<std::string>& manifests,
                                                  const std::string& selector,
                                                  std::vector<std::string>* columns) {
  std::vector<plf::SpeakerRecord> joined;
  for (size_t k = 0; k < manifests.size(); ++k) {
    const fs::path manifest(manifests[k]);
    const plf::CsvTable table = plf::ReadCsv(manifest);
    if (table.rows.empty()) throw plf::Error(plf::ErrorKind::kEmptyInput, "empty dataset " + manifests[k]);
    fs::path first(table.rows[0][table.Column("feature_file")]);
    if (first.is_relative()) first = manifest.parent_path() / first;
    const auto header = plf::ReadCsv(first).header;
    const auto selected = plf::SelectFeatureColumns(header, selector);
    if (selected.empty()) continue;
    auto records = plf::LoadSpeakerRecords(manifest, selected);
    columns->insert(columns->end(), selected.begin(), selected.end());
    if (joined.empty()) {
      joined = std::move(records);
      continue;
    }
    std::map<std::string, const plf::SpeakerRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;
    for (auto& r : joined) {
      auto it = by_id.find(r.id);
      if (it == by_id.end())
        throw plf::Error(plf::ErrorKind::kValidation, "speaker " + r.id + " missing from " + manifests[k]);
      plf::Vector merged(r.features.size() + it->second->features.size());
      merged << r.features, it->second->features;
      r.features = std::move(merged);
    }
  }
  if (joined.empty())
    throw plf::Error(plf::ErrorKind::kEmptyInput, "no feature columns match selector " + selector);
  return joined;
}

json ModelPointJson(const plf::ModelPoint& p) {
  return {{"family", plf::FamilyName(p.family)}, {"model", p.ToString()}};
}

int RunCrossval(const CrossvalArgs& a) {
  plf::Task task;
  if (a.task == "intelligibility") task = plf::Task::kRegression;
  else if (a.task == "pathology") task = plf::Task::kClassification;
  else throw plf::Error(plf::ErrorKind::kConfig, "task must be intelligibility or pathology");
  if (a.features != "histogram" && a.features != "per" && a.features != "all")
    throw plf::Error(plf::ErrorKind::kConfig, "features must be histogram, per or all");
  InputSet inputs;
  for (const auto& d : a.datasets) {
    RequireFile(d, "dataset manifest");
    inputs.AddManifest(d, {"feature_file"});
  }
  std::vector<std::string> columns;
  const auto records = LoadJoinedRecords(a.datasets, a.features, &columns);
  const fs::path out(a.out);
  EnsureDir(out);

  const uint64_t seed = plf::DeriveSeed(a.seed, "crossval");
  const plf::CvPlan plan = plf::MakeFolds(records, seed, a.stratify);
  const plf::ModelSpace space = plf::ModelSpace::Default(task);
  const plf::CvResult cv = plf::CrossValidate(records, task, space, plan);
  for (const auto& fold : cv.folds) plf::CheckNoLeakage(records, fold);
  plf::WriteCvResults(out / "cv_results.csv", cv);

  json folds = json::array();
  for (const auto& f : cv.folds) {
    json audit = json::array();
    for (const auto& e : f.selection.audit)
      audit.push_back({{"model", e.point.ToString()}, {"metric", e.metric}, {"split", e.split}});
    folds.push_back({{"fold", f.fold},
                     {"train", f.train.size()},
                     {"validation", f.validation.size()},
                     {"test", f.test.size()},
                     {"selected", ModelPointJson(f.selection.best)},
                     {"validation_metric", f.selection.best_metric},
                     {"fallback_to_train", f.selection.fallback_to_train},
                     {"metric", f.metric},
                     {"baseline_metric", f.baseline_metric},
                     {"audit", audit}});
  }
  plf::WriteFile(out / "folds.json", folds.dump(2) + "\n");
  const std::string metric_name = task == plf::Task::kRegression ? "rmse" : "accuracy";
  json config = {{"task", a.task},
                 {"features", a.features},
                 {"feature_columns", columns.size()},
                 {"stratify", a.stratify},
                 {"folds", plf::kNumFolds},
                 {"validation_fraction", plan.validation_fraction},
                 {"datasets", a.datasets}};
  json metrics = {{"speakers", records.size()},
                  {"metric", metric_name},
                  {"mean_" + metric_name, cv.mean_metric},
                  {"mean_baseline_" + metric_name, cv.mean_baseline},
                  {"leakage_check", "passed"}};
  WriteSummary(out, Summary("crossval", a.seed, {{"crossval", seed}}, inputs, config, metrics));
  std::cout << "mean " << metric_name << " " << cv.mean_metric << " (baseline " << cv.mean_baseline << ")\n";
  return 0;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string logits;
  std::string spec;
  std::string out;
  uint64_t seed = 0;
};

int RunAnalyze(const AnalyzeArgs& a) {
  RequireFile(a.logits, "logits manifest");
  const fs::path spec_path = a.spec.empty() ? DefaultSpecPath("frames") : fs::path(a.spec);
  RequireFile(spec_path, "spec");
  const plf::ConversionSpec spec = plf::LoadSpec(spec_path);
  const auto records = plf::LoadLogitsManifest(a.logits, spec);
  InputSet inputs;
  inputs.Add(spec_path);
  inputs.AddManifest(a.logits, {"logits"});
  const fs::path out(a.out);
  EnsureDir(out);

  std::vector<plf::PlfLogits> logits;
  std::vector<double> scores;
  for (const auto& r : records) {
    if (std::isnan(r.intelligibility)) continue;
    logits.push_back({r.logits});
    scores.push_back(r.intelligibility);
  }
  const auto rows = plf::CorrelationReport(logits, scores, spec.inventory().names);
  plf::WriteCorrelationCsv(out / "correlation.csv", rows);

  json best = json::object();
  for (const auto& r : rows) best[r.plf] = {{"mean_r", r.mean_r}, {"bin", r.bin_label}, {"bin_r", r.bin_r}};
  json config = {{"logits", a.logits}, {"spec", spec_path.string()}};
  json metrics = {{"utterances", scores.size()}, {"plfs", best}};
  WriteSummary(out, Summary("analyze", a.seed, json::object(), inputs, config, metrics));
  std::cout << "correlation report for " << scores.size() << " utterances written to "
            << (out / "correlation.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  uint64_t seed = 0;
  int configurations = 100;
  int coordinates = 16;
  double tolerance = 1e-4;
  std::string out;
};

int RunGradcheck(const GradcheckArgs& a) {
  plf::GradCheckOptions opt;
  opt.seed = a.seed;
  opt.configurations = a.configurations;
  opt.coordinates_per_tensor = a.coordinates;
  opt.tolerance = a.tolerance;
  if (opt.configurations < 1 || opt.coordinates_per_tensor < 1 || !(opt.tolerance > 0.0))
    throw plf::Error(plf::ErrorKind::kConfig, "configs, coords and tolerance must be positive");
  const plf::GradCheckReport r = plf::RunGradientCheck(opt);
  std::cout << "max relative error " << r.max_relative_error << " over " << r.checked
            << " coordinates (" << r.skipped << " skipped at ReLU kinks, " << r.configurations
            << " configurations)\n";
  if (!r.passed()) std::cout << "worst: " << r.worst << "\n";
  if (!a.out.empty()) {
    const fs::path out(a.out);
    EnsureDir(out);
    json config = {{"configurations", opt.configurations},
                   {"max_phones", opt.max_phones},
                   {"max_plfs", opt.max_plfs},
                   {"max_frames", opt.max_frames},
                   {"step", opt.step},
                   {"tolerance", opt.tolerance},
                   {"magnitude_floor", opt.magnitude_floor},
                   {"coordinates_per_tensor", opt.coordinates_per_tensor}};
    json metrics = {{"max_relative_error", r.max_relative_error},
                    {"checked", r.checked},
                    {"skipped", r.skipped},
                    {"worst", r.worst},
                    {"passed", r.passed()}};
    WriteSummary(out, Summary("gradcheck", a.seed, json::object(), InputSet(), config, metrics));
  }
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonological-feature toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::function<int()> run;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus");
  s->add_option("--kind", synth.kind, "frames (acoustic frames + labels) or plf (utterance PLF logits)")
      ->check(CLI::IsMember({"frames", "plf"}))
      ->capture_default_str();
  s->add_option("--spec", synth.spec, "conversion spec JSON (default: shipped demo or 21-PLF template)");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--seed", synth.seed, "master seed")->capture_default_str();
  s->add_option("--healthy", synth.healthy, "healthy speakers");
  s->add_option("--per-class", synth.per_class, "speakers per pathology class");
  s->add_option("--utterances", synth.utterances, "utterances per speaker (frames)")->capture_default_str();
  s->add_option("--phones", synth.phones, "phones per utterance (frames)")->capture_default_str();
  s->add_option("--frames", synth.frames, "frames per speaker (plf)")->capture_default_str();
  s->add_option("--sigma", synth.sigma, "frame noise standard deviation (frames)")->capture_default_str();
  s->add_option("--cue-scale", synth.cue_scale, "cue amplitude (frames)")->capture_default_str();
  s->add_option("--score-noise", synth.score_noise, "intelligibility noise standard deviation");
  s->callback([&] { run = [&] { return RunSynth(synth); }; });

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the PLF network");
  t->add_option("--spec", train.spec, "conversion spec JSON (default: shipped demo)");
  t->add_option("--corpus", train.corpus, "utterance manifest CSV")->required();
  t->add_option("--out", train.out, "output directory (model.ckpt, train_log.csv)")->required();
  t->add_option("--seed", train.seed, "master seed")->capture_default_str();
  t->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  t->add_option("--lr", train.lr, "Adam step size")->capture_default_str();
  t->add_option("--E", train.e, "compression constant")->capture_default_str();
  t->add_option("--lambda1", train.lambda1, "weight of the fixed-matrix path")->capture_default_str();
  t->add_option("--lambda2", train.lambda2, "weight of the scaled-matrix path")->capture_default_str();
  t->add_option("--lambda3", train.lambda3, "weight of the direct phone path")->capture_default_str();
  t->add_flag("--no-scaling-matrix", train.no_scaling, "disable the learnable scaling/calibration path");
  t->add_flag("--no-direct-path", train.no_direct, "disable the direct phone classification path");
  t->add_flag("--no-augment", train.no_augment, "disable SpecAugment masking");
  t->add_option("--embedding-dim", train.embedding_dim, "front-end embedding size")->capture_default_str();
  t->add_option("--batch-size", train.batch_size, "utterances per update")->capture_default_str();
  t->add_flag("--quiet", train.quiet, "no per-epoch output");
  t->callback([&] { run = [&] { return RunTrain(train); }; });

  ExtractArgs extract;
  auto* x = app.add_subcommand("extract", "Extract frame-level PLF logits");
  x->add_option("--checkpoint", extract.checkpoint, "trained checkpoint")->required();
  x->add_option("--spec", extract.spec, "spec that must match the checkpoint");
  x->add_option("--corpus", extract.corpus, "utterance manifest CSV")->required();
  x->add_option("--out", extract.out, "output directory")->required();
  x->add_option("--seed", extract.seed, "master seed (recorded only)");
  x->callback([&] { run = [&] { return RunExtract(extract); }; });

  FeatureArgs per, hist;
  for (auto [name, args, help] : {std::tuple{"per", &per, "Phone error rate features"},
                                  std::tuple{"histogram", &hist, "PLF histogram features"}}) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--logits", args->logits, "logits manifest CSV")->required();
    c->add_option("--checkpoint", args->checkpoint, "checkpoint supplying spec and E");
    c->add_option("--spec", args->spec, "conversion spec JSON");
    c->add_option("--out", args->out, "output directory")->required();
    c->add_option("--level", args->level, "speaker or utterance rows")->capture_default_str();
    c->add_option("--seed", args->seed, "master seed (recorded only)");
    if (std::string(name) == "per") {
      c->add_option("--E", args->e, "compression constant when no checkpoint is given")
          ->capture_default_str();
      c->add_option("--silence", args->silence, "phone symbol removed from both sequences");
    }
  }
  app.get_subcommand("per")->callback([&] { run = [&] { return RunPer(per); }; });
  app.get_subcommand("histogram")->callback([&] { run = [&] { return RunHistogram(hist); }; });

  CrossvalArgs cv;
  auto* v = app.add_subcommand("crossval", "Five-fold cross-validation with grid search");
  v->add_option("--dataset", cv.datasets, "dataset manifest(s); several are joined on speaker id")
      ->required();
  v->add_option("--task", cv.task, "intelligibility or pathology")->capture_default_str();
  v->add_option("--features", cv.features, "histogram, per or all")->capture_default_str();
  v->add_option("--out", cv.out, "output directory")->required();
  v->add_flag("--stratify", cv.stratify, "stratify folds by pathology");
  v->add_option("--seed", cv.seed, "master seed")->capture_default_str();
  v->callback([&] { run = [&] { return RunCrossval(cv); }; });

  AnalyzeArgs analyze;
  auto* n = app.add_subcommand("analyze", "Correlation of PLF statistics with utterance scores");
  n->add_option("--logits", analyze.logits, "logits manifest CSV")->required();
  n->add_option("--spec", analyze.spec, "conversion spec JSON");
  n->add_option("--out", analyze.out, "output directory")->required();
  n->add_option("--seed", analyze.seed, "master seed (recorded only)");
  n->callback([&] { run = [&] { return RunAnalyze(analyze); }; });

  GradcheckArgs grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the training gradients");
  g->add_option("--seed", grad.seed, "master seed")->capture_default_str();
  g->add_option("--configs", grad.configurations, "random configurations")->capture_default_str();
  g->add_option("--coords", grad.coordinates, "sampled coordinates per tensor")->capture_default_str();
  g->add_option("--tolerance", grad.tolerance, "maximum relative error")->capture_default_str();
  g->add_option("--out", grad.out, "directory for summary.json");
  g->callback([&] { run = [&] { return RunGradcheck(grad); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    return run();
  } catch (const plf::Error& e) {
    std::cerr << "plf: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "plf: format error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "plf: " << e.what() << "\n";
    return 1;
  }
}
