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

#include "plf/corpus.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "plf/signal.h"

namespace plf {

namespace fs = std::filesystem;

namespace {

fs::path Resolve(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : base / p;
}

double ParseScore(const std::string& s) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN() : ParseDouble(s);
}

std::string FormatScore(double v) { return std::isnan(v) ? std::string() : FormatDouble(v); }

std::string ReferenceToString(const std::vector<int>& ref, const ConversionSpec& spec) {
  std::string out;
  for (size_t i = 0; i < ref.size(); ++i) out += (i ? " " : "") + spec.phones()[ref[i]];
  return out;
}

std::vector<int> ReferenceFromString(const std::string& s, const ConversionSpec& spec) {
  std::vector<int> out;
  std::istringstream ss(s);
  std::string sym;
  while (ss >> sym) {
    const int idx = spec.PhoneIndex(sym);
    if (idx < 0) throw Error(ErrorKind::kValidation, "unknown phone symbol '" + sym + "'");
    out.push_back(idx);
  }
  return out;
}

}  // namespace

std::vector<int> CollapseLabels(const std::vector<int>& frame_labels) {
  std::vector<int> out;
  for (int l : frame_labels)
    if (out.empty() || out.back() != l) out.push_back(l);
  return out;
}

void WriteFramesCsv(const fs::path& path, const Matrix& frames) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < frames.cols(); ++c) header.push_back("m" + std::to_string(c));
  WriteMatrixCsv(path, frames, header);
}

Matrix ReadFramesCsv(const fs::path& path) {
  Matrix m = ReadMatrixCsv(path);
  if (m.rows() == 0) throw Error(ErrorKind::kEmptyInput, path.string() + " has no frames");
  if (m.cols() != kNumMelBands)
    throw Error(ErrorKind::kDimension, path.string() + ": expected 24 columns, got " +
                                           std::to_string(m.cols()));
  return m;
}

std::vector<int> ReadLabels(const fs::path& path, const ConversionSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<int> labels;
  std::string sym;
  while (in >> sym) {
    const int idx = spec.PhoneIndex(sym);
    if (idx < 0)
      throw Error(ErrorKind::kValidation, path.string() + ": unknown phone symbol '" + sym + "'");
    labels.push_back(idx);
  }
  return labels;
}

void WriteLabels(const fs::path& path, const std::vector<int>& labels, const ConversionSpec& spec) {
  std::string out;
  for (int l : labels) out += spec.phones()[l] + "\n";
  WriteFile(path, out);
}

std::vector<Utterance> LoadCorpus(const fs::path& manifest, const ConversionSpec& spec) {
  const CsvTable table = ReadCsv(manifest);
  const fs::path base = manifest.parent_path();
  const size_t c_id = table.Column("utterance_id"), c_spk = table.Column("speaker_id"),
               c_frames = table.Column("frames"), c_labels = table.Column("labels"),
               c_path = table.Column("pathology"), c_int = table.Column("intelligibility");
  std::vector<Utterance> corpus;
  for (const auto& row : table.rows) {
    Utterance u;
    u.id = row[c_id];
    u.speaker = row[c_spk];
    const fs::path frames = Resolve(base, row[c_frames]);
    if (frames.extension() == ".wav") {
      u.frames = NormalizeFrames(MelSpectrogram(LoadWav(frames))).values;
    } else {
      u.frames = ReadFramesCsv(frames);
    }
    if (!row[c_labels].empty()) {
      u.labels = ReadLabels(Resolve(base, row[c_labels]), spec);
      if (static_cast<Eigen::Index>(u.labels.size()) != u.frames.rows())
        throw Error(ErrorKind::kDimension, "utterance " + u.id + ": " +
                                               std::to_string(u.labels.size()) + " labels for " +
                                               std::to_string(u.frames.rows()) + " frames");
    }
    u.pathology = row[c_path];
    u.intelligibility = ParseScore(row[c_int]);
    corpus.push_back(std::move(u));
  }
  return corpus;
}

fs::path WriteCorpus(const fs::path& dir, const std::vector<Utterance>& corpus,
                     const ConversionSpec& spec) {
  CsvTable t;
  t.header = {"utterance_id", "speaker_id", "frames", "labels", "pathology", "intelligibility"};
  for (const auto& u : corpus) {
    const std::string frames = "frames/" + u.id + ".csv";
    WriteFramesCsv(dir / frames, u.frames);
    std::string labels;
    if (!u.labels.empty()) {
      labels = "labels/" + u.id + ".txt";
      WriteLabels(dir / labels, u.labels, spec);
    }
    t.rows.push_back({u.id, u.speaker, frames, labels, u.pathology, FormatScore(u.intelligibility)});
  }
  const fs::path manifest = dir / "corpus.csv";
  WriteCsv(manifest, t);
  return manifest;
}

std::vector<LogitsRecord> LoadLogitsManifest(const fs::path& manifest, const ConversionSpec& spec) {
  const CsvTable table = ReadCsv(manifest);
  const fs::path base = manifest.parent_path();
  const size_t c_id = table.Column("utterance_id"), c_spk = table.Column("speaker_id"),
               c_logits = table.Column("logits"), c_ref = table.Column("reference"),
               c_path = table.Column("pathology"), c_int = table.Column("intelligibility");
  std::vector<LogitsRecord> out;
  for (const auto& row : table.rows) {
    LogitsRecord r;
    r.id = row[c_id];
    r.speaker = row[c_spk];
    r.logits = ReadMatrixCsv(Resolve(base, row[c_logits]));
    if (r.logits.rows() != spec.num_plfs())
      throw Error(ErrorKind::kDimension, "logits for " + r.id + " have " +
                                             std::to_string(r.logits.rows()) + " rows, spec has " +
                                             std::to_string(spec.num_plfs()) + " PLFs");
    r.reference = ReferenceFromString(row[c_ref], spec);
    r.pathology = row[c_path];
    r.intelligibility = ParseScore(row[c_int]);
    out.push_back(std::move(r));
  }
  return out;
}

fs::path WriteLogitsManifest(const fs::path& dir, const std::vector<LogitsRecord>& records,
                             const ConversionSpec& spec) {
  CsvTable t;
  t.header = {"utterance_id", "speaker_id", "logits", "reference", "pathology", "intelligibility"};
  for (const auto& r : records) {
    const std::string file = "logits/" + r.id + ".csv";
    WriteMatrixCsv(dir / file, r.logits, {});
    t.rows.push_back({r.id, r.speaker, file, ReferenceToString(r.reference, spec), r.pathology,
                      FormatScore(r.intelligibility)});
  }
  const fs::path manifest = dir / "logits.csv";
  WriteCsv(manifest, t);
  return manifest;
}

}  // namespace plf
