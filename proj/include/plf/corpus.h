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

#ifndef PLF_CORPUS_H_
#define PLF_CORPUS_H_

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "plf/common.h"
#include "plf/phonology.h"

namespace plf {

/// One utterance: network-ready frames (T x 24), optional frame-aligned phone
/// labels (indices into the spec's phones), speaker metadata.
struct Utterance {
  std::string id;
  std::string speaker;
  Matrix frames;
  std::vector<int> labels;
  std::string pathology;
  double intelligibility = std::numeric_limits<double>::quiet_NaN();
};

/// Reference phone sequence implied by frame labels (consecutive duplicates
/// collapsed).
std::vector<int> CollapseLabels(const std::vector<int>& frame_labels);

/// Utterance manifest: CSV with columns
///   utterance_id,speaker_id,frames,labels,pathology,intelligibility
/// `frames` is a frame CSV (T rows x 24) or a .wav file (converted to
/// normalized log-Mel frames). `labels` is a text file with one phone symbol
/// per frame, or empty. Paths are relative to the manifest's directory.
std::vector<Utterance> LoadCorpus(const std::filesystem::path& manifest, const ConversionSpec& spec);
/// Writes manifest `corpus.csv`, frames/<id>.csv and labels/<id>.txt under `dir`.
std::filesystem::path WriteCorpus(const std::filesystem::path& dir,
                                  const std::vector<Utterance>& corpus, const ConversionSpec& spec);

/// Frame CSV: 24 columns m0..m23, one row per frame.
void WriteFramesCsv(const std::filesystem::path& path, const Matrix& frames);
Matrix ReadFramesCsv(const std::filesystem::path& path);

std::vector<int> ReadLabels(const std::filesystem::path& path, const ConversionSpec& spec);
void WriteLabels(const std::filesystem::path& path, const std::vector<int>& labels,
                 const ConversionSpec& spec);

/// Logits manifest (per utterance PLF logits, rows = PLFs, columns = frames):
///   utterance_id,speaker_id,logits,reference,pathology,intelligibility
struct LogitsRecord {
  std::string id;
  std::string speaker;
  Matrix logits;                 // F x T
  std::vector<int> reference;    // collapsed reference phone sequence (may be empty)
  std::string pathology;
  double intelligibility = std::numeric_limits<double>::quiet_NaN();
};
std::vector<LogitsRecord> LoadLogitsManifest(const std::filesystem::path& manifest,
                                             const ConversionSpec& spec);
std::filesystem::path WriteLogitsManifest(const std::filesystem::path& dir,
                                          const std::vector<LogitsRecord>& records,
                                          const ConversionSpec& spec);

}  // namespace plf

#endif  // PLF_CORPUS_H_
