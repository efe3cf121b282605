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

#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "plf/common.h"
#include "plf/corpus.h"
#include "plf/signal.h"
#include "plf/synthcorpus.h"

namespace plf {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST(CommonTest, SeedsAndDigests) {
  EXPECT_EQ(DeriveSeed(1, "a"), DeriveSeed(1, "a"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(2, "a"));
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CommonTest, DoubleFormattingRoundTrips) {
  for (double v : {0.1, -3.25, 1e-300, 123456789.125, 1.0 / 3.0})
    EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  EXPECT_THROW(ParseDouble("1.5x"), Error);
  EXPECT_TRUE(std::isnan(ParseDouble("nan")));
}

TEST(CorpusIoTest, WriteLoadRoundTrip) {
  const ConversionSpec spec = DemoSpec();
  SynthConfig cfg;
  cfg.healthy_speakers = 2;
  cfg.speakers_per_class = 1;
  const SynthCorpus c = GenerateCorpus(cfg, spec);
  const fs::path dir = TempDir("plf_corpus_io");
  const fs::path manifest = WriteCorpus(dir, c.utterances, spec);
  const auto back = LoadCorpus(manifest, spec);
  ASSERT_EQ(back.size(), c.utterances.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, c.utterances[i].id);
    EXPECT_EQ(back[i].speaker, c.utterances[i].speaker);
    EXPECT_EQ(back[i].frames, c.utterances[i].frames);
    EXPECT_EQ(back[i].labels, c.utterances[i].labels);
    EXPECT_EQ(back[i].pathology, c.utterances[i].pathology);
    EXPECT_EQ(back[i].intelligibility, c.utterances[i].intelligibility);
  }
  fs::remove_all(dir);
}

TEST(CorpusIoTest, WavUtterancesBecomeNormalizedFrames) {
  const ConversionSpec spec = DemoSpec();
  const fs::path dir = TempDir("plf_corpus_wav");
  Waveform w;
  for (int i = 0; i < 8000; ++i) w.samples.push_back(0.3 * std::sin(i * 0.07) + 0.1 * std::sin(i * 0.9));
  WriteFile(dir / "a.wav", EncodeWav16(w));
  WriteFile(dir / "corpus.csv",
            "utterance_id,speaker_id,frames,labels,pathology,intelligibility\nu1,s1,a.wav,,healthy,\n");
  const auto corpus = LoadCorpus(dir / "corpus.csv", spec);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0].frames.rows(), NumFrames(8000));
  EXPECT_EQ(corpus[0].frames.cols(), 24);
  EXPECT_TRUE(corpus[0].labels.empty());
  EXPECT_TRUE(std::isnan(corpus[0].intelligibility));
  EXPECT_NEAR(corpus[0].frames.col(3).mean(), 0.0, 1e-9);
  fs::remove_all(dir);
}

TEST(CorpusIoTest, UnknownPhoneLabelRejected) {
  const ConversionSpec spec = DemoSpec();
  const fs::path dir = TempDir("plf_corpus_bad");
  WriteFramesCsv(dir / "f.csv", Matrix::Zero(3, 24));
  WriteFile(dir / "l.txt", "p\nzz\np\n");
  WriteFile(dir / "corpus.csv",
            "utterance_id,speaker_id,frames,labels,pathology,intelligibility\nu1,s1,f.csv,l.txt,healthy,50\n");
  EXPECT_THROW(LoadCorpus(dir / "corpus.csv", spec), Error);
  fs::remove_all(dir);
}

TEST(CorpusIoTest, LogitsManifestRoundTrip) {
  const ConversionSpec spec = DemoSpec();
  LogitsRecord r{"u1", "s1", Matrix::Random(8, 5), {0, 3, 4}, "healthy", 77.5};
  LogitsRecord q{"u2", "s2", Matrix::Random(8, 2), {}, "devoicing", std::nan("")};
  const fs::path dir = TempDir("plf_logits_io");
  const fs::path manifest = WriteLogitsManifest(dir, {r, q}, spec);
  const auto back = LoadLogitsManifest(manifest, spec);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].logits, r.logits);
  EXPECT_EQ(back[0].reference, r.reference);
  EXPECT_EQ(back[0].intelligibility, 77.5);
  EXPECT_TRUE(back[1].reference.empty());
  EXPECT_TRUE(std::isnan(back[1].intelligibility));
  fs::remove_all(dir);
}

TEST(CorpusIoTest, CollapseLabels) {
  EXPECT_EQ(CollapseLabels({1, 1, 2, 2, 2, 1, 3}), (std::vector<int>{1, 2, 1, 3}));
  EXPECT_TRUE(CollapseLabels({}).empty());
}

}  // namespace
}  // namespace plf
