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

#ifndef PLF_SIGNAL_H_
#define PLF_SIGNAL_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "plf/common.h"

namespace plf {

constexpr int kSampleRate = 16000;
constexpr int kNumMelBands = 24;
constexpr double kWindowMs = 32.0;
constexpr double kFrameShiftMs = 10.0;
constexpr int kWindowSamples = 512;  // 32 ms @ 16 kHz
constexpr int kHopSamples = 160;     // 10 ms @ 16 kHz
constexpr double kLogFloor = 1e-10;
constexpr double kMelLowHz = 0.0;
constexpr double kMelHighHz = 8000.0;

struct Waveform {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = kSampleRate;
};

/// T x 24 log Mel filterbank energies, one row per 10 ms frame.
struct MelFrames {
  Matrix values;
  Eigen::Index num_frames() const { return values.rows(); }
};

struct AugmentConfig {
  int max_freq_masks = 2;
  int max_freq_width = 4;
  int max_time_masks = 2;
  int max_time_width = 20;
  uint64_t seed = 0;
};

/// Reads a RIFF/PCM WAV (16-bit integer or 32-bit float), downmixes to mono
/// and resamples to 16 kHz if needed.
Waveform LoadWav(const std::filesystem::path& path);
Waveform ParseWav(std::string_view bytes);
/// Writes 16-bit mono PCM; used for fixtures and round trips.
std::string EncodeWav16(const Waveform& w);

/// Linear-interpolation resampler.
Waveform Resample(const Waveform& w, int target_rate);

/// Number of frames produced for `num_samples` samples at 16 kHz.
Eigen::Index NumFrames(Eigen::Index num_samples);

/// Log Mel spectrogram: per-window DC removal, Hann window, 512-point power
/// spectrum, 24 triangular HTK-Mel filters on 0-8000 Hz, log(e + 1e-10).
MelFrames MelSpectrogram(const Waveform& w);

/// Per-utterance mean/variance normalization (per band). Bands with zero
/// variance are only mean-centred.
MelFrames NormalizeFrames(const MelFrames& m);

/// SpecAugment-style masking. Mask widths are drawn uniformly from
/// [0, max_width] and masked cells are filled with the utterance mean.
MelFrames SpecAugment(const MelFrames& m, const AugmentConfig& cfg);

}  // namespace plf

#endif  // PLF_SIGNAL_H_
