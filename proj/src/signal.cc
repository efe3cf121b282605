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

#include "plf/signal.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <random>

namespace plf {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}
uint16_t ReadU16(const unsigned char* p) { return uint16_t(p[0] | (p[1] << 8)); }

void PutU32(std::string* s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string* s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>(v >> 8));
}

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

constexpr int kFftBins = kWindowSamples / 2 + 1;

/// 24 x 257 triangular filter weights, computed once.
const Matrix& MelFilterbank() {
  static const Matrix bank = [] {
    Matrix w = Matrix::Zero(kNumMelBands, kFftBins);
    const double mel_lo = HzToMel(kMelLowHz), mel_hi = HzToMel(kMelHighHz);
    const double step = (mel_hi - mel_lo) / (kNumMelBands + 1);
    for (int b = 0; b < kNumMelBands; ++b) {
      const double left = mel_lo + b * step, centre = left + step, right = centre + step;
      for (int k = 0; k < kFftBins; ++k) {
        const double mel = HzToMel(double(k) * kSampleRate / kWindowSamples);
        if (mel > left && mel < right)
          w(b, k) = mel <= centre ? (mel - left) / (centre - left) : (right - mel) / (right - centre);
      }
    }
    return w;
  }();
  return bank;
}

const std::vector<double>& HannWindow() {
  static const std::vector<double> win = [] {
    std::vector<double> w(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (kWindowSamples - 1));
    return w;
  }();
  return win;
}

// FFTW planning is not thread-safe; execution with new-array API is.
std::mutex fftw_plan_mutex;

}  // namespace

Waveform ParseWav(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::kFormat, "not a RIFF/WAVE file");
  int format = -1, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= n) {
    const uint32_t len = ReadU32(p + pos + 4);
    const unsigned char* body = p + pos + 8;
    const size_t avail = n - (pos + 8);
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) throw Error(ErrorKind::kFormat, "truncated fmt chunk");
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      if (format == 0xFFFE) {
        if (len < 40 || avail < 40) throw Error(ErrorKind::kFormat, "truncated extensible fmt chunk");
        format = ReadU16(body + 24);
      }
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      data = body;
      data_len = std::min<size_t>(len, avail);
      break;
    }
    if (len > avail) throw Error(ErrorKind::kFormat, "truncated chunk");
    pos += 8 + len + (len & 1);
  }
  if (format < 0) throw Error(ErrorKind::kFormat, "missing fmt chunk");
  if (!data) throw Error(ErrorKind::kFormat, "missing data chunk");
  if (channels < 1 || rate == 0) throw Error(ErrorKind::kFormat, "bad channel count or sample rate");
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32)
    throw Error(ErrorKind::kFormat, "unsupported encoding (need 16-bit PCM or 32-bit float)");
  const size_t bytes_per_sample = bits / 8;
  const size_t frames = data_len / (bytes_per_sample * channels);
  if (frames == 0) throw Error(ErrorKind::kEmptyInput, "WAV contains no samples");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* s = data + (i * channels + c) * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<int16_t>(ReadU16(s)) / 32768.0;
      } else {
        float f;
        uint32_t u = ReadU32(s);
        std::memcpy(&f, &u, sizeof(f));
        acc += std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
    }
    w.samples[i] = acc / channels;
    if (!std::isfinite(w.samples[i])) throw Error(ErrorKind::kFormat, "non-finite sample");
  }
  if (w.sample_rate != kSampleRate) w = Resample(w, kSampleRate);
  return w;
}

Waveform LoadWav(const std::filesystem::path& path) { return ParseWav(ReadFile(path)); }

std::string EncodeWav16(const Waveform& w) {
  const uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);
  std::string out = "RIFF";
  PutU32(&out, 36 + data_len);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(w.sample_rate));
  PutU32(&out, static_cast<uint32_t>(w.sample_rate * 2));
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_len);
  for (double s : w.samples) {
    const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

Waveform Resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw Error(ErrorKind::kConfig, "target rate must be positive");
  if (w.samples.empty()) throw Error(ErrorKind::kEmptyInput, "empty waveform");
  if (w.sample_rate == target_rate) return w;
  const double ratio = double(w.sample_rate) / target_rate;
  const size_t n_out = std::max<size_t>(
      1, static_cast<size_t>(std::floor((w.samples.size() - 1) / ratio)) + 1);
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    const double src = i * ratio;
    const size_t i0 = std::min(static_cast<size_t>(src), w.samples.size() - 1);
    const size_t i1 = std::min(i0 + 1, w.samples.size() - 1);
    const double frac = src - i0;
    out.samples[i] = (1.0 - frac) * w.samples[i0] + frac * w.samples[i1];
  }
  return out;
}

Eigen::Index NumFrames(Eigen::Index num_samples) {
  if (num_samples < kWindowSamples) return 0;
  return (num_samples - kWindowSamples) / kHopSamples + 1;
}

MelFrames MelSpectrogram(const Waveform& w) {
  if (w.sample_rate != kSampleRate)
    throw Error(ErrorKind::kConfig, "mel_spectrogram expects 16 kHz input");
  const Eigen::Index n = static_cast<Eigen::Index>(w.samples.size());
  const Eigen::Index frames = NumFrames(n);
  if (frames < 1)
    throw Error(ErrorKind::kTooShort, "waveform of " + std::to_string(n) +
                                          " samples is shorter than one 512-sample window");
  for (double s : w.samples)
    if (!std::isfinite(s)) throw Error(ErrorKind::kValidation, "non-finite sample");

  double* in = fftw_alloc_real(kWindowSamples);
  fftw_complex* spec = fftw_alloc_complex(kFftBins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan = fftw_plan_dft_r2c_1d(kWindowSamples, in, spec, FFTW_ESTIMATE);
  }
  const auto& window = HannWindow();
  const Matrix& bank = MelFilterbank();
  MelFrames out;
  out.values.resize(frames, kNumMelBands);
  Vector power(kFftBins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + t * kHopSamples;
    double mean = 0.0;
    for (int i = 0; i < kWindowSamples; ++i) mean += src[i];
    mean /= kWindowSamples;
    for (int i = 0; i < kWindowSamples; ++i) in[i] = (src[i] - mean) * window[i];
    fftw_execute(plan);
    for (int k = 0; k < kFftBins; ++k) power[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    const Vector energies = bank * power;
    for (int b = 0; b < kNumMelBands; ++b) out.values(t, b) = std::log(energies[b] + kLogFloor);
  }
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

MelFrames NormalizeFrames(const MelFrames& m) {
  MelFrames out = m;
  const Eigen::Index t = m.values.rows();
  if (t == 0) return out;
  for (Eigen::Index b = 0; b < m.values.cols(); ++b) {
    auto col = out.values.col(b);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / double(t);
    if (var > 1e-20) col /= std::sqrt(var);
  }
  return out;
}

MelFrames SpecAugment(const MelFrames& m, const AugmentConfig& cfg) {
  if (cfg.max_freq_masks < 0 || cfg.max_time_masks < 0 || cfg.max_freq_width < 0 ||
      cfg.max_time_width < 0)
    throw Error(ErrorKind::kConfig, "augmentation counts and widths must be nonnegative");
  const Eigen::Index frames = m.values.rows(), bands = m.values.cols();
  if (cfg.max_freq_width > bands)
    throw Error(ErrorKind::kConfig, "frequency mask width exceeds band count");
  MelFrames out = m;
  if (frames == 0) return out;
  const double fill = m.values.mean();
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng](long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(rng);
  };
  for (int i = 0; i < cfg.max_freq_masks; ++i) {
    const long width = uniform(0, cfg.max_freq_width);
    const long start = uniform(0, bands - width);
    out.values.middleCols(start, width).setConstant(fill);
  }
  const long time_width = std::min<long>(cfg.max_time_width, frames);
  for (int i = 0; i < cfg.max_time_masks; ++i) {
    const long width = uniform(0, time_width);
    const long start = uniform(0, frames - width);
    out.values.middleRows(start, width).setConstant(fill);
  }
  return out;
}

}  // namespace plf
