// core/src/frontend.cpp

// Copyright 2026  The diadet Authors

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

#include "diadet/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "diadet/error.hpp"

namespace diadet {

namespace {

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

int Samples(double seconds, int rate) {
  return static_cast<int>(std::lround(seconds * rate));
}

int Frames(double seconds, double shift) {
  return std::max(1, static_cast<int>(std::lround(seconds / shift)));
}

}  // namespace

const char *FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kMfcc ? "mfcc" : "logmel";
}

FeatureKind ParseFeatureKind(const std::string &name) {
  if (name == "mfcc") return FeatureKind::kMfcc;
  if (name == "logmel") return FeatureKind::kLogMel;
  Fail(ErrorCode::kInvalidArgument, "unknown feature kind '" + name + "'");
}

void FrontendConfig::Validate() const {
  if (n_mels < 1 || n_coeffs < 1 || n_coeffs > n_mels)
    Fail(ErrorCode::kOutOfRange, "frontend: need 1 <= n_coeffs <= n_mels");
  if (!(frame_length > 0.0) || !(frame_shift > 0.0))
    Fail(ErrorCode::kOutOfRange, "frontend: frame sizes must be positive");
  if (!(norm_window > frame_shift))
    Fail(ErrorCode::kOutOfRange, "frontend: norm_window must exceed frame_shift");
  if (!(energy_floor > 0.0))
    Fail(ErrorCode::kOutOfRange, "frontend: energy_floor must be positive");
  if (preemphasis < 0.0 || preemphasis >= 1.0)
    Fail(ErrorCode::kOutOfRange, "frontend: preemphasis in [0, 1)");
}

int NumFrames(std::size_t n_samples, int frame_length, int frame_shift) {
  if (n_samples < static_cast<std::size_t>(frame_length)) return 0;
  return static_cast<int>((n_samples - frame_length) / frame_shift) + 1;
}

int FftSize(int frame_length) {
  int n = 1;
  while (n < frame_length) n <<= 1;
  return n;
}

Eigen::VectorXd PowerSpectrum(std::span<const double> frame, int fft_size) {
  std::vector<double> padded(fft_size, 0.0);
  std::copy_n(frame.begin(), std::min<std::size_t>(frame.size(), fft_size),
              padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  Eigen::VectorXd power(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) power(k) = std::norm(spec[k]);
  return power;
}

Eigen::MatrixXd MelFilterbank(const FrontendConfig &cfg, int rate,
                              int fft_size) {
  double high = cfg.high_freq > 0.0 ? cfg.high_freq : 0.5 * rate;
  double mel_low = HzToMel(cfg.low_freq), mel_high = HzToMel(high);
  double delta = (mel_high - mel_low) / (cfg.n_mels + 1);
  int n_bins = fft_size / 2 + 1;
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    double left = mel_low + m * delta;
    double center = left + delta;
    double right = center + delta;
    for (int k = 0; k < n_bins; ++k) {
      double mel = HzToMel(static_cast<double>(k) * rate / fft_size);
      if (mel > left && mel < right)
        bank(m, k) = mel <= center ? (mel - left) / (center - left)
                                   : (right - mel) / (right - center);
    }
  }
  return bank;
}

std::vector<double> MelCenterFrequencies(const FrontendConfig &cfg, int rate) {
  double high = cfg.high_freq > 0.0 ? cfg.high_freq : 0.5 * rate;
  double mel_low = HzToMel(cfg.low_freq), mel_high = HzToMel(high);
  double delta = (mel_high - mel_low) / (cfg.n_mels + 1);
  std::vector<double> out(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m)
    out[m] = MelToHz(mel_low + (m + 1) * delta);
  return out;
}

FeatureMatrix ExtractFeatures(const Waveform &wave, const FrontendConfig &cfg,
                              FeatureKind kind) {
  cfg.Validate();
  if (wave.rate <= 0 || wave.samples.empty())
    Fail(ErrorCode::kInvalidArgument, "empty waveform");
  const int frame_len = Samples(cfg.frame_length, wave.rate);
  const int shift = Samples(cfg.frame_shift, wave.rate);
  const int n_frames = NumFrames(wave.samples.size(), frame_len, shift);
  if (n_frames < 1)
    Fail(ErrorCode::kTooShort, std::to_string(wave.samples.size()) +
                                   " samples is shorter than one frame");
  const int fft_size = FftSize(frame_len);
  const Eigen::MatrixXd bank = MelFilterbank(cfg, wave.rate, fft_size);

  std::vector<double> window(frame_len);
  for (int n = 0; n < frame_len; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                       std::max(1, frame_len - 1));

  // Orthonormal DCT-II basis, n_coeffs x n_mels.
  Eigen::MatrixXd dct(cfg.n_coeffs, cfg.n_mels);
  for (int k = 0; k < cfg.n_coeffs; ++k) {
    double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / cfg.n_mels);
    for (int m = 0; m < cfg.n_mels; ++m)
      dct(k, m) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / cfg.n_mels);
  }

  const int dims = kind == FeatureKind::kMfcc ? cfg.n_coeffs : cfg.n_mels;
  FeatureMatrix out;
  out.values.resize(n_frames, dims);
  out.frame_shift = cfg.frame_shift;
  out.frame_length = cfg.frame_length;
  out.kind = kind;

  const double log_floor = std::log(cfg.energy_floor);
  std::vector<double> frame(frame_len);
  for (int t = 0; t < n_frames; ++t) {
    const double *raw = wave.samples.data() + static_cast<std::size_t>(t) * shift;
    double energy = 0.0;
    for (int n = 0; n < frame_len; ++n) energy += raw[n] * raw[n];
    for (int n = 0; n < frame_len; ++n) {
      std::size_t idx = static_cast<std::size_t>(t) * shift + n;
      double prev = idx > 0 ? wave.samples[idx - 1] : wave.samples[idx];
      frame[n] = (raw[n] - cfg.preemphasis * prev) * window[n];
    }
    Eigen::VectorXd power = PowerSpectrum(frame, fft_size);
    Eigen::VectorXd mel = bank * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      mel(m) = std::log(std::max(mel(m), cfg.energy_floor));
    if (kind == FeatureKind::kLogMel) {
      out.values.row(t) = mel.transpose();
    } else {
      Eigen::VectorXd ceps = dct * mel;
      ceps(0) = std::max(std::log(std::max(energy, cfg.energy_floor)), log_floor);
      out.values.row(t) = ceps.transpose();
    }
  }
  return out;
}

FeatureMatrix SlidingCmn(const FeatureMatrix &feat, double window) {
  if (!(window > 0.0)) Fail(ErrorCode::kInvalidArgument, "window must be > 0");
  const int n = feat.frames();
  const int d = feat.dims();
  const int w = std::min(n, Frames(window, feat.frame_shift));
  // Prefix sums, one row per frame boundary.
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(n + 1, d);
  for (int t = 0; t < n; ++t) prefix.row(t + 1) = prefix.row(t) + feat.values.row(t);
  FeatureMatrix out = feat;
  for (int t = 0; t < n; ++t) {
    int start = std::clamp(t - w / 2, 0, n - w);
    Eigen::RowVectorXd mean = (prefix.row(start + w) - prefix.row(start)) / w;
    out.values.row(t) = feat.values.row(t) - mean;
  }
  return out;
}

void RemoveShortRuns(VadMask *mask, bool value, int min_len,
                     bool interior_only) {
  VadMask &m = *mask;
  const std::size_t n = m.size();
  std::size_t t = 0;
  while (t < n) {
    if (m[t] != value) {
      ++t;
      continue;
    }
    std::size_t u = t;
    while (u < n && m[u] == value) ++u;
    bool interior = t > 0 && u < n;
    if (static_cast<int>(u - t) < min_len && (!interior_only || interior))
      std::fill(m.begin() + t, m.begin() + u, !value);
    t = u;
  }
}

VadMask EnergyVad(const FeatureMatrix &feat, const VadConfig &cfg) {
  if (!feat.has_energy())
    Fail(ErrorCode::kInvalidArgument, "energy VAD needs a log-energy column");
  const int n = feat.frames();
  VadMask raw(n, false);
  if (n == 0) return raw;
  const Eigen::VectorXd energy = feat.values.col(0);
  const double mean = energy.mean();
  const double db_to_log = std::log(10.0) / 10.0;
  const double threshold = mean + cfg.threshold_offset_db * db_to_log;
  const double floor =
      std::log(cfg.energy_floor) + cfg.floor_margin_db * db_to_log;
  for (int t = 0; t < n; ++t)
    raw[t] = energy(t) > threshold && energy(t) > floor;

  VadMask mask(n, false);
  const int half = cfg.median_width / 2;
  for (int t = 0; t < n; ++t) {
    int lo = std::max(0, t - half), hi = std::min(n - 1, t + half);
    int count = 0;
    for (int u = lo; u <= hi; ++u) count += raw[u];
    int len = hi - lo + 1;
    mask[t] = 2 * count == len ? raw[t] : 2 * count > len;
  }

  RemoveShortRuns(&mask, true, Frames(cfg.min_speech, feat.frame_shift), false);
  RemoveShortRuns(&mask, false, Frames(cfg.min_silence, feat.frame_shift), true);
  return mask;
}

FeatureMatrix EnhanceHook(const FeatureMatrix &feat,
                          const EnhancementProvider &provider) {
  FeatureMatrix out = provider.Enhance(feat);
  if (out.dims() != feat.dims() || out.frames() != feat.frames())
    Fail(ErrorCode::kDimensionMismatch,
         "enhancer returned " + std::to_string(out.frames()) + "x" +
             std::to_string(out.dims()) + ", expected " +
             std::to_string(feat.frames()) + "x" + std::to_string(feat.dims()));
  return out;
}

}  // namespace diadet
