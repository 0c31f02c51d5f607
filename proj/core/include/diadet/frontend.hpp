// diadet/frontend.hpp

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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace diadet {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int rate = 16000;

  double duration() const {
    return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0;
  }
};

// Parses a RIFF/WAVE container holding 16-bit signed PCM, mono, 16 kHz.
Waveform ReadWav(std::span<const std::uint8_t> bytes);
Waveform ReadWavFile(const std::string &path);
std::vector<std::uint8_t> WriteWav(const Waveform &wave);

enum class FeatureKind { kMfcc, kLogMel };

const char *FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(const std::string &name);

// For kMfcc, column 0 holds the log frame energy.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // frames x dims
  double frame_shift = 0.010;
  double frame_length = 0.025;
  FeatureKind kind = FeatureKind::kMfcc;

  int frames() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
  bool has_energy() const { return kind == FeatureKind::kMfcc; }
};

struct FrontendConfig {
  int n_coeffs = 23;
  int n_mels = 23;
  double frame_length = 0.025;
  double frame_shift = 0.010;
  double preemphasis = 0.97;
  double norm_window = 3.0;
  double energy_floor = 1e-10;
  double low_freq = 20.0;
  double high_freq = 0.0;  // <= 0 means Nyquist

  void Validate() const;
};

int NumFrames(std::size_t n_samples, int frame_length, int frame_shift);
int FftSize(int frame_length);

// |DFT|^2 of one windowed frame, zero-padded to `fft_size`; fft_size/2+1 bins.
Eigen::VectorXd PowerSpectrum(std::span<const double> frame, int fft_size);

// Triangular filters on the HTK mel scale, n_mels x (fft_size/2+1).
Eigen::MatrixXd MelFilterbank(const FrontendConfig &cfg, int rate,
                              int fft_size);
std::vector<double> MelCenterFrequencies(const FrontendConfig &cfg, int rate);

FeatureMatrix ExtractFeatures(const Waveform &wave, const FrontendConfig &cfg,
                              FeatureKind kind);

// Subtracts, per dimension, the mean over a window of `window` seconds
// centred on each frame. The window keeps its length near the edges by
// sliding inward, and covers everything when longer than the input.
FeatureMatrix SlidingCmn(const FeatureMatrix &feat, double window);

using VadMask = std::vector<bool>;

struct VadConfig {
  double threshold_offset_db = -6.0;
  double min_speech = 0.25;
  double min_silence = 0.10;
  int median_width = 5;
  double energy_floor = 1e-10;
  // Frames within this many dB of the energy floor are never speech.
  double floor_margin_db = 10.0;
};

VadMask EnergyVad(const FeatureMatrix &feat, const VadConfig &cfg = {});

// Run-length post-processing shared by VAD implementations.
void RemoveShortRuns(VadMask *mask, bool value, int min_len,
                     bool interior_only);

class VadProvider {
 public:
  virtual ~VadProvider() = default;
  virtual VadMask Detect(const FeatureMatrix &feat) const = 0;
};

class EnergyVadProvider : public VadProvider {
 public:
  explicit EnergyVadProvider(VadConfig cfg = {}) : cfg_(cfg) {}
  VadMask Detect(const FeatureMatrix &feat) const override {
    return EnergyVad(feat, cfg_);
  }

 private:
  VadConfig cfg_;
};

// Slot for speech/feature enhancement in front of the embedding extractor.
class EnhancementProvider {
 public:
  virtual ~EnhancementProvider() = default;
  virtual FeatureMatrix Enhance(const FeatureMatrix &feat) const = 0;
};

class IdentityEnhancer : public EnhancementProvider {
 public:
  FeatureMatrix Enhance(const FeatureMatrix &feat) const override {
    return feat;
  }
};

// Runs the provider and checks that it preserved the matrix shape.
FeatureMatrix EnhanceHook(const FeatureMatrix &feat,
                          const EnhancementProvider &provider);

}  // namespace diadet
