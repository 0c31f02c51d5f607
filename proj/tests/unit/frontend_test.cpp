// tests/unit/frontend_test.cpp

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

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "diadet/error.hpp"
#include "diadet/frontend.hpp"
#include "diadet/harness.hpp"
#include "test_util.hpp"

namespace diadet {
namespace {

using testing::CodeOf;

void PutU16(std::vector<std::uint8_t> *b, int v) {
  b->push_back(v & 0xff);
  b->push_back((v >> 8) & 0xff);
}

void PutU32(std::vector<std::uint8_t> *b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b->push_back((v >> (8 * i)) & 0xff);
}

std::vector<std::uint8_t> MakeWav(int channels, int bits, int rate,
                                  const std::vector<std::int16_t> &pcm) {
  std::vector<std::uint8_t> b;
  std::uint32_t data_size = pcm.size() * 2;
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  PutU32(&b, 36 + data_size);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&b, 16);
  PutU16(&b, 1);
  PutU16(&b, channels);
  PutU32(&b, rate);
  PutU32(&b, rate * channels * bits / 8);
  PutU16(&b, channels * bits / 8);
  PutU16(&b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  PutU32(&b, data_size);
  for (auto s : pcm) PutU16(&b, static_cast<std::uint16_t>(s));
  return b;
}

Waveform Tone(double seconds, double hz, double amp, int rate = 16000) {
  Waveform w;
  w.rate = rate;
  w.samples.resize(static_cast<size_t>(seconds * rate));
  for (size_t n = 0; n < w.samples.size(); ++n)
    w.samples[n] = amp * std::sin(2.0 * std::numbers::pi * hz * n / rate);
  return w;
}

FeatureMatrix EnergyTrack(const std::vector<double> &energy) {
  FeatureMatrix f;
  f.kind = FeatureKind::kMfcc;
  f.values = Eigen::MatrixXd::Zero(energy.size(), 2);
  for (size_t t = 0; t < energy.size(); ++t) f.values(t, 0) = energy[t];
  return f;
}

TEST(Wav, DecodesPcmScale) {
  auto wave = ReadWav(MakeWav(1, 16, 16000, {0, 16384, -32768, 32767}));
  ASSERT_EQ(wave.samples.size(), 4u);
  EXPECT_EQ(wave.rate, 16000);
  EXPECT_DOUBLE_EQ(wave.samples[0], 0.0);
  EXPECT_DOUBLE_EQ(wave.samples[1], 0.5);
  EXPECT_DOUBLE_EQ(wave.samples[2], -1.0);
  EXPECT_NEAR(wave.samples[3], 1.0, 1e-4);
}

TEST(Wav, RejectsStereoDepthAndRate) {
  std::vector<std::int16_t> pcm(8, 0);
  EXPECT_EQ(CodeOf([&] { ReadWav(MakeWav(2, 16, 16000, pcm)); }),
            ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(CodeOf([&] { ReadWav(MakeWav(1, 8, 16000, pcm)); }),
            ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(CodeOf([&] { ReadWav(MakeWav(1, 16, 8000, pcm)); }),
            ErrorCode::kUnsupportedFormat);
}

TEST(Wav, RejectsTruncatedData) {
  auto bytes = MakeWav(1, 16, 16000, std::vector<std::int16_t>(100, 7));
  bytes.resize(bytes.size() - 10);
  EXPECT_EQ(CodeOf([&] { ReadWav(bytes); }), ErrorCode::kTruncatedFile);
  std::vector<std::uint8_t> tiny{'R', 'I', 'F'};
  EXPECT_EQ(CodeOf([&] { ReadWav(tiny); }), ErrorCode::kTruncatedFile);
}

TEST(Wav, WriteReadRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dist(-32768, 32767);
  Waveform w;
  for (int i = 0; i < 500; ++i) w.samples.push_back(dist(rng) / 32768.0);
  auto back = ReadWav(WriteWav(w));
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (size_t i = 0; i < w.samples.size(); ++i)
    EXPECT_DOUBLE_EQ(back.samples[i], w.samples[i]);
}

TEST(Features, OneSecondGives98Frames) {
  FrontendConfig cfg;
  auto f = ExtractFeatures(Tone(1.0, 440.0, 0.3), cfg, FeatureKind::kMfcc);
  EXPECT_EQ(f.frames(), 98);
  EXPECT_EQ(f.dims(), cfg.n_coeffs);
  auto m = ExtractFeatures(Tone(1.0, 440.0, 0.3), cfg, FeatureKind::kLogMel);
  EXPECT_EQ(m.frames(), 98);
  EXPECT_EQ(m.dims(), cfg.n_mels);
}

TEST(Features, FrameCountFormula) {
  for (size_t n : {400u, 401u, 559u, 560u, 12345u})
    EXPECT_EQ(NumFrames(n, 400, 160), static_cast<int>((n - 400) / 160 + 1));
  EXPECT_EQ(NumFrames(399, 400, 160), 0);
}

TEST(Features, ZeroSignalIsConstantAtFloor) {
  FrontendConfig cfg;
  Waveform w;
  w.samples.assign(8000, 0.0);
  auto f = ExtractFeatures(w, cfg, FeatureKind::kMfcc);
  for (int t = 0; t < f.frames(); ++t) {
    EXPECT_DOUBLE_EQ(f.values(t, 0), std::log(cfg.energy_floor));
    EXPECT_TRUE(f.values.row(t).isApprox(f.values.row(0)));
  }
}

TEST(Features, RejectsShortAndEmptyInput) {
  FrontendConfig cfg;
  Waveform w;
  EXPECT_EQ(CodeOf([&] { ExtractFeatures(w, cfg, FeatureKind::kMfcc); }),
            ErrorCode::kInvalidArgument);
  w.samples.assign(399, 0.1);
  EXPECT_EQ(CodeOf([&] { ExtractFeatures(w, cfg, FeatureKind::kMfcc); }),
            ErrorCode::kTooShort);
}

TEST(Features, PowerSpectrumMatchesDirectDft) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<double> frame(400);
  for (auto &x : frame) x = g(rng);
  const int n_fft = FftSize(400);
  ASSERT_EQ(n_fft, 512);
  auto power = PowerSpectrum(frame, n_fft);
  for (int k = 0; k <= n_fft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < 400; ++n)
      acc += frame[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / n_fft);
    EXPECT_NEAR(power(k), std::norm(acc), 1e-8 * (1.0 + std::norm(acc)));
  }
}

TEST(Features, ToneEnergyPeaksInNearestMelBand) {
  FrontendConfig cfg;
  auto f = ExtractFeatures(Tone(0.5, 1000.0, 0.5), cfg, FeatureKind::kLogMel);
  auto centers = MelCenterFrequencies(cfg, 16000);
  int nearest = 0;
  for (int m = 1; m < cfg.n_mels; ++m)
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  for (int t = 0; t < f.frames(); ++t) {
    Eigen::Index best;
    f.values.row(t).maxCoeff(&best);
    EXPECT_EQ(best, nearest) << "frame " << t;
  }
}

TEST(Features, LogMelMatchesDirectFilterbank) {
  FrontendConfig cfg;
  Waveform w = Tone(0.05, 700.0, 0.4);
  auto f = ExtractFeatures(w, cfg, FeatureKind::kLogMel);
  const int len = 400, n_fft = 512;
  Eigen::MatrixXd bank = MelFilterbank(cfg, 16000, n_fft);
  for (int t = 0; t < f.frames(); ++t) {
    std::vector<double> frame(len);
    for (int n = 0; n < len; ++n) {
      size_t idx = t * 160 + n;
      double prev = idx > 0 ? w.samples[idx - 1] : w.samples[idx];
      double ham = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (len - 1));
      frame[n] = (w.samples[idx] - cfg.preemphasis * prev) * ham;
    }
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (int k = 0; k <= n_fft / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (int n = 0; n < len; ++n)
          acc += frame[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / n_fft);
        e += bank(m, k) * std::norm(acc);
      }
      EXPECT_NEAR(f.values(t, m), std::log(std::max(e, cfg.energy_floor)), 1e-6);
    }
  }
}

TEST(Features, DeterministicForIdenticalInput) {
  FrontendConfig cfg;
  Waveform w = Tone(0.3, 300.0, 0.2);
  auto a = ExtractFeatures(w, cfg, FeatureKind::kMfcc);
  auto b = ExtractFeatures(ReadWav(WriteWav(w)), cfg, FeatureKind::kMfcc);
  auto c = ExtractFeatures(ReadWav(WriteWav(w)), cfg, FeatureKind::kMfcc);
  EXPECT_EQ(b.values, c.values);
  EXPECT_EQ(a.frames(), b.frames());
}

TEST(Cmn, ConstantInputBecomesZero) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(250, 4, 3.5);
  auto out = SlidingCmn(f, 3.0);
  EXPECT_LT(out.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cmn, LongWindowSubtractsGlobalMean) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  FeatureMatrix f;
  f.values.resize(120, 3);
  for (int i = 0; i < f.values.size(); ++i) f.values.data()[i] = g(rng);
  auto out = SlidingCmn(f, 3.0);
  Eigen::RowVectorXd mean = f.values.colwise().mean();
  for (int t = 0; t < 120; ++t)
    EXPECT_TRUE((out.values.row(t) - (f.values.row(t) - mean)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST(Cmn, MatchesDirectWindowMeans) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  FeatureMatrix f;
  f.values.resize(300, 5);
  for (int i = 0; i < f.values.size(); ++i) f.values.data()[i] = 2.0 * g(rng) + 1.0;
  const int w = 100;
  auto out = SlidingCmn(f, 1.0);
  for (int t = 0; t < 300; ++t) {
    int start = std::min(std::max(t - w / 2, 0), 300 - w);
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(5);
    for (int u = start; u < start + w; ++u) mean += f.values.row(u);
    mean /= w;
    EXPECT_LT((out.values.row(t) - f.values.row(t) + mean).cwiseAbs().maxCoeff(), 1e-9);
    if (t >= w / 2 && t + w / 2 <= 300) {
      EXPECT_LE(t - start, w / 2);
      EXPECT_GE(start + w - t, w / 2);
    }
  }
  EXPECT_EQ(CodeOf([&] { SlidingCmn(f, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(Vad, SilenceIsNeverSpeech) {
  FrontendConfig cfg;
  Waveform w;
  w.samples.assign(16000, 0.0);
  auto mask = EnergyVad(ExtractFeatures(w, cfg, FeatureKind::kMfcc));
  for (bool b : mask) EXPECT_FALSE(b);
}

TEST(Vad, ToneBracketedBySilence) {
  FrontendConfig cfg;
  Waveform w;
  w.samples.assign(16000, 0.0);
  Waveform tone = Tone(1.0, 500.0, 0.5);
  w.samples.insert(w.samples.end(), tone.samples.begin(), tone.samples.end());
  w.samples.insert(w.samples.end(), 16000, 0.0);
  auto f = ExtractFeatures(w, cfg, FeatureKind::kMfcc);
  auto mask = EnergyVad(f);
  // Frames overlapping the tone samples [16000, 32000).
  const int first = (16000 - 400) / 160 + 1, last = 31999 / 160;
  int lo = -1, hi = -1;
  for (int t = 0; t < f.frames(); ++t)
    if (mask[t]) {
      if (lo < 0) lo = t;
      hi = t;
    }
  ASSERT_GE(lo, 0);
  EXPECT_NEAR(lo, first, 1);
  EXPECT_NEAR(hi, last, 1);
  for (int t = lo; t <= hi; ++t) EXPECT_TRUE(mask[t]);
}

TEST(Vad, BridgesShortSilence) {
  std::vector<double> e(100, 2.0);
  e.insert(e.end(), 5, -20.0);
  e.insert(e.end(), 100, 2.0);
  VadConfig cfg;
  cfg.min_silence = 0.10;
  auto bridged = EnergyVad(EnergyTrack(e), cfg);
  for (bool b : bridged) EXPECT_TRUE(b);
  cfg.min_silence = 0.02;
  auto kept = EnergyVad(EnergyTrack(e), cfg);
  EXPECT_FALSE(kept[102]);
  EXPECT_TRUE(kept[50]);
  EXPECT_TRUE(kept[150]);
}

TEST(Vad, DropsShortSpeechBursts) {
  std::vector<double> e(100, -20.0);
  for (int t = 40; t < 50; ++t) e[t] = 2.0;
  for (int t = 70; t < 72; ++t) e[t] = 2.0;
  VadConfig cfg;
  cfg.min_speech = 0.05;
  auto mask = EnergyVad(EnergyTrack(e), cfg);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(mask[t], t >= 40 && t < 50) << t;
}

TEST(Vad, PropertySingleBurstGivesOneBlock) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 200 + static_cast<int>(u(rng) * 200);
    int on = 20 + static_cast<int>(u(rng) * 50);
    int len = 40 + static_cast<int>(u(rng) * 100);
    std::vector<double> e(n);
    for (int t = 0; t < n; ++t)
      e[t] = (t >= on && t < on + len) ? 1.0 + u(rng) : -18.0 - u(rng);
    auto mask = EnergyVad(EnergyTrack(e));
    for (int t = 0; t < n; ++t) EXPECT_EQ(mask[t], t >= on && t < on + len);
  }
}

TEST(Vad, NeedsEnergyColumn) {
  FeatureMatrix f;
  f.kind = FeatureKind::kLogMel;
  f.values = Eigen::MatrixXd::Zero(10, 3);
  EXPECT_EQ(CodeOf([&] { EnergyVad(f); }), ErrorCode::kInvalidArgument);
}

class WrongShapeEnhancer : public EnhancementProvider {
 public:
  FeatureMatrix Enhance(const FeatureMatrix &feat) const override {
    FeatureMatrix out = feat;
    out.values.conservativeResize(feat.frames(), feat.dims() + 1);
    return out;
  }
};

TEST(Enhance, IdentityLeavesFeaturesUnchanged) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(30, 4);
  EXPECT_EQ(EnhanceHook(f, IdentityEnhancer()).values, f.values);
}

TEST(Enhance, WrongShapeIsRejected) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(30, 4);
  EXPECT_EQ(CodeOf([&] { EnhanceHook(f, WrongShapeEnhancer()); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Enhance, OracleShrinksTowardClean) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  FeatureMatrix clean, noisy;
  clean.values.resize(200, 6);
  noisy.values.resize(200, 6);
  for (int i = 0; i < clean.values.size(); ++i) {
    clean.values.data()[i] = g(rng);
    noisy.values.data()[i] = clean.values.data()[i] + 2.0 * g(rng);
  }
  auto same = EnhanceHook(clean, OracleEnhancer(clean, 0.0, 1.0));
  EXPECT_EQ(same.values, clean.values);
  auto out = EnhanceHook(noisy, OracleEnhancer(clean, 2.0, 1.0));
  double before = (noisy.values - clean.values).squaredNorm();
  double after = (out.values - clean.values).squaredNorm();
  EXPECT_NEAR(after / before, 0.2 * 0.2, 1e-12);
}

}  // namespace
}  // namespace diadet
