// core/include/diadet/harness.hpp

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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diadet/detection.hpp"
#include "diadet/diarizer.hpp"
#include "diadet/embedding.hpp"
#include "diadet/frontend.hpp"
#include "diadet/metrics.hpp"
#include "diadet/plda.hpp"
#include "diadet/timeline.hpp"

namespace diadet {

enum class EmitKind { kEmbeddings, kFeatures, kBoth };
const char *EmitKindName(EmitKind kind);
EmitKind ParseEmitKind(const std::string &name);

struct SimConfig {
  int n_speakers = 3;        // per recording
  int n_recordings = 4;
  double duration = 120.0;   // seconds per recording
  int speaker_pool = 0;      // shared pool size; 0 draws fresh speakers
  double turn_mean = 4.0;    // exponential turn lengths
  double min_turn = 0.5;
  double overlap_prob = 0.3; // at turn changes without a pause
  double overlap_mean = 0.8;
  double silence_prob = 0.2; // pause between turns
  double silence_mean = 1.0;
  double noise_sigma = 0.0;  // additive Gaussian noise, both paths
  std::uint64_t seed = 0;
  EmitKind emit = EmitKind::kBoth;
  double frame_shift = 0.01;
  ExtractorConfig windows;   // window grid of the embedding path

  // Embedding path: x = mu + y_s + eps with y_s ~ N(0, B), eps ~ N(0, W).
  int embedding_dim = 16;
  double between_scale = 1.0;
  double within_scale = 1.0;

  // Feature path: frame = m_s + exp(v_s) * z on dims 1.., log energy on dim 0.
  int feature_dim = 13;
  double speaker_spread = 0.4;   // std of per-speaker means
  double log_std_spread = 0.3;   // std of per-speaker log standard deviations
  double silence_energy = -6.0;  // relative to speech
  double enhancer_prior = 1.0;   // prior std of the oracle enhancer

  void Validate() const;
};

struct SynthRecording {
  std::string recording_id;
  RecordingMeta meta;
  int n_frames = 0;
  Annotation reference;
  FrameActivity labels;             // discretized reference
  std::vector<int> speakers;        // pool index per labels column
  EmbeddingStream embeddings;       // clean
  EmbeddingStream noisy_embeddings;
  std::vector<int> window_speaker;  // pool index, -1 for mixed windows
  FeatureMatrix clean;
  FeatureMatrix noisy;
  double frame_shift = 0.01;

  double duration() const { return n_frames * frame_shift; }
};

struct SynthCorpus {
  SimConfig config;
  PldaModel planted;  // embedding-path generator
  std::vector<SynthRecording> recordings;

  std::vector<Annotation> References() const;
  RecordingMetaMap Metadata() const;
};

// Deterministic in cfg.seed; recordings use seeds derived from
// (seed, index) so generation order never matters.
SynthCorpus GenCorpus(const SimConfig &cfg);

// Writes "<id>.rttm", "<id>.emb", "<id>.feat" per recording plus
// "all.rttm", "all.uem", "metadata" and "planted.plda".
void WriteCorpus(const SynthCorpus &corpus, const std::string &dir);

// Ground-truth providers.
VadMask OracleVad(const SynthRecording &rec);
std::vector<bool> OracleOverlap(const SynthRecording &rec);

// Posterior-mean shrinkage toward the clean features:
// clean + tau^2 / (tau^2 + sigma^2) (noisy - clean).
class OracleEnhancer : public EnhancementProvider {
 public:
  OracleEnhancer(FeatureMatrix clean, double noise_sigma, double prior_sigma);
  FeatureMatrix Enhance(const FeatureMatrix &feat) const override;

 private:
  FeatureMatrix clean_;
  double gain_;
};

class MaskVadProvider : public VadProvider {
 public:
  explicit MaskVadProvider(VadMask mask) : mask_(std::move(mask)) {}
  VadMask Detect(const FeatureMatrix &feat) const override;

 private:
  VadMask mask_;
};

class MaskOverlapProvider : public OverlapProvider {
 public:
  explicit MaskOverlapProvider(std::vector<bool> mask) : mask_(std::move(mask)) {}
  std::vector<bool> Detect(const FeatureMatrix &feat) const override;

 private:
  std::vector<bool> mask_;
};

// Whitener plus PLDA for one feature condition.
struct Backend {
  ReferenceExtractor extractor;
  PldaModel plda;
  double ahc_threshold = 0.0;
};

// Trains a back-end on single-speaker windows of a separate training corpus
// generated from `cfg` (seed-derived), processed like test data. The AHC
// threshold is then picked by DER on a seed-derived dev corpus (oracle VAD,
// no resegmentation).
Backend TrainFeatureBackend(const SimConfig &cfg, bool enhanced,
                            const DiarizerConfig &dcfg);

// PLDA on length-normalized single-speaker windows of a training corpus.
PldaModel TrainEmbeddingBackend(const SimConfig &cfg);

enum class Stage { kOracleVad, kEnhance, kVbReseg, kOverlapAssign };
const char *StageName(Stage stage);

// Rows: a baseline with every stage off, then one row per stage, each
// adding it to the previous row.
struct AblationSpec {
  std::vector<Stage> stages{Stage::kOracleVad, Stage::kEnhance, Stage::kVbReseg,
                            Stage::kOverlapAssign};
  bool detection = false;  // adds diarized and sliding detection rows
  bool calibrate = false;  // adds calibrated detection rows
};

struct AblationResult {
  std::vector<DerRow> der_rows;
  std::vector<DetRow> det_rows;
  DerOptions der_options;
  DcfParams dcf;

  std::string Table() const;
};

// Feature-path corpus for the DER rows; detection rows use the embedding
// path of the same corpus.
AblationResult RunAblation(const SynthCorpus &corpus, const AblationSpec &spec,
                           const DiarizerConfig &dcfg);

// Default noisy feature-path corpus of the DER ablation.
SimConfig AblationCorpusConfig(std::uint64_t seed);

// Embedding-path corpus of the detection rows: a shared speaker pool so
// speakers recur across sessions.
SimConfig DetectionCorpusConfig(std::uint64_t seed);

// Harness pipeline defaults: recording-level normalization and the
// diarizer's stage toggles left to the ablation.
DiarizerConfig HarnessDiarizerConfig();

struct DetectionExperimentConfig {
  std::vector<int> durations{30};
  double chunk_length = 60.0;
  double min_speech = 5.0;
  double ahc_threshold = 0.0;
};

struct DetectionOutcome {
  std::vector<ScoredTrial> diarized;
  std::vector<ScoredTrial> sliding;
  DetMetrics diarized_metrics;
  DetMetrics sliding_metrics;
};

// Enrollments from reference speech of the corpus recordings, chunks over
// every recording, both scoring modes on length-normalized window
// embeddings (noisy variant when noise_sigma > 0).
DetectionOutcome RunDetectionExperiment(const SynthCorpus &corpus, const PldaModel &model,
                                        const DetectionExperimentConfig &cfg = {},
                                        const DcfParams &dcf = {});

}  // namespace diadet
