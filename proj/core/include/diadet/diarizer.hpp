// core/include/diadet/diarizer.hpp

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

#include <optional>
#include <string>
#include <vector>

#include "diadet/ahc.hpp"
#include "diadet/assign.hpp"
#include "diadet/embedding.hpp"
#include "diadet/frontend.hpp"
#include "diadet/plda.hpp"
#include "diadet/timeline.hpp"
#include "diadet/vb.hpp"

namespace diadet {

// Per-frame overlapped-speech detector slot.
class OverlapProvider {
 public:
  virtual ~OverlapProvider() = default;
  virtual std::vector<bool> Detect(const FeatureMatrix &feat) const = 0;
};

class NoOverlapProvider : public OverlapProvider {
 public:
  std::vector<bool> Detect(const FeatureMatrix &feat) const override {
    return std::vector<bool>(feat.frames(), false);
  }
};

// Flags frames whose centre falls inside a fixed set of regions.
std::vector<bool> TimelineMask(const Timeline &regions, int n_frames,
                               double frame_shift);

class TimelineOverlapProvider : public OverlapProvider {
 public:
  explicit TimelineOverlapProvider(Timeline regions) : regions_(std::move(regions)) {}
  std::vector<bool> Detect(const FeatureMatrix &feat) const override {
    return TimelineMask(regions_, feat.frames(), feat.frame_shift);
  }

 private:
  Timeline regions_;
};

class TimelineVadProvider : public VadProvider {
 public:
  explicit TimelineVadProvider(Timeline speech) : speech_(std::move(speech)) {}
  VadMask Detect(const FeatureMatrix &feat) const override {
    return TimelineMask(speech_, feat.frames(), feat.frame_shift);
  }

 private:
  Timeline speech_;
};

struct DiarizerConfig {
  FrontendConfig frontend;
  FeatureKind feature_kind = FeatureKind::kMfcc;
  bool normalize = true;  // sliding CMN before embedding extraction
  ExtractorConfig extractor;
  double ahc_threshold = 0.0;
  bool enhance = true;
  bool vb_reseg = true;
  bool overlap_assign = true;
  VbConfig vb;

  void Validate() const;
};

// Unset providers fall back to energy VAD, no overlap, the unwhitened
// reference extractor and the identity enhancer.
struct Providers {
  const VadProvider *vad = nullptr;
  const OverlapProvider *overlap = nullptr;
  const EmbeddingExtractor *extractor = nullptr;
  const EnhancementProvider *enhancer = nullptr;
};

// Either a waveform or precomputed (unnormalized) features.
struct RecordingInput {
  std::string recording_id;
  std::optional<Waveform> waveform;
  std::optional<FeatureMatrix> features;
};

struct DiarizationResult {
  Annotation hypothesis;
  SpeakerPosterior posterior;  // frame grid
  EmbeddingStream stream;
  ClusterLabels ahc_labels;    // per window of `stream`
  VadMask vad;
  std::vector<bool> overlap;
};

DiarizationResult Diarize(const RecordingInput &input, const PldaModel &model,
                          const DiarizerConfig &cfg, const Providers &providers = {});

// Back half of the pipeline, from an embedding stream onwards.
DiarizationResult DiarizeStream(const EmbeddingStream &stream, const VadMask &vad,
                                const std::vector<bool> &overlap,
                                double frame_shift, const PldaModel &model,
                                const DiarizerConfig &cfg);

}  // namespace diadet
