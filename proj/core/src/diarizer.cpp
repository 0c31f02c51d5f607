// core/src/diarizer.cpp

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

#include "diadet/diarizer.hpp"

#include <algorithm>
#include <cmath>

#include "diadet/error.hpp"

namespace diadet {

std::vector<bool> TimelineMask(const Timeline &regions, int n_frames,
                               double frame_shift) {
  std::vector<bool> mask(n_frames, false);
  for (const auto &s : regions.segments) {
    // frames whose centre (t + 0.5) * shift lies in [onset, offset)
    int first = static_cast<int>(std::ceil(s.onset / frame_shift - 0.5 - 1e-9));
    int last = static_cast<int>(std::ceil(s.offset() / frame_shift - 0.5 - 1e-9));
    first = std::max(first, 0);
    last = std::min(last, n_frames);
    for (int t = first; t < last; ++t) mask[t] = true;
  }
  return mask;
}

void DiarizerConfig::Validate() const {
  frontend.Validate();
  extractor.Validate();
  vb.Validate();
  if (!std::isfinite(ahc_threshold))
    Fail(ErrorCode::kOutOfRange, "diarizer.threshold must be finite");
}

DiarizationResult DiarizeStream(const EmbeddingStream &stream, const VadMask &vad,
                                const std::vector<bool> &overlap,
                                double frame_shift, const PldaModel &model,
                                const DiarizerConfig &cfg) {
  const int n_frames = static_cast<int>(vad.size());
  if (static_cast<int>(overlap.size()) != n_frames)
    Fail(ErrorCode::kLengthMismatch, "overlap mask is not aligned to the VAD mask");
  DiarizationResult out;
  out.stream = stream;
  out.vad = vad;
  out.overlap = overlap;
  out.hypothesis.recording_id = stream.recording_id;
  if (stream.size() == 0) {
    out.posterior.frame_shift = frame_shift;
    out.posterior.q.resize(n_frames, 0);
    return out;
  }

  out.ahc_labels = Ahc(ScoreMatrix(model, stream), cfg.ahc_threshold);
  SpeakerPosterior windows;
  if (cfg.vb_reseg && stream.size() >= 2) {
    windows = VbResegment(stream, out.ahc_labels, model, cfg.vb).posterior;
  } else {
    windows = OneHotPosterior(out.ahc_labels, cfg.extractor.window_shift);
  }
  out.posterior = ExpandToFrames(windows, stream, n_frames, frame_shift);
  std::vector<bool> mask = cfg.overlap_assign ? overlap : std::vector<bool>(n_frames, false);
  out.hypothesis = Assign(out.posterior, vad, mask, stream.recording_id);
  return out;
}

DiarizationResult Diarize(const RecordingInput &input, const PldaModel &model,
                          const DiarizerConfig &cfg, const Providers &providers) {
  cfg.Validate();
  EnergyVadProvider default_vad;
  NoOverlapProvider default_overlap;
  ReferenceExtractor default_extractor;
  IdentityEnhancer default_enhancer;
  const VadProvider &vad_provider = providers.vad ? *providers.vad : default_vad;
  const OverlapProvider &overlap_provider =
      providers.overlap ? *providers.overlap : default_overlap;
  const EmbeddingExtractor &extractor =
      providers.extractor ? *providers.extractor : default_extractor;
  const EnhancementProvider &enhancer =
      providers.enhancer ? *providers.enhancer : default_enhancer;

  FeatureMatrix feat;
  if (input.features) {
    feat = *input.features;
  } else if (input.waveform) {
    feat = ExtractFeatures(*input.waveform, cfg.frontend, cfg.feature_kind);
  } else {
    Fail(ErrorCode::kInvalidArgument, "recording " + input.recording_id + " has no input");
  }
  if (cfg.enhance) feat = EnhanceHook(feat, enhancer);
  VadMask vad = vad_provider.Detect(feat);
  if (static_cast<int>(vad.size()) != feat.frames())
    Fail(ErrorCode::kLengthMismatch, "VAD provider output is not aligned to features");
  std::vector<bool> overlap = overlap_provider.Detect(feat);
  if (static_cast<int>(overlap.size()) != feat.frames())
    Fail(ErrorCode::kLengthMismatch, "overlap provider output is not aligned to features");
  for (size_t t = 0; t < overlap.size(); ++t) overlap[t] = overlap[t] && vad[t];
  if (cfg.normalize) feat = SlidingCmn(feat, cfg.frontend.norm_window);

  EmbeddingStream stream{input.recording_id, {}};
  if (std::any_of(vad.begin(), vad.end(), [](bool b) { return b; })) {
    try {
      stream = ExtractStream(feat, vad, cfg.extractor, extractor, input.recording_id);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kNoSpeech) throw;
    }
  }
  return DiarizeStream(stream, vad, overlap, feat.frame_shift, model, cfg);
}

}  // namespace diadet
