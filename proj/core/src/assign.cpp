// core/src/assign.cpp

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

#include "diadet/assign.hpp"

#include <algorithm>

#include "diadet/error.hpp"

namespace diadet {

std::string SpeakerLabel(int speaker_id) {
  return "spk" + std::to_string(speaker_id);
}

SpeakerPosterior ExpandToFrames(const SpeakerPosterior &windows,
                                const EmbeddingStream &stream, int n_frames,
                                double frame_shift) {
  if (windows.frames() != stream.size())
    Fail(ErrorCode::kLengthMismatch, "posterior rows vs stream windows");
  SpeakerPosterior out;
  out.frame_shift = frame_shift;
  out.speaker_ids = windows.speaker_ids;
  out.q.resize(n_frames, windows.speakers());
  if (stream.size() == 0) {
    out.q.setConstant(windows.speakers() > 0 ? 1.0 / windows.speakers() : 0.0);
    return out;
  }
  std::vector<double> mids;
  for (const auto &e : stream.items) mids.push_back(e.window.midpoint());
  size_t i = 0;
  for (int t = 0; t < n_frames; ++t) {
    const double c = (t + 0.5) * frame_shift;
    if (c <= mids.front()) {
      out.q.row(t) = windows.q.row(0);
      continue;
    }
    if (c >= mids.back()) {
      out.q.row(t) = windows.q.row(mids.size() - 1);
      continue;
    }
    while (i + 1 < mids.size() && mids[i + 1] <= c) ++i;
    const double w = (c - mids[i]) / (mids[i + 1] - mids[i]);
    out.q.row(t) = (1.0 - w) * windows.q.row(i) + w * windows.q.row(i + 1);
  }
  return out;
}

Annotation Assign(const SpeakerPosterior &posterior, const VadMask &vad,
                  const std::vector<bool> &overlap,
                  const std::string &recording_id) {
  const int n = posterior.frames();
  const int s = posterior.speakers();
  if (static_cast<int>(vad.size()) != n || static_cast<int>(overlap.size()) != n)
    Fail(ErrorCode::kLengthMismatch,
         "masks (" + std::to_string(vad.size()) + ", " +
             std::to_string(overlap.size()) + ") vs " + std::to_string(n) +
             " posterior frames");
  Eigen::MatrixXi active = Eigen::MatrixXi::Zero(n, s);
  for (int t = 0; t < n && s > 0; ++t) {
    if (!vad[t]) continue;
    int first = 0;
    for (int k = 1; k < s; ++k)
      if (posterior.q(t, k) > posterior.q(t, first)) first = k;
    active(t, first) = 1;
    if (overlap[t] && s > 1) {
      int second = first == 0 ? 1 : 0;
      for (int k = 0; k < s; ++k)
        if (k != first && posterior.q(t, k) > posterior.q(t, second)) second = k;
      active(t, second) = 1;
    }
  }
  Annotation out{recording_id, {}};
  const double step = posterior.frame_shift;
  for (int k = 0; k < s; ++k) {
    const std::string label = SpeakerLabel(
        k < static_cast<int>(posterior.speaker_ids.size()) ? posterior.speaker_ids[k] : k);
    int t = 0;
    while (t < n) {
      if (!active(t, k)) {
        ++t;
        continue;
      }
      int u = t;
      while (u < n && active(u, k)) ++u;
      out.entries.push_back(AnnotationEntry{Segment{t * step, (u - t) * step}, label});
      t = u;
    }
  }
  out.Sort();
  return out;
}

}  // namespace diadet
