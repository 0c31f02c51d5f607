// diadet/assign.hpp

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

#include <string>
#include <vector>

#include "diadet/embedding.hpp"
#include "diadet/frontend.hpp"
#include "diadet/timeline.hpp"
#include "diadet/vb.hpp"

namespace diadet {

std::string SpeakerLabel(int speaker_id);

// Resamples a per-window posterior onto the frame grid by linear
// interpolation between window midpoints (held constant past the ends).
SpeakerPosterior ExpandToFrames(const SpeakerPosterior &windows,
                                const EmbeddingStream &stream, int n_frames,
                                double frame_shift);

// Speech frames get their most likely speaker; frames flagged as overlap
// additionally get the second most likely one. Ties go to the lower column.
Annotation Assign(const SpeakerPosterior &posterior, const VadMask &vad,
                  const std::vector<bool> &overlap,
                  const std::string &recording_id = "");

}  // namespace diadet
