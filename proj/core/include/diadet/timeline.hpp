// diadet/timeline.hpp

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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace diadet {

// All segment comparisons use this tolerance, in seconds.
inline constexpr double kTimeEpsilon = 1e-6;

struct Segment {
  double onset = 0.0;
  double duration = 0.0;

  double offset() const { return onset + duration; }
  double midpoint() const { return onset + 0.5 * duration; }
  bool Contains(double t) const { return t >= onset && t < offset(); }
};

// Intersection of two half-open segments; duration <= 0 when disjoint.
Segment Intersect(const Segment &a, const Segment &b);
double OverlapDuration(const Segment &a, const Segment &b);

struct Timeline {
  std::string recording_id;
  std::vector<Segment> segments;

  void Sort();
  double TotalDuration() const;
};

struct AnnotationEntry {
  Segment segment;
  std::string speaker;
};

struct Annotation {
  std::string recording_id;
  std::vector<AnnotationEntry> entries;

  // Sorts by onset, then duration, then speaker label.
  void Sort();
  // Speaker labels in order of first appearance.
  std::vector<std::string> Speakers() const;
  // Sum of entry durations; overlapped speech counts once per speaker.
  double TotalSpeakerTime() const;
  // Segments of one speaker, sorted; empty if absent.
  Timeline SpeakerTimeline(const std::string &speaker) const;
  // All entries flattened into a single timeline (no merging).
  Timeline ToTimeline() const;
};

// Scoring regions per recording; regions are merged on construction.
using UemMap = std::map<std::string, Timeline>;

std::vector<Annotation> ParseRttm(std::string_view text);
std::string EmitRttm(const Annotation &annotation);
std::string EmitRttm(const std::vector<Annotation> &annotations);

UemMap ParseUem(std::string_view text);
std::string EmitUem(const UemMap &uem);
// A UEM region [0, end) per annotation, end = last offset.
UemMap UemFromAnnotations(const std::vector<Annotation> &annotations);

// Restricts every entry to the scoring regions of its recording. Entries may
// be split across region gaps; empty pieces are dropped.
Annotation Crop(const Annotation &annotation, const UemMap &regions);
Timeline Crop(const Timeline &timeline, const Timeline &regions);

// Removes the regions of `cut` from `base`; both sorted and disjoint.
Timeline Subtract(const Timeline &base, const Timeline &cut);

// Union of segments, additionally bridging gaps shorter than `gap`.
Timeline Support(const Timeline &timeline, double gap);

// Maximal regions where at least two distinct speakers are active.
Timeline OverlapRegions(const Annotation &annotation);

// Frame-level activity. Column order follows Annotation::Speakers().
struct FrameActivity {
  std::vector<std::string> speakers;
  Eigen::MatrixXi active;  // n_frames x speakers, entries 0/1
};

// Cell (t, s) is 1 iff speaker s is active at time (t + 0.5) * step.
FrameActivity Discretize(const Annotation &annotation, double step,
                         int n_frames);

// Converts a per-frame speech flag sequence into segments.
Timeline MaskToTimeline(const std::vector<bool> &mask, double step,
                        const std::string &recording_id = "");

}  // namespace diadet
