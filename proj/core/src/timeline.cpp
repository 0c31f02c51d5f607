// core/src/timeline.cpp

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

#include "diadet/timeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "diadet/error.hpp"
#include "text_util.hpp"

namespace diadet {

namespace {

using text::ForEachLine;
using text::ParseDouble;
using text::SplitFields;

std::string FormatTime(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", t);
  return buf;
}

}  // namespace

Segment Intersect(const Segment &a, const Segment &b) {
  double on = std::max(a.onset, b.onset);
  double off = std::min(a.offset(), b.offset());
  return Segment{on, off - on};
}

double OverlapDuration(const Segment &a, const Segment &b) {
  return std::max(0.0, Intersect(a, b).duration);
}

void Timeline::Sort() {
  std::sort(segments.begin(), segments.end(),
            [](const Segment &a, const Segment &b) {
              return std::tie(a.onset, a.duration) <
                     std::tie(b.onset, b.duration);
            });
}

double Timeline::TotalDuration() const {
  double total = 0.0;
  for (const auto &s : segments) total += s.duration;
  return total;
}

void Annotation::Sort() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const AnnotationEntry &a, const AnnotationEntry &b) {
                     return std::tie(a.segment.onset, a.segment.duration,
                                     a.speaker) <
                            std::tie(b.segment.onset, b.segment.duration,
                                     b.speaker);
                   });
}

std::vector<std::string> Annotation::Speakers() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto &e : entries)
    if (seen.insert(e.speaker).second) out.push_back(e.speaker);
  return out;
}

double Annotation::TotalSpeakerTime() const {
  double total = 0.0;
  for (const auto &e : entries) total += e.segment.duration;
  return total;
}

Timeline Annotation::SpeakerTimeline(const std::string &speaker) const {
  Timeline t{recording_id, {}};
  for (const auto &e : entries)
    if (e.speaker == speaker) t.segments.push_back(e.segment);
  t.Sort();
  return t;
}

Timeline Annotation::ToTimeline() const {
  Timeline t{recording_id, {}};
  for (const auto &e : entries) t.segments.push_back(e.segment);
  t.Sort();
  return t;
}

std::vector<Annotation> ParseRttm(std::string_view text) {
  std::vector<Annotation> out;
  std::map<std::string, size_t, std::less<>> index;
  ForEachLine(text, [&](std::string_view line, int line_no) {
    auto f = SplitFields(line);
    if (f.empty()) return;
    if (f.size() != 10)
      Fail(ErrorCode::kMalformedLine,
           "line " + std::to_string(line_no) + ": expected 10 fields, got " +
               std::to_string(f.size()),
           line_no);
    if (f[0] != "SPEAKER")
      Fail(ErrorCode::kMalformedLine,
           "line " + std::to_string(line_no) + ": type must be SPEAKER",
           line_no);
    double onset = 0.0, duration = 0.0;
    if (!ParseDouble(f[3], &onset) || !ParseDouble(f[4], &duration) ||
        onset < 0.0)
      Fail(ErrorCode::kMalformedLine,
           "line " + std::to_string(line_no) + ": bad onset/duration",
           line_no);
    if (duration < 0.0)
      Fail(ErrorCode::kNegativeDuration,
           "line " + std::to_string(line_no), line_no);
    // Zero-length turns carry no speaker time.
    if (duration == 0.0) return;
    std::string rec(f[1]);
    auto it = index.find(rec);
    if (it == index.end()) {
      it = index.emplace(rec, out.size()).first;
      out.push_back(Annotation{rec, {}});
    }
    out[it->second].entries.push_back(
        AnnotationEntry{Segment{onset, duration}, std::string(f[7])});
  });
  for (auto &a : out) a.Sort();
  return out;
}

std::string EmitRttm(const Annotation &annotation) {
  std::string out;
  for (const auto &e : annotation.entries) {
    out += "SPEAKER ";
    out += annotation.recording_id;
    out += " 1 ";
    out += FormatTime(e.segment.onset);
    out += ' ';
    out += FormatTime(e.segment.duration);
    out += " <NA> <NA> ";
    out += e.speaker;
    out += " <NA> <NA>\n";
  }
  return out;
}

std::string EmitRttm(const std::vector<Annotation> &annotations) {
  std::string out;
  for (const auto &a : annotations) out += EmitRttm(a);
  return out;
}

UemMap ParseUem(std::string_view text) {
  UemMap out;
  ForEachLine(text, [&](std::string_view line, int line_no) {
    auto f = SplitFields(line);
    if (f.empty()) return;
    double on = 0.0, off = 0.0;
    if (f.size() != 4 || !ParseDouble(f[2], &on) || !ParseDouble(f[3], &off) ||
        on < 0.0)
      Fail(ErrorCode::kMalformedLine, "UEM line " + std::to_string(line_no),
           line_no);
    if (off < on)
      Fail(ErrorCode::kNegativeDuration, "UEM line " + std::to_string(line_no),
           line_no);
    if (off == on) return;
    auto &t = out[std::string(f[0])];
    t.recording_id = std::string(f[0]);
    t.segments.push_back(Segment{on, off - on});
  });
  for (auto &[rec, t] : out) t = Support(t, 0.0);
  return out;
}

std::string EmitUem(const UemMap &uem) {
  std::string out;
  for (const auto &[rec, t] : uem)
    for (const auto &s : t.segments)
      out += rec + " 1 " + FormatTime(s.onset) + " " + FormatTime(s.offset()) +
             "\n";
  return out;
}

UemMap UemFromAnnotations(const std::vector<Annotation> &annotations) {
  UemMap out;
  for (const auto &a : annotations) {
    double end = 0.0;
    for (const auto &e : a.entries) end = std::max(end, e.segment.offset());
    Timeline t{a.recording_id, {}};
    if (end > 0.0) t.segments.push_back(Segment{0.0, end});
    out[a.recording_id] = std::move(t);
  }
  return out;
}

Timeline Crop(const Timeline &timeline, const Timeline &regions) {
  Timeline out{timeline.recording_id, {}};
  for (const auto &s : timeline.segments)
    for (const auto &r : regions.segments) {
      Segment piece = Intersect(s, r);
      if (piece.duration > kTimeEpsilon) out.segments.push_back(piece);
    }
  out.Sort();
  return out;
}

Annotation Crop(const Annotation &annotation, const UemMap &regions) {
  auto it = regions.find(annotation.recording_id);
  if (it == regions.end())
    Fail(ErrorCode::kUnknownRecording, annotation.recording_id);
  Annotation out{annotation.recording_id, {}};
  for (const auto &e : annotation.entries)
    for (const auto &r : it->second.segments) {
      Segment piece = Intersect(e.segment, r);
      if (piece.duration > kTimeEpsilon)
        out.entries.push_back(AnnotationEntry{piece, e.speaker});
    }
  out.Sort();
  return out;
}

Timeline Subtract(const Timeline &base, const Timeline &cut) {
  Timeline out{base.recording_id, {}};
  for (const auto &b : base.segments) {
    double start = b.onset;
    const double end = b.offset();
    for (const auto &c : cut.segments) {
      if (c.offset() <= start) continue;
      if (c.onset >= end) break;
      if (c.onset - start > kTimeEpsilon)
        out.segments.push_back(Segment{start, c.onset - start});
      start = std::max(start, c.offset());
    }
    if (end - start > kTimeEpsilon)
      out.segments.push_back(Segment{start, end - start});
  }
  return out;
}

Timeline Support(const Timeline &timeline, double gap) {
  Timeline sorted = timeline;
  sorted.Sort();
  Timeline out{timeline.recording_id, {}};
  for (const auto &s : sorted.segments) {
    if (!out.segments.empty()) {
      Segment &last = out.segments.back();
      if (s.onset - last.offset() < gap + kTimeEpsilon) {
        double off = std::max(last.offset(), s.offset());
        last.duration = off - last.onset;
        continue;
      }
    }
    out.segments.push_back(s);
  }
  return out;
}

Timeline OverlapRegions(const Annotation &annotation) {
  // Sweep over per-speaker unions so self-overlap never counts twice.
  std::vector<std::pair<double, int>> events;
  for (const auto &spk : annotation.Speakers()) {
    Timeline u = Support(annotation.SpeakerTimeline(spk), 0.0);
    for (const auto &s : u.segments) {
      events.emplace_back(s.onset, +1);
      events.emplace_back(s.offset(), -1);
    }
  }
  // Ends sort before starts at equal times.
  std::sort(events.begin(), events.end());
  Timeline out{annotation.recording_id, {}};
  int active = 0;
  double start = 0.0;
  for (const auto &[t, delta] : events) {
    int before = active;
    active += delta;
    if (before < 2 && active >= 2) start = t;
    if (before >= 2 && active < 2 && t - start > kTimeEpsilon)
      out.segments.push_back(Segment{start, t - start});
  }
  return Support(out, 0.0);
}

FrameActivity Discretize(const Annotation &annotation, double step,
                         int n_frames) {
  if (!(step > 0.0)) Fail(ErrorCode::kInvalidArgument, "step must be > 0");
  FrameActivity out;
  out.speakers = annotation.Speakers();
  out.active = Eigen::MatrixXi::Zero(n_frames, out.speakers.size());
  std::map<std::string, int> col;
  for (size_t i = 0; i < out.speakers.size(); ++i)
    col[out.speakers[i]] = static_cast<int>(i);
  for (const auto &e : annotation.entries) {
    int c = col[e.speaker];
    // Frames whose centers fall in [onset, offset).
    int first = static_cast<int>(std::ceil(e.segment.onset / step - 0.5));
    int last = static_cast<int>(std::ceil(e.segment.offset() / step - 0.5)) - 1;
    first = std::max(first, 0);
    last = std::min(last, n_frames - 1);
    for (int t = first; t <= last; ++t) {
      double center = (t + 0.5) * step;
      if (e.segment.Contains(center)) out.active(t, c) = 1;
    }
    // Guard the rounding at both ends.
    if (first - 1 >= 0 && first - 1 < n_frames &&
        e.segment.Contains((first - 0.5) * step))
      out.active(first - 1, c) = 1;
    if (last + 1 >= 0 && last + 1 < n_frames &&
        e.segment.Contains((last + 1.5) * step))
      out.active(last + 1, c) = 1;
  }
  return out;
}

Timeline MaskToTimeline(const std::vector<bool> &mask, double step,
                        const std::string &recording_id) {
  Timeline out{recording_id, {}};
  size_t t = 0;
  while (t < mask.size()) {
    if (!mask[t]) {
      ++t;
      continue;
    }
    size_t u = t;
    while (u < mask.size() && mask[u]) ++u;
    out.segments.push_back(Segment{t * step, (u - t) * step});
    t = u;
  }
  return out;
}

}  // namespace diadet
