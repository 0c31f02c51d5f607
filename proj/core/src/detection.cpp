// core/src/detection.cpp

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

#include "diadet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "diadet/error.hpp"
#include "text_util.hpp"

namespace diadet {

namespace {

const std::string kNoMic = "-";

std::string MicField(const std::string &mic) { return mic.empty() ? kNoMic : mic; }
std::string MicValue(std::string_view f) { return f == kNoMic ? "" : std::string(f); }

[[noreturn]] void Malformed(const char *what, int line_no) {
  Fail(ErrorCode::kMalformedLine, std::string(what) + " at line " + std::to_string(line_no),
       line_no);
}

Timeline NonOverlapped(const Annotation &ref, const std::string &speaker) {
  Timeline own = Support(ref.SpeakerTimeline(speaker), 0.0);
  return Subtract(own, Support(OverlapRegions(ref), 0.0));
}

}  // namespace

double NonOverlappedSpeech(const std::vector<Annotation> &refs,
                           const std::string &speaker) {
  double total = 0.0;
  for (const auto &r : refs) total += NonOverlapped(r, speaker).TotalDuration();
  return total;
}

std::vector<SpeechSelection> SelectEnrollmentSpeech(
    const std::vector<Annotation> &refs, const std::string &speaker,
    double duration) {
  std::vector<SpeechSelection> out;
  double need = duration;
  for (const auto &r : refs) {
    if (need <= kTimeEpsilon) break;
    SpeechSelection sel{r.recording_id, {}};
    for (const auto &s : NonOverlapped(r, speaker).segments) {
      if (need <= kTimeEpsilon) break;
      const double take = std::min(s.duration, need);
      sel.segments.push_back(Segment{s.onset, take});
      need -= take;
    }
    if (!sel.segments.empty()) out.push_back(std::move(sel));
  }
  if (need > kTimeEpsilon) return {};
  return out;
}

SpeechEmbedder FeatureEmbedder(const std::map<std::string, FeatureMatrix> *features,
                               const EmbeddingExtractor *extractor) {
  return [features, extractor](const std::string &rec,
                               const std::vector<Segment> &segments) {
    auto it = features->find(rec);
    if (it == features->end()) Fail(ErrorCode::kUnknownRecording, rec);
    const FeatureMatrix &feat = it->second;
    std::vector<int> rows;
    for (int t = 0; t < feat.frames(); ++t) {
      const double c = (t + 0.5) * feat.frame_shift;
      for (const auto &s : segments)
        if (s.Contains(c)) {
          rows.push_back(t);
          break;
        }
    }
    Eigen::MatrixXd frames(rows.size(), feat.dims());
    for (size_t i = 0; i < rows.size(); ++i) frames.row(i) = feat.values.row(rows[i]);
    return extractor->Extract(frames);
  };
}

SpeechEmbedder StreamEmbedder(const std::map<std::string, EmbeddingStream> *streams) {
  return [streams](const std::string &rec, const std::vector<Segment> &segments) {
    auto it = streams->find(rec);
    if (it == streams->end()) Fail(ErrorCode::kUnknownRecording, rec);
    const EmbeddingStream &stream = it->second;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(stream.dim());
    double weight = 0.0;
    for (const auto &e : stream.items) {
      double w = 0.0;
      for (const auto &s : segments) w += OverlapDuration(e.window, s);
      if (w <= 0.0) continue;
      sum += w * e.vector;
      weight += w;
    }
    if (weight <= 0.0) Fail(ErrorCode::kNoSpeech, "no embedding covers the selected speech");
    return Eigen::VectorXd(sum / weight);
  };
}

EnrollmentReport BuildEnrollments(const std::vector<Annotation> &refs,
                                  const std::vector<std::string> &targets,
                                  const std::vector<int> &durations,
                                  const RecordingMetaMap &meta,
                                  const SpeechEmbedder &embed) {
  EnrollmentReport out;
  for (const auto &spk : targets)
    for (int d : durations) {
      if (d <= 0) Fail(ErrorCode::kOutOfRange, "enrollment duration must be positive");
      std::vector<SpeechSelection> sel = SelectEnrollmentSpeech(refs, spk, d);
      if (sel.empty()) {
        out.skipped.push_back(EnrollmentSkip{spk, d, NonOverlappedSpeech(refs, spk)});
        continue;
      }
      Eigen::VectorXd sum;
      double weight = 0.0;
      for (const auto &s : sel) {
        double w = 0.0;
        for (const auto &seg : s.segments) w += seg.duration;
        Eigen::VectorXd v = embed(s.recording_id, s.segments);
        if (sum.size() == 0) sum = Eigen::VectorXd::Zero(v.size());
        if (v.size() != sum.size())
          Fail(ErrorCode::kDimensionMismatch, "embedder returned mixed dimensions");
        sum += w * v;
        weight += w;
      }
      Enrollment e;
      e.enroll_id = spk + "-" + std::to_string(d);
      e.speaker_id = spk;
      e.duration_class = d;
      e.embedding = LengthNorm(sum / weight);
      auto m = meta.find(sel.front().recording_id);
      e.session_id = m == meta.end() ? sel.front().recording_id : m->second.session_id;
      e.mic_id = m == meta.end() ? "" : m->second.mic_id;
      out.enrollments.push_back(std::move(e));
    }
  return out;
}

std::vector<TestChunk> ChunkTests(const std::string &recording_id, double duration,
                                  const Timeline &speech, const RecordingMeta &meta,
                                  double chunk_length) {
  if (!(chunk_length > 0.0)) Fail(ErrorCode::kOutOfRange, "chunk length must be positive");
  if (!(duration > 0.0)) Fail(ErrorCode::kOutOfRange, "recording duration must be positive");
  const Timeline merged = Support(speech, 0.0);
  std::vector<TestChunk> out;
  for (int k = 0; k * chunk_length < duration - kTimeEpsilon; ++k) {
    const double onset = k * chunk_length;
    const double offset = std::min(onset + chunk_length, duration);
    char id[32];
    std::snprintf(id, sizeof id, "-%04d", k);
    TestChunk c;
    c.chunk_id = recording_id + id;
    c.recording_id = recording_id;
    c.window = Segment{onset, offset - onset};
    c.session_id = meta.session_id.empty() ? recording_id : meta.session_id;
    c.mic_id = meta.mic_id;
    Timeline w{recording_id, {c.window}};
    c.speech_seconds = Crop(merged, w).TotalDuration();
    out.push_back(std::move(c));
  }
  return out;
}

const char *TrialKeyName(TrialKey key) {
  switch (key) {
    case TrialKey::kTarget: return "target";
    case TrialKey::kNontarget: return "nontarget";
    case TrialKey::kUnknown: return "unknown";
  }
  return "unknown";
}

TrialKey ParseTrialKey(const std::string &name) {
  if (name == "target") return TrialKey::kTarget;
  if (name == "nontarget") return TrialKey::kNontarget;
  if (name == "unknown") return TrialKey::kUnknown;
  Fail(ErrorCode::kInvalidArgument, "unknown trial key " + name);
}

std::vector<Trial> MakeTrials(const std::vector<Enrollment> &enrollments,
                              const std::vector<TestChunk> &chunks,
                              const std::vector<Annotation> &refs,
                              const TrialOptions &opts) {
  std::map<std::string, const Annotation *> ref_by_id;
  for (const auto &r : refs) ref_by_id[r.recording_id] = &r;
  std::vector<const TestChunk *> usable;
  for (const auto &c : chunks)
    if (c.speech_seconds + 1e-9 >= opts.min_speech) usable.push_back(&c);

  std::vector<Trial> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &e : enrollments)
    for (const TestChunk *c : usable) {
      if (!seen.insert({e.enroll_id, c->chunk_id}).second) continue;
      TrialKey key = TrialKey::kUnknown;
      auto it = ref_by_id.find(c->recording_id);
      if (it != ref_by_id.end()) {
        key = TrialKey::kNontarget;
        for (const auto &entry : it->second->entries)
          if (entry.speaker == e.speaker_id &&
              OverlapDuration(entry.segment, c->window) > kTimeEpsilon) {
            key = TrialKey::kTarget;
            break;
          }
      }
      const bool same_mic = e.mic_id.empty() || c->mic_id.empty() || e.mic_id == c->mic_id;
      if (key == TrialKey::kTarget && e.session_id == c->session_id && same_mic) continue;
      out.push_back(Trial{e.enroll_id, c->chunk_id, key});
    }
  return out;
}

const char *ScoringModeName(ScoringMode mode) {
  return mode == ScoringMode::kDiarized ? "diarized" : "sliding";
}

ScoringMode ParseScoringMode(const std::string &name) {
  if (name == "diarized") return ScoringMode::kDiarized;
  if (name == "sliding") return ScoringMode::kSliding;
  Fail(ErrorCode::kInvalidArgument, "unknown scoring mode " + name);
}

ChunkEmbeddings SlidingChunkEmbeddings(const std::string &chunk_id,
                                       const EmbeddingStream &chunk_stream) {
  ChunkEmbeddings out{chunk_id, {}};
  for (const auto &e : chunk_stream.items) out.vectors.push_back(e.vector);
  return out;
}

ChunkEmbeddings DiarizedChunkEmbeddings(const std::string &chunk_id,
                                        const EmbeddingStream &chunk_stream,
                                        const ClusterLabels &labels) {
  ChunkEmbeddings out{chunk_id, {}};
  if (chunk_stream.size() == 0) return out;
  out.vectors = AverageByLabel(chunk_stream, labels);
  return out;
}

ChunkEmbeddings DiarizedChunkEmbeddings(const std::string &chunk_id,
                                        const EmbeddingStream &chunk_stream,
                                        const PldaModel &model, double threshold) {
  if (chunk_stream.size() == 0) return ChunkEmbeddings{chunk_id, {}};
  return DiarizedChunkEmbeddings(chunk_id, chunk_stream,
                                 Ahc(ScoreMatrix(model, chunk_stream), threshold));
}

ChunkEmbeddings ChunkEmbeddingsFor(ScoringMode mode, const std::string &chunk_id,
                                   const EmbeddingStream &chunk_stream,
                                   const PldaModel &model, double threshold) {
  return mode == ScoringMode::kDiarized
             ? DiarizedChunkEmbeddings(chunk_id, chunk_stream, model, threshold)
             : SlidingChunkEmbeddings(chunk_id, chunk_stream);
}

std::vector<ScoredTrial> ScoreTrials(const PldaModel &model,
                                     const std::vector<Enrollment> &enrollments,
                                     const std::map<std::string, ChunkEmbeddings> &chunks,
                                     const std::vector<Trial> &trials) {
  PldaScorer scorer(model);
  std::map<std::string, const Enrollment *> enroll_by_id;
  for (const auto &e : enrollments) enroll_by_id[e.enroll_id] = &e;
  std::vector<ScoredTrial> out;
  out.reserve(trials.size());
  for (const auto &t : trials) {
    auto e = enroll_by_id.find(t.enroll_id);
    if (e == enroll_by_id.end())
      Fail(ErrorCode::kInvalidArgument, "trial references unknown enrollment " + t.enroll_id);
    double score = -std::numeric_limits<double>::infinity();
    auto c = chunks.find(t.chunk_id);
    if (c != chunks.end())
      for (const auto &v : c->second.vectors)
        score = std::max(score, scorer.Llr(e->second->embedding, v));
    out.push_back(ScoredTrial{t, score});
  }
  return out;
}

void SplitByKey(const std::vector<ScoredTrial> &scored, std::vector<double> *target,
                std::vector<double> *nontarget) {
  target->clear();
  nontarget->clear();
  for (const auto &s : scored) {
    if (s.trial.key == TrialKey::kTarget) target->push_back(s.score);
    if (s.trial.key == TrialKey::kNontarget) nontarget->push_back(s.score);
  }
}

void ApplyKeys(const std::vector<Trial> &key_trials, std::vector<ScoredTrial> *scores) {
  std::map<std::pair<std::string, std::string>, TrialKey> keys;
  for (const auto &t : key_trials) keys[{t.enroll_id, t.chunk_id}] = t.key;
  for (auto &s : *scores) {
    auto it = keys.find({s.trial.enroll_id, s.trial.chunk_id});
    s.trial.key = it == keys.end() ? TrialKey::kUnknown : it->second;
  }
}

std::string EmitTrials(const std::vector<Trial> &trials) {
  std::string out;
  for (const auto &t : trials)
    out += t.enroll_id + " " + t.chunk_id + " " + TrialKeyName(t.key) + "\n";
  return out;
}

std::vector<Trial> ParseTrials(std::string_view body) {
  std::vector<Trial> out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    if (f.size() != 3) Malformed("trial line needs 3 fields", no);
    const std::string key(f[2]);
    if (key != "target" && key != "nontarget" && key != "unknown")
      Malformed("bad trial key", no);
    out.push_back(Trial{std::string(f[0]), std::string(f[1]), ParseTrialKey(key)});
  });
  return out;
}

std::string EmitScores(const std::vector<ScoredTrial> &scores) {
  std::string out;
  for (const auto &s : scores)
    out += s.trial.enroll_id + " " + s.trial.chunk_id + " " +
           text::Printf("%.6f", s.score) + "\n";
  return out;
}

std::vector<ScoredTrial> ParseScores(std::string_view body) {
  std::vector<ScoredTrial> out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    double score;
    if (f.size() != 3 || !text::ParseDouble(f[2], &score, true))
      Malformed("score line needs \"enroll chunk score\"", no);
    out.push_back(ScoredTrial{Trial{std::string(f[0]), std::string(f[1]), TrialKey::kUnknown},
                              score});
  });
  return out;
}

std::string EmitEnrollmentMeta(const std::vector<Enrollment> &enrollments) {
  std::string out;
  for (const auto &e : enrollments)
    out += e.enroll_id + " " + e.speaker_id + " " + std::to_string(e.duration_class) + " " +
           e.session_id + " " + MicField(e.mic_id) + "\n";
  return out;
}

std::vector<Enrollment> ParseEnrollmentMeta(std::string_view body) {
  std::vector<Enrollment> out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    long long d;
    if (f.size() != 5 || !text::ParseInt(f[2], &d) || d <= 0)
      Malformed("enrollment line needs \"id speaker duration session mic\"", no);
    Enrollment e;
    e.enroll_id = f[0];
    e.speaker_id = f[1];
    e.duration_class = static_cast<int>(d);
    e.session_id = f[3];
    e.mic_id = MicValue(f[4]);
    out.push_back(std::move(e));
  });
  return out;
}

std::string EmitChunks(const std::vector<TestChunk> &chunks) {
  std::string out;
  for (const auto &c : chunks)
    out += c.chunk_id + " " + c.recording_id + " " + text::Printf("%.3f", c.window.onset) +
           " " + text::Printf("%.3f", c.window.duration) + " " + c.session_id + " " +
           MicField(c.mic_id) + " " + text::Printf("%.3f", c.speech_seconds) + "\n";
  return out;
}

std::vector<TestChunk> ParseChunks(std::string_view body) {
  std::vector<TestChunk> out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    TestChunk c;
    if (f.size() != 7 || !text::ParseDouble(f[2], &c.window.onset) ||
        !text::ParseDouble(f[3], &c.window.duration) ||
        !text::ParseDouble(f[6], &c.speech_seconds))
      Malformed("chunk line needs 7 fields", no);
    c.chunk_id = f[0];
    c.recording_id = f[1];
    c.session_id = f[4];
    c.mic_id = MicValue(f[5]);
    out.push_back(std::move(c));
  });
  return out;
}

std::string EmitRecordingMeta(const RecordingMetaMap &meta) {
  std::string out;
  for (const auto &[id, m] : meta)
    out += id + " " + m.session_id + " " + MicField(m.mic_id) + "\n";
  return out;
}

RecordingMetaMap ParseRecordingMeta(std::string_view body) {
  RecordingMetaMap out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    if (f.size() != 3) Malformed("metadata line needs \"recording session mic\"", no);
    std::string id(f[0]);
    out[id] = RecordingMeta{id, std::string(f[1]), MicValue(f[2])};
  });
  return out;
}

}  // namespace diadet
