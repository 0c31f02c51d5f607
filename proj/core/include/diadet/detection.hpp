// core/include/diadet/detection.hpp

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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diadet/ahc.hpp"
#include "diadet/embedding.hpp"
#include "diadet/plda.hpp"
#include "diadet/timeline.hpp"

namespace diadet {

struct RecordingMeta {
  std::string recording_id;
  std::string session_id;
  std::string mic_id;  // empty when unknown
};
using RecordingMetaMap = std::map<std::string, RecordingMeta>;

struct Enrollment {
  std::string enroll_id;
  std::string speaker_id;
  int duration_class = 30;
  Eigen::VectorXd embedding;
  std::string session_id;
  std::string mic_id;
};

struct EnrollmentSkip {
  std::string speaker_id;
  int duration_class = 0;
  double available_s = 0.0;
};

struct EnrollmentReport {
  std::vector<Enrollment> enrollments;
  std::vector<EnrollmentSkip> skipped;  // insufficient speech
};

// Speech pieces of one recording selected for an enrollment.
struct SpeechSelection {
  std::string recording_id;
  std::vector<Segment> segments;
};

// Non-overlapped speech of `speaker`, taken in onset order across `refs`
// (in the given recording order) and truncated to exactly `duration`
// seconds. Empty when less speech is available.
std::vector<SpeechSelection> SelectEnrollmentSpeech(
    const std::vector<Annotation> &refs, const std::string &speaker,
    double duration);

// Non-overlapped speech of `speaker` in seconds across `refs`.
double NonOverlappedSpeech(const std::vector<Annotation> &refs,
                           const std::string &speaker);

// Embeds the selected speech of one recording.
using SpeechEmbedder = std::function<Eigen::VectorXd(
    const std::string &recording_id, const std::vector<Segment> &segments)>;

// Frames whose centres fall inside the segments, through `extractor`.
SpeechEmbedder FeatureEmbedder(const std::map<std::string, FeatureMatrix> *features,
                               const EmbeddingExtractor *extractor);

// Window embeddings averaged with weights equal to their overlap with the
// segments.
SpeechEmbedder StreamEmbedder(const std::map<std::string, EmbeddingStream> *streams);

// One enrollment per (target, duration); ids are "<speaker>-<duration>".
// The embedding is the length-normalized, duration-weighted mean over the
// selected recordings; session and mic come from the first one.
EnrollmentReport BuildEnrollments(const std::vector<Annotation> &refs,
                                  const std::vector<std::string> &targets,
                                  const std::vector<int> &durations,
                                  const RecordingMetaMap &meta,
                                  const SpeechEmbedder &embed);

struct TestChunk {
  std::string chunk_id;
  std::string recording_id;
  Segment window;
  std::string session_id;
  std::string mic_id;
  double speech_seconds = 0.0;
};

// Consecutive chunks of `chunk_length` seconds tiling [0, duration); ids
// are "<recording>-<index>" with a 4-digit index.
std::vector<TestChunk> ChunkTests(const std::string &recording_id, double duration,
                                  const Timeline &speech, const RecordingMeta &meta,
                                  double chunk_length = 60.0);

enum class TrialKey { kTarget, kNontarget, kUnknown };
const char *TrialKeyName(TrialKey key);
TrialKey ParseTrialKey(const std::string &name);

struct Trial {
  std::string enroll_id;
  std::string chunk_id;
  TrialKey key = TrialKey::kUnknown;
};

struct TrialOptions {
  double min_speech = 5.0;  // chunks with less detected speech are dropped
};

// Cartesian product in (enrollment, chunk) order, with short chunks removed
// and same-session (same-mic when known) target pairs filtered out. Keys
// come from the chunk's reference; recordings without one give kUnknown.
std::vector<Trial> MakeTrials(const std::vector<Enrollment> &enrollments,
                              const std::vector<TestChunk> &chunks,
                              const std::vector<Annotation> &refs,
                              const TrialOptions &opts = {});

enum class ScoringMode { kDiarized, kSliding };
const char *ScoringModeName(ScoringMode mode);
ScoringMode ParseScoringMode(const std::string &name);

// Test-side vectors of one chunk: one per cluster or one per window.
struct ChunkEmbeddings {
  std::string chunk_id;
  std::vector<Eigen::VectorXd> vectors;
};

ChunkEmbeddings SlidingChunkEmbeddings(const std::string &chunk_id,
                                       const EmbeddingStream &chunk_stream);
// Averages the windows of each cluster.
ChunkEmbeddings DiarizedChunkEmbeddings(const std::string &chunk_id,
                                        const EmbeddingStream &chunk_stream,
                                        const ClusterLabels &labels);
// Clusters the chunk's windows with AHC first.
ChunkEmbeddings DiarizedChunkEmbeddings(const std::string &chunk_id,
                                        const EmbeddingStream &chunk_stream,
                                        const PldaModel &model, double threshold);

ChunkEmbeddings ChunkEmbeddingsFor(ScoringMode mode, const std::string &chunk_id,
                                   const EmbeddingStream &chunk_stream,
                                   const PldaModel &model, double threshold);

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

// Score = max llr over the chunk's vectors; -inf when the chunk has none.
// Output keeps the order of `trials`.
std::vector<ScoredTrial> ScoreTrials(const PldaModel &model,
                                     const std::vector<Enrollment> &enrollments,
                                     const std::map<std::string, ChunkEmbeddings> &chunks,
                                     const std::vector<Trial> &trials);

// Splits scores by key; unknown trials are ignored.
void SplitByKey(const std::vector<ScoredTrial> &scored, std::vector<double> *target,
                std::vector<double> *nontarget);

// Line formats:
//   trials      "enroll_id chunk_id target|nontarget|unknown"
//   scores      "enroll_id chunk_id score" (6 decimals, -inf allowed)
//   enrollments "enroll_id speaker_id duration session_id mic_id"
//   chunks      "chunk_id recording_id onset duration session_id mic_id speech_seconds"
//   metadata    "recording_id session_id mic_id"
std::string EmitTrials(const std::vector<Trial> &trials);
std::vector<Trial> ParseTrials(std::string_view text);
std::string EmitScores(const std::vector<ScoredTrial> &scores);
std::vector<ScoredTrial> ParseScores(std::string_view text);
std::string EmitEnrollmentMeta(const std::vector<Enrollment> &enrollments);
std::vector<Enrollment> ParseEnrollmentMeta(std::string_view text);
std::string EmitChunks(const std::vector<TestChunk> &chunks);
std::vector<TestChunk> ParseChunks(std::string_view text);
std::string EmitRecordingMeta(const RecordingMetaMap &meta);
RecordingMetaMap ParseRecordingMeta(std::string_view text);

// Attaches keys from `key_trials` to scores (matched on the id pair).
void ApplyKeys(const std::vector<Trial> &key_trials, std::vector<ScoredTrial> *scores);

}  // namespace diadet
