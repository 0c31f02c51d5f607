// tests/unit/detection_test.cpp

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
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "diadet/calibration.hpp"
#include "diadet/detection.hpp"
#include "diadet/error.hpp"
#include "diadet/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace diadet {
namespace {

using testing::CodeOf;

constexpr double kInf = std::numeric_limits<double>::infinity();

Annotation Ann(const std::string &rec,
               std::initializer_list<std::tuple<double, double, const char *>> items) {
  Annotation a{rec, {}};
  for (auto [on, off, spk] : items) a.entries.push_back({Segment{on, off - on}, spk});
  a.Sort();
  return a;
}

double Total(const std::vector<SpeechSelection> &sel) {
  double t = 0.0;
  for (const auto &s : sel)
    for (const auto &seg : s.segments) t += seg.duration;
  return t;
}

Enrollment Enr(const std::string &id, const std::string &spk, const std::string &session,
               const std::string &mic = "") {
  Enrollment e;
  e.enroll_id = id;
  e.speaker_id = spk;
  e.session_id = session;
  e.mic_id = mic;
  e.embedding = Eigen::VectorXd::Ones(2);
  return e;
}

TestChunk Chunk(const std::string &rec, double onset, double speech,
                const std::string &session, const std::string &mic = "") {
  TestChunk c;
  c.recording_id = rec;
  c.chunk_id = rec + "-" + std::to_string(static_cast<int>(onset));
  c.window = Segment{onset, 60.0};
  c.session_id = session;
  c.mic_id = mic;
  c.speech_seconds = speech;
  return c;
}

TEST(Enrollment, TruncatesLastSegment) {
  auto refs = std::vector<Annotation>{Ann("r1", {{0.0, 3.0, "A"}, {10.0, 14.0, "A"}})};
  auto sel = SelectEnrollmentSpeech(refs, "A", 5.0);
  ASSERT_EQ(sel.size(), 1u);
  ASSERT_EQ(sel[0].segments.size(), 2u);
  EXPECT_NEAR(sel[0].segments[0].onset, 0.0, 1e-12);
  EXPECT_NEAR(sel[0].segments[0].duration, 3.0, 1e-12);
  EXPECT_NEAR(sel[0].segments[1].onset, 10.0, 1e-12);
  EXPECT_NEAR(sel[0].segments[1].duration, 2.0, 1e-12);
}

TEST(Enrollment, AcrossRecordingsInOrder) {
  std::vector<Annotation> refs{Ann("r1", {{0.0, 3.0, "A"}}), Ann("r2", {{5.0, 9.0, "A"}})};
  auto sel = SelectEnrollmentSpeech(refs, "A", 5.0);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].recording_id, "r1");
  EXPECT_EQ(sel[1].recording_id, "r2");
  EXPECT_NEAR(Total(sel), 5.0, 1e-12);
  EXPECT_TRUE(SelectEnrollmentSpeech(refs, "A", 30.0).empty());
}

TEST(Enrollment, OverlappedSpeechContributesNothing) {
  std::vector<Annotation> refs{
      Ann("r1", {{0.0, 10.0, "A"}, {0.0, 10.0, "B"}, {10.0, 12.0, "A"}, {20.0, 24.0, "B"}})};
  EXPECT_NEAR(NonOverlappedSpeech(refs, "A"), 2.0, 1e-12);
  EXPECT_NEAR(NonOverlappedSpeech(refs, "B"), 4.0, 1e-12);
  auto sel = SelectEnrollmentSpeech(refs, "A", 2.0);
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_NEAR(sel[0].segments[0].onset, 10.0, 1e-12);
}

TEST(Enrollment, BuildReportsSkips) {
  std::vector<Annotation> refs{Ann("r1", {{0.0, 10.0, "A"}, {10.0, 50.0, "B"}})};
  RecordingMetaMap meta{{"r1", RecordingMeta{"r1", "sess1", "mic1"}}};
  int calls = 0;
  SpeechEmbedder embed = [&](const std::string &, const std::vector<Segment> &segs) {
    ++calls;
    return Eigen::VectorXd::Constant(3, segs.front().onset + 1.0);
  };
  auto rep = BuildEnrollments(refs, {"A", "B"}, {5, 15, 30}, meta, embed);
  std::set<std::string> ids;
  for (const auto &e : rep.enrollments) {
    ids.insert(e.enroll_id);
    EXPECT_NEAR(e.embedding.norm(), std::sqrt(3.0), 1e-12);
    EXPECT_EQ(e.session_id, "sess1");
    EXPECT_EQ(e.mic_id, "mic1");
  }
  EXPECT_EQ(ids, (std::set<std::string>{"A-5", "B-5", "B-15", "B-30"}));
  ASSERT_EQ(rep.skipped.size(), 2u);
  for (const auto &s : rep.skipped) {
    EXPECT_EQ(s.speaker_id, "A");
    EXPECT_NEAR(s.available_s, 10.0, 1e-12);
  }
  EXPECT_EQ(calls, 4);
}

TEST(Enrollment, StreamEmbedderWeightsByOverlap) {
  std::map<std::string, EmbeddingStream> streams;
  EmbeddingStream &s = streams["r1"];
  s.recording_id = "r1";
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  s.items.push_back(Embedding{a, Segment{0.0, 1.5}, "r1"});
  s.items.push_back(Embedding{b, Segment{0.75, 1.5}, "r1"});
  auto embed = StreamEmbedder(&streams);
  Eigen::VectorXd v = embed("r1", {Segment{0.0, 1.0}});
  // Overlaps 1.0 with the first window, 0.25 with the second.
  EXPECT_NEAR(v(1) / v(0), 0.25, 1e-12);
}

TEST(Chunks, TileTheRecording) {
  Timeline speech{"r1", {Segment{10.0, 20.0}, Segment{100.0, 30.0}}};
  auto chunks = ChunkTests("r1", 150.0, speech, RecordingMeta{"r1", "s1", ""});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_NEAR(chunks[0].window.duration, 60.0, 1e-12);
  EXPECT_NEAR(chunks[1].window.duration, 60.0, 1e-12);
  EXPECT_NEAR(chunks[2].window.duration, 30.0, 1e-12);
  for (size_t i = 1; i < chunks.size(); ++i)
    EXPECT_NEAR(chunks[i].window.onset, chunks[i - 1].window.offset(), 1e-12);
  EXPECT_NEAR(chunks[0].speech_seconds, 20.0, 1e-12);
  EXPECT_NEAR(chunks[1].speech_seconds, 20.0, 1e-12);
  EXPECT_NEAR(chunks[2].speech_seconds, 10.0, 1e-12);
  EXPECT_EQ(chunks[0].chunk_id, "r1-0000");
  EXPECT_EQ(chunks[2].session_id, "s1");

  auto silent = ChunkTests("r2", 90.0, Timeline{"r2", {}}, RecordingMeta{});
  ASSERT_EQ(silent.size(), 2u);
  for (const auto &c : silent) EXPECT_EQ(c.speech_seconds, 0.0);
  EXPECT_EQ(silent[0].session_id, "r2");
}

TEST(Trials, CartesianProduct) {
  std::vector<Enrollment> enr{Enr("A-30", "A", "s0"), Enr("B-30", "B", "s0")};
  std::vector<TestChunk> chunks{Chunk("r1", 0, 30, "s1"), Chunk("r1", 60, 30, "s1"),
                                Chunk("r2", 0, 30, "s2")};
  std::vector<Annotation> refs{Ann("r1", {{0.0, 30.0, "A"}}), Ann("r2", {{5.0, 40.0, "B"}})};
  auto trials = MakeTrials(enr, chunks, refs);
  ASSERT_EQ(trials.size(), 6u);
  EXPECT_EQ(trials[0].key, TrialKey::kTarget);
  EXPECT_EQ(trials[1].key, TrialKey::kNontarget);
  EXPECT_EQ(trials[2].key, TrialKey::kNontarget);
  EXPECT_EQ(trials[5].key, TrialKey::kTarget);
  EXPECT_EQ(trials[3].enroll_id, "B-30");
}

TEST(Trials, SessionFilterAppliesToTargetsOnly) {
  std::vector<Enrollment> enr{Enr("A-30", "A", "s1")};
  std::vector<TestChunk> chunks{Chunk("r1", 0, 30, "s1"), Chunk("r2", 0, 30, "s1")};
  std::vector<Annotation> refs{Ann("r1", {{0.0, 30.0, "A"}}), Ann("r2", {{0.0, 30.0, "B"}})};
  auto trials = MakeTrials(enr, chunks, refs);
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_EQ(trials[0].chunk_id, chunks[1].chunk_id);
  EXPECT_EQ(trials[0].key, TrialKey::kNontarget);
}

TEST(Trials, DifferentMicKeepsSameSessionTarget) {
  std::vector<Enrollment> enr{Enr("A-30", "A", "s1", "m1")};
  std::vector<TestChunk> chunks{Chunk("r1", 0, 30, "s1", "m2"), Chunk("r1b", 0, 30, "s1", "m1")};
  std::vector<Annotation> refs{Ann("r1", {{0.0, 30.0, "A"}}), Ann("r1b", {{0.0, 30.0, "A"}})};
  auto trials = MakeTrials(enr, chunks, refs);
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_EQ(trials[0].chunk_id, chunks[0].chunk_id);
  EXPECT_EQ(trials[0].key, TrialKey::kTarget);
}

TEST(Trials, ShortChunksDropped) {
  std::vector<Enrollment> enr{Enr("A-30", "A", "s0")};
  std::vector<TestChunk> chunks{Chunk("r1", 0, 3.0, "s1"), Chunk("r1", 60, 5.0, "s1")};
  auto trials = MakeTrials(enr, chunks, {});
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_EQ(trials[0].chunk_id, chunks[1].chunk_id);
  EXPECT_EQ(trials[0].key, TrialKey::kUnknown);
}

TEST(Trials, PropertyKeySoundnessAndUniqueness) {
  oracle::Rng rng(71);
  std::vector<Annotation> refs;
  std::vector<TestChunk> chunks;
  for (int r = 0; r < 5; ++r) {
    std::string rec = "rec" + std::to_string(r);
    refs.push_back(oracle::RandomAnnotation(rng, rec, 3, 20, 180.0, 0.5, "spk"));
    auto c = ChunkTests(rec, 180.0, refs.back().ToTimeline(),
                        RecordingMeta{rec, "sess" + std::to_string(r % 2), ""});
    chunks.insert(chunks.end(), c.begin(), c.end());
  }
  std::vector<Enrollment> enr;
  for (int s = 0; s < 3; ++s) enr.push_back(Enr("e" + std::to_string(s), "spk" + std::to_string(s), "x"));
  enr.push_back(Enr("dup", "spk0", "sess0"));
  auto trials = MakeTrials(enr, chunks, refs);
  EXPECT_EQ(MakeTrials(enr, chunks, refs).size(), trials.size());
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, const TestChunk *> by_id;
  for (const auto &c : chunks) by_id[c.chunk_id] = &c;
  std::map<std::string, const Enrollment *> enr_by_id;
  for (const auto &e : enr) enr_by_id[e.enroll_id] = &e;
  for (const auto &t : trials) {
    EXPECT_TRUE(seen.insert({t.enroll_id, t.chunk_id}).second);
    const TestChunk &c = *by_id.at(t.chunk_id);
    const Enrollment &e = *enr_by_id.at(t.enroll_id);
    EXPECT_GE(c.speech_seconds, 5.0 - 1e-9);
    bool present = false;
    for (const auto &r : refs)
      if (r.recording_id == c.recording_id)
        for (const auto &entry : r.entries)
          present |= entry.speaker == e.speaker_id && OverlapDuration(entry.segment, c.window) > 1e-9;
    EXPECT_EQ(t.key == TrialKey::kTarget, present);
    if (t.key == TrialKey::kTarget) EXPECT_NE(e.session_id, c.session_id);
  }
}

PldaModel Model(int dim) {
  PldaModel m;
  m.mu = Eigen::VectorXd::Zero(dim);
  m.between = Eigen::MatrixXd::Identity(dim, dim);
  m.within = 0.5 * Eigen::MatrixXd::Identity(dim, dim);
  return m;
}

TEST(Scoring, MaxOverClusters) {
  PldaModel m = Model(3);
  Enrollment e = Enr("A-30", "A", "s0");
  e.embedding = Eigen::Vector3d(1.0, 1.0, -1.0);
  std::map<std::string, ChunkEmbeddings> chunks;
  chunks["c1"] = ChunkEmbeddings{"c1", {e.embedding}};
  chunks["c2"] = ChunkEmbeddings{"c2", {e.embedding, Eigen::Vector3d(-1.0, -1.0, 1.0)}};
  chunks["c3"] = ChunkEmbeddings{"c3", {}};
  std::vector<Trial> trials{{"A-30", "c1", TrialKey::kTarget},
                            {"A-30", "c2", TrialKey::kTarget},
                            {"A-30", "c3", TrialKey::kNontarget}};
  auto scored = ScoreTrials(m, {e}, chunks, trials);
  ASSERT_EQ(scored.size(), 3u);
  EXPECT_NEAR(scored[0].score, Llr(m, e.embedding, e.embedding), 1e-12);
  EXPECT_GT(scored[0].score, 0.0);
  EXPECT_GE(scored[1].score, scored[0].score);
  EXPECT_EQ(scored[2].score, -kInf);
  EXPECT_EQ(scored[2].trial.chunk_id, "c3");
}

TEST(Scoring, DiarizedEqualsSlidingWithOneClusterPerWindow) {
  oracle::Rng rng(72);
  PldaModel m = Model(4);
  EmbeddingStream s{"r1", {}};
  for (int i = 0; i < 6; ++i)
    s.items.push_back(Embedding{LengthNorm(oracle::StandardNormal(rng, 4)), Segment{0.75 * i, 1.5}, "r1"});
  auto sliding = SlidingChunkEmbeddings("c", s);
  auto diarized = DiarizedChunkEmbeddings("c", s, ClusterLabels{0, 1, 2, 3, 4, 5});
  ASSERT_EQ(sliding.vectors.size(), diarized.vectors.size());
  Enrollment e = Enr("A-30", "A", "s0");
  e.embedding = LengthNorm(oracle::StandardNormal(rng, 4));
  std::vector<Trial> trials{{"A-30", "c", TrialKey::kTarget}};
  auto a = ScoreTrials(m, {e}, {{"c", sliding}}, trials);
  auto b = ScoreTrials(m, {e}, {{"c", diarized}}, trials);
  EXPECT_NEAR(a[0].score, b[0].score, 1e-12);
}

TEST(Calibration, PerfectSeparationStaysFinite) {
  std::vector<double> tar{5.0, 6.0, 7.0}, non{-5.0, -6.0, -7.0};
  Calibration c = Calibrate(tar, non);
  EXPECT_TRUE(std::isfinite(c.a) && std::isfinite(c.b));
  EXPECT_GT(c.a, 0.0);
  EXPECT_LT(CalibrationLoss(tar, non, c, 0.05), 1e-3);
}

TEST(Calibration, KeepsRankingAndEer) {
  oracle::Rng rng(73);
  std::normal_distribution<double> g;
  std::vector<double> tar, non;
  for (int i = 0; i < 200; ++i) tar.push_back(2.0 + 1.5 * g(rng));
  for (int i = 0; i < 2000; ++i) non.push_back(-1.0 + g(rng));
  Calibration c = Calibrate(tar, non);
  EXPECT_GT(c.a, 0.0);
  auto ct = c.Apply(tar), cn = c.Apply(non);
  EXPECT_EQ(Eer(tar, non), Eer(ct, cn));
}

TEST(Calibration, IsStationaryPoint) {
  oracle::Rng rng(74);
  std::normal_distribution<double> g;
  std::vector<double> tar, non;
  for (int i = 0; i < 100; ++i) tar.push_back(3.0 + 2.0 * g(rng));
  for (int i = 0; i < 500; ++i) non.push_back(g(rng));
  CalibrationOptions opts;
  Calibration c = Calibrate(tar, non, opts);
  auto objective = [&](double a, double b) {
    return CalibrationLoss(tar, non, Calibration{a, b}, opts.effective_prior) +
           0.5 * opts.ridge * (a * a + b * b);
  };
  const double h = 1e-5;
  double ga = (objective(c.a + h, c.b) - objective(c.a - h, c.b)) / (2 * h);
  double gb = (objective(c.a, c.b + h) - objective(c.a, c.b - h)) / (2 * h);
  EXPECT_LT(std::hypot(ga, gb), 1e-6);
  for (double da : {-0.05, 0.05})
    for (double db : {-0.05, 0.05}) EXPECT_GT(objective(c.a + da, c.b + db), objective(c.a, c.b));
}

TEST(Calibration, SingleClassIsDegenerate) {
  std::vector<double> tar{1.0, 2.0}, none;
  EXPECT_EQ(CodeOf([&] { Calibrate(tar, none); }), ErrorCode::kDegenerateKeys);
  EXPECT_EQ(CodeOf([&] { Calibrate(none, tar); }), ErrorCode::kDegenerateKeys);
}

TEST(Formats, RoundTrips) {
  std::vector<Trial> trials{{"A-30", "r1-0000", TrialKey::kTarget},
                            {"B-5", "r2-0001", TrialKey::kNontarget},
                            {"C-15", "r3-0002", TrialKey::kUnknown}};
  auto tr = ParseTrials(EmitTrials(trials));
  ASSERT_EQ(tr.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(tr[i].enroll_id, trials[i].enroll_id);
    EXPECT_EQ(tr[i].chunk_id, trials[i].chunk_id);
    EXPECT_EQ(tr[i].key, trials[i].key);
  }
  std::vector<ScoredTrial> scores{{trials[0], 1.234567}, {trials[1], -kInf}};
  auto sc = ParseScores(EmitScores(scores));
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_DOUBLE_EQ(sc[0].score, 1.234567);
  EXPECT_EQ(sc[1].score, -kInf);

  std::vector<Enrollment> enr{Enr("A-30", "A", "s1", "m1"), Enr("B-5", "B", "s2")};
  enr[1].duration_class = 5;
  auto em = ParseEnrollmentMeta(EmitEnrollmentMeta(enr));
  ASSERT_EQ(em.size(), 2u);
  EXPECT_EQ(em[0].mic_id, "m1");
  EXPECT_EQ(em[1].mic_id, "");
  EXPECT_EQ(em[1].duration_class, 5);

  auto chunks = ChunkTests("r1", 125.0, Timeline{"r1", {Segment{1.0, 70.0}}},
                           RecordingMeta{"r1", "s1", "m2"});
  auto ch = ParseChunks(EmitChunks(chunks));
  ASSERT_EQ(ch.size(), chunks.size());
  for (size_t i = 0; i < ch.size(); ++i) {
    EXPECT_EQ(ch[i].chunk_id, chunks[i].chunk_id);
    EXPECT_NEAR(ch[i].window.onset, chunks[i].window.onset, 1e-6);
    EXPECT_NEAR(ch[i].speech_seconds, chunks[i].speech_seconds, 1e-6);
    EXPECT_EQ(ch[i].mic_id, "m2");
  }

  RecordingMetaMap meta{{"r1", {"r1", "s1", "m1"}}, {"r2", {"r2", "s1", ""}}};
  auto mm = ParseRecordingMeta(EmitRecordingMeta(meta));
  ASSERT_EQ(mm.size(), 2u);
  EXPECT_EQ(mm.at("r2").session_id, "s1");
  EXPECT_EQ(mm.at("r2").mic_id, "");
  EXPECT_EQ(CodeOf([] { ParseTrials("a b\n"); }), ErrorCode::kMalformedLine);
}

TEST(Formats, ApplyKeysMatchesOnIds) {
  std::vector<Trial> keys{{"A", "c1", TrialKey::kTarget}, {"A", "c2", TrialKey::kNontarget}};
  std::vector<ScoredTrial> scores{{{"A", "c2", TrialKey::kUnknown}, 0.5},
                                  {{"A", "c1", TrialKey::kUnknown}, 1.5}};
  ApplyKeys(keys, &scores);
  EXPECT_EQ(scores[0].trial.key, TrialKey::kNontarget);
  EXPECT_EQ(scores[1].trial.key, TrialKey::kTarget);
}

}  // namespace
}  // namespace diadet
