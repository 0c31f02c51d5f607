// tools/cli.cpp

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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "diadet/archive.hpp"
#include "diadet/calibration.hpp"
#include "diadet/config.hpp"
#include "diadet/detection.hpp"
#include "diadet/diarizer.hpp"
#include "diadet/harness.hpp"
#include "diadet/metrics.hpp"
#include "diadet/plda.hpp"

namespace diadet {
namespace cli {

ExitStatus ExitStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kUnknownKey:
    case ErrorCode::kMissingPath:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kSingularW:
    case ErrorCode::kDegenerate:
    case ErrorCode::kDegenerateInit:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

namespace {

namespace fs = std::filesystem;

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel CurrentLogLevel() {
  static const LogLevel level = [] {
    const char *env = std::getenv("DIADET_LOG_LEVEL");
    const std::string v = env ? env : "info";
    if (v == "error") return LogLevel::kError;
    if (v == "warn") return LogLevel::kWarn;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

std::mutex log_mutex;

void Log(LogLevel level, const std::string &msg) {
  if (level > CurrentLogLevel()) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "diadet: " << msg << "\n";
}

class StageTimer {
 public:
  explicit StageTimer(std::string stage)
      : stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    Log(LogLevel::kInfo, "stage " + stage_ + " took " + buf + " s");
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  bool verbose = false;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The exception of the
// lowest failing index is rethrown, so failures do not depend on scheduling.
void ParallelFor(int n, int jobs, const std::function<void(int)> &fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

void WriteOutput(const std::string &path, const std::string &contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
  } else {
    WriteFile(path, contents);
  }
}

std::string FileStem(const std::string &path) {
  const std::string name = fs::path(path).filename().string();
  return name.substr(0, name.find('.'));
}

enum class InputKind { kFeatures, kWave, kEmbeddings };

struct InputFile {
  std::string recording_id;
  std::string path;
  InputKind kind;
};

std::optional<InputKind> KindOf(const std::string &path) {
  const std::string name = fs::path(path).filename().string();
  auto ends = [&](const std::string &suffix) {
    return name.size() > suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends(".clean.feat")) return std::nullopt;
  if (ends(".feat")) return InputKind::kFeatures;
  if (ends(".wav")) return InputKind::kWave;
  if (ends(".emb")) return InputKind::kEmbeddings;
  return std::nullopt;
}

// Files and directories of .feat, .wav or .emb archives, in path order.
std::vector<InputFile> CollectInputs(const std::vector<std::string> &paths,
                                     const std::set<InputKind> &allowed) {
  std::vector<std::string> files;
  for (const auto &p : paths) {
    if (!fs::exists(p)) Fail(ErrorCode::kMissingPath, p);
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto &entry : fs::directory_iterator(p)) {
        if (!entry.is_regular_file()) continue;
        auto kind = KindOf(entry.path().string());
        if (kind && allowed.count(*kind)) found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      auto kind = KindOf(p);
      if (!kind || !allowed.count(*kind))
        Fail(ErrorCode::kUnsupportedFormat, "unrecognised input " + p);
      files.push_back(p);
    }
  }
  std::vector<InputFile> out;
  std::set<std::string> seen;
  for (const auto &f : files) {
    InputFile in{FileStem(f), f, *KindOf(f)};
    if (!seen.insert(in.recording_id).second)
      Fail(ErrorCode::kInvalidArgument, "recording " + in.recording_id + " given twice");
    out.push_back(std::move(in));
  }
  if (out.empty()) Fail(ErrorCode::kMissingPath, "no input recordings found");
  return out;
}

std::vector<Annotation> LoadRttm(const std::string &path) {
  return ParseRttm(ReadFile(path));
}

std::map<std::string, Annotation> ByRecording(const std::vector<Annotation> &anns) {
  std::map<std::string, Annotation> out;
  for (const auto &a : anns) out[a.recording_id] = a;
  return out;
}

EmbeddingStream LoadStream(const InputFile &in, bool length_norm) {
  EmbeddingStream s = DecodeEmbeddings(ReadFile(in.path), in.recording_id);
  if (length_norm)
    for (auto &e : s.items) e.vector = LengthNorm(e.vector);
  return s;
}

std::map<std::string, EmbeddingStream> LoadStreams(const std::vector<std::string> &paths,
                                                   bool length_norm) {
  std::map<std::string, EmbeddingStream> out;
  for (const auto &in : CollectInputs(paths, {InputKind::kEmbeddings}))
    out[in.recording_id] = LoadStream(in, length_norm);
  return out;
}

std::map<std::string, FeatureMatrix> LoadFeatureArchives(const std::vector<std::string> &paths) {
  std::map<std::string, FeatureMatrix> out;
  for (const auto &in : CollectInputs(paths, {InputKind::kFeatures}))
    out[in.recording_id] = DecodeFeatures(ReadFile(in.path));
  return out;
}

std::map<std::string, Eigen::VectorXd> LoadVectors(const std::string &path, bool length_norm) {
  auto vectors = ParseVectors(ReadFile(path));
  if (length_norm)
    for (auto &kv : vectors) kv.second = LengthNorm(kv.second);
  return vectors;
}

Eigen::MatrixXd Stack(const std::vector<Eigen::VectorXd> &rows) {
  if (rows.empty()) Fail(ErrorCode::kInsufficientData, "no training vectors");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols())
      Fail(ErrorCode::kDimensionMismatch, "training vectors differ in dimension");
    m.row(i) = rows[i].transpose();
  }
  return m;
}

// Windows overlapping exactly one reference speaker, who covers at least
// half of the window.
void SingleSpeakerWindows(const EmbeddingStream &stream, const Annotation &ref,
                          std::vector<Eigen::VectorXd> *rows,
                          std::vector<std::string> *speakers) {
  for (const auto &e : stream.items) {
    std::map<std::string, double> cover;
    for (const auto &r : ref.entries) {
      const double d = OverlapDuration(r.segment, e.window);
      if (d > 0.0) cover[r.speaker] += d;
    }
    if (cover.size() != 1 || cover.begin()->second < 0.5 * e.window.duration) continue;
    rows->push_back(e.vector);
    speakers->push_back(cover.begin()->first);
  }
}

std::vector<int> ParseIntList(const std::string &text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception &) {
      Fail(ErrorCode::kInvalidArgument, "bad integer list entry \"" + item + "\"");
    }
  }
  if (out.empty()) Fail(ErrorCode::kInvalidArgument, "empty integer list");
  return out;
}

std::vector<std::string> ParseNameList(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void RequirePath(const std::string &path, const std::string &what) {
  if (path.empty()) Fail(ErrorCode::kMissingPath, what + " is not set");
  if (!fs::exists(path)) Fail(ErrorCode::kMissingPath, what + ": " + path);
}

void RequireValue(const std::string &value, const std::string &what) {
  if (value.empty()) Fail(ErrorCode::kMissingPath, what + " is not set");
}

RecordingMeta MetaFor(const RecordingMetaMap &meta, const std::string &recording_id) {
  auto it = meta.find(recording_id);
  if (it != meta.end()) return it->second;
  return RecordingMeta{recording_id, recording_id, ""};
}

// ---------------------------------------------------------------- diarize

struct DiarizeArgs {
  std::string config;
  std::string model;
  std::string whitener;
  std::vector<std::string> inputs;
  std::string output;
  std::string posteriors;
  std::string vad_rttm;
  std::string overlap_rttm;
  std::optional<double> threshold;
  bool no_vb = false;
  bool no_overlap = false;
};

void RunDiarize(const DiarizeArgs &args, const Globals &g) {
  PipelineConfig pc;
  if (!args.config.empty()) pc = LoadConfig(args.config, false);
  if (!args.model.empty()) pc.plda_model = args.model;
  if (!args.whitener.empty()) pc.whitener = args.whitener;
  if (!args.output.empty()) pc.output = args.output;
  if (args.threshold) pc.diarizer.ahc_threshold = *args.threshold;
  if (args.no_vb) pc.diarizer.vb_reseg = false;
  if (args.no_overlap) pc.diarizer.overlap_assign = false;
  std::vector<std::string> inputs = args.inputs;
  if (inputs.empty() && !pc.input.empty()) inputs.push_back(pc.input);
  RequirePath(pc.plda_model, "plda.model (--model)");
  if (!pc.whitener.empty()) RequirePath(pc.whitener, "extractor.whitener (--whitener)");
  if (inputs.empty()) Fail(ErrorCode::kMissingPath, "paths.input (--input) is not set");
  if (g.verbose) std::cerr << DescribeConfig(pc);
  pc.diarizer.Validate();

  const PldaModel model = DecodePlda(ReadFile(pc.plda_model));
  model.Validate();
  const ReferenceExtractor extractor =
      pc.whitener.empty() ? ReferenceExtractor()
                          : ReferenceExtractor(DecodeWhitener(ReadFile(pc.whitener)));
  std::map<std::string, Annotation> vad_refs, overlap_refs;
  if (!args.vad_rttm.empty()) vad_refs = ByRecording(LoadRttm(args.vad_rttm));
  if (!args.overlap_rttm.empty()) overlap_refs = ByRecording(LoadRttm(args.overlap_rttm));
  const std::vector<InputFile> files = CollectInputs(
      inputs, {InputKind::kFeatures, InputKind::kWave, InputKind::kEmbeddings});

  std::vector<DiarizationResult> results(files.size());
  {
    StageTimer timer("diarize (" + std::to_string(files.size()) + " recordings)");
    ParallelFor(static_cast<int>(files.size()), g.jobs, [&](int i) {
      const InputFile &in = files[i];
      std::optional<Timeline> speech, overlap;
      if (!args.vad_rttm.empty()) {
        auto it = vad_refs.find(in.recording_id);
        speech = it == vad_refs.end() ? Timeline{in.recording_id, {}}
                                      : Support(it->second.ToTimeline(), 0.0);
      }
      if (!args.overlap_rttm.empty()) {
        auto it = overlap_refs.find(in.recording_id);
        overlap = it == overlap_refs.end() ? Timeline{in.recording_id, {}}
                                           : OverlapRegions(it->second);
      }
      if (in.kind == InputKind::kEmbeddings) {
        const EmbeddingStream stream = LoadStream(in, true);
        const double shift = pc.diarizer.frontend.frame_shift;
        double end = 0.0;
        for (const auto &e : stream.items) end = std::max(end, e.window.offset());
        const int n_frames = static_cast<int>(std::ceil(end / shift - 1e-9));
        VadMask vad(n_frames, false);
        if (speech) {
          vad = TimelineMask(*speech, n_frames, shift);
        } else {
          for (const auto &e : stream.items)
            for (int t = static_cast<int>(std::floor(e.window.onset / shift + 1e-9));
                 t < n_frames && (t + 0.5) * shift < e.window.offset(); ++t)
              vad[t] = true;
        }
        std::vector<bool> ovl(n_frames, false);
        if (overlap) ovl = TimelineMask(*overlap, n_frames, shift);
        for (int t = 0; t < n_frames; ++t) ovl[t] = ovl[t] && vad[t];
        results[i] = DiarizeStream(stream, vad, ovl, shift, model, pc.diarizer);
        return;
      }
      RecordingInput input{in.recording_id, std::nullopt, std::nullopt};
      if (in.kind == InputKind::kWave)
        input.waveform = ReadWavFile(in.path);
      else
        input.features = DecodeFeatures(ReadFile(in.path));
      EnergyVadProvider energy(pc.vad);
      std::optional<TimelineVadProvider> oracle_vad;
      std::optional<TimelineOverlapProvider> oracle_overlap;
      Providers p;
      p.vad = &energy;
      p.extractor = &extractor;
      if (speech) {
        oracle_vad.emplace(*speech);
        p.vad = &*oracle_vad;
      }
      if (overlap) {
        oracle_overlap.emplace(*overlap);
        p.overlap = &*oracle_overlap;
      }
      results[i] = Diarize(input, model, pc.diarizer, p);
    });
  }
  std::vector<Annotation> hyps;
  for (size_t i = 0; i < files.size(); ++i) {
    hyps.push_back(results[i].hypothesis);
    Log(LogLevel::kDebug, files[i].recording_id + ": " +
                              std::to_string(results[i].hypothesis.Speakers().size()) +
                              " speakers");
    if (!args.posteriors.empty()) {
      fs::create_directories(args.posteriors);
      WriteFile(args.posteriors + "/" + files[i].recording_id + ".post",
                EncodePosterior(results[i].posterior));
    }
  }
  WriteOutput(pc.output, EmitRttm(hyps));
}

// ------------------------------------------------------------- train-plda

struct TrainArgs {
  std::string vectors;
  std::string utt2spk;
  std::vector<std::string> embeddings;
  std::string ref;
  int n_iter = 10;
  bool no_length_norm = false;
  std::string output;
};

void RunTrainPlda(const TrainArgs &args, const Globals &) {
  RequireValue(args.output, "--output");
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::string> speakers;
  if (!args.vectors.empty()) {
    RequirePath(args.utt2spk, "--utt2spk");
    const auto vectors = LoadVectors(args.vectors, !args.no_length_norm);
    std::map<std::string, std::string> utt2spk;
    int line_no = 0;
    std::istringstream in(ReadFile(args.utt2spk));
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string utt, spk, extra;
      if (!(fields >> utt)) continue;
      if (!(fields >> spk) || (fields >> extra))
        Fail(ErrorCode::kMalformedLine, "utt2spk line needs \"utterance speaker\"", line_no);
      utt2spk[utt] = spk;
    }
    for (const auto &[id, v] : vectors) {
      auto it = utt2spk.find(id);
      if (it == utt2spk.end()) {
        Log(LogLevel::kWarn, "no speaker for vector " + id + "; skipped");
        continue;
      }
      rows.push_back(v);
      speakers.push_back(it->second);
    }
  } else {
    if (args.embeddings.empty())
      Fail(ErrorCode::kMissingPath, "need --vectors/--utt2spk or --embeddings/--ref");
    RequirePath(args.ref, "--ref");
    const auto refs = ByRecording(LoadRttm(args.ref));
    for (const auto &[id, stream] : LoadStreams(args.embeddings, !args.no_length_norm)) {
      auto it = refs.find(id);
      if (it == refs.end()) {
        Log(LogLevel::kWarn, "no reference for " + id + "; skipped");
        continue;
      }
      SingleSpeakerWindows(stream, it->second, &rows, &speakers);
    }
  }
  std::map<std::string, int> index;
  for (const auto &s : speakers) index.emplace(s, 0);
  int next = 0;
  for (auto &kv : index) kv.second = next++;
  std::vector<int> labels;
  for (const auto &s : speakers) labels.push_back(index[s]);

  StageTimer timer("train-plda");
  auto [model, report] = TrainPlda(Stack(rows), labels, args.n_iter);
  for (const auto &w : report.warnings) Log(LogLevel::kWarn, w);
  for (size_t i = 0; i < report.log_likelihood.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "iteration %zu log-likelihood %.6f", i,
                  report.log_likelihood[i]);
    Log(LogLevel::kDebug, buf);
  }
  Log(LogLevel::kInfo, "trained on " + std::to_string(rows.size()) + " vectors of " +
                           std::to_string(index.size()) + " speakers");
  WriteFile(args.output, EncodePlda(model));
}

// ------------------------------------------------------------- adapt-plda

struct AdaptArgs {
  std::string model;
  std::string vectors;
  std::vector<std::string> embeddings;
  double alpha = 0.5;
  bool no_length_norm = false;
  std::string output;
};

void RunAdaptPlda(const AdaptArgs &args, const Globals &) {
  RequirePath(args.model, "--model");
  RequireValue(args.output, "--output");
  std::vector<Eigen::VectorXd> rows;
  if (!args.vectors.empty()) {
    for (const auto &kv : LoadVectors(args.vectors, !args.no_length_norm))
      rows.push_back(kv.second);
  } else if (!args.embeddings.empty()) {
    for (const auto &kv : LoadStreams(args.embeddings, !args.no_length_norm))
      for (const auto &e : kv.second.items) rows.push_back(e.vector);
  } else {
    Fail(ErrorCode::kMissingPath, "need --vectors or --embeddings");
  }
  StageTimer timer("adapt-plda");
  const PldaModel model = DecodePlda(ReadFile(args.model));
  WriteFile(args.output, EncodePlda(AdaptPlda(model, Stack(rows), args.alpha)));
}

// ----------------------------------------------------------------- enroll

struct EnrollArgs {
  std::string ref;
  std::string meta;
  std::vector<std::string> embeddings;
  std::vector<std::string> features;
  std::string whitener;
  std::string durations = "5,15,30";
  std::string targets;
  std::string output_vectors;
  std::string output_meta;
};

void RunEnroll(const EnrollArgs &args, const Globals &) {
  RequirePath(args.ref, "--ref");
  RequireValue(args.output_vectors, "--output-vectors");
  RequireValue(args.output_meta, "--output-meta");
  const std::vector<Annotation> refs = LoadRttm(args.ref);
  RecordingMetaMap meta;
  if (!args.meta.empty()) meta = ParseRecordingMeta(ReadFile(args.meta));
  std::vector<std::string> targets = ParseNameList(args.targets);
  if (targets.empty()) {
    std::set<std::string> names;
    for (const auto &r : refs)
      for (const auto &e : r.entries) names.insert(e.speaker);
    targets.assign(names.begin(), names.end());
  }
  std::map<std::string, EmbeddingStream> streams;
  std::map<std::string, FeatureMatrix> features;
  std::optional<ReferenceExtractor> extractor;
  SpeechEmbedder embed;
  if (!args.embeddings.empty()) {
    streams = LoadStreams(args.embeddings, true);
    embed = StreamEmbedder(&streams);
  } else if (!args.features.empty()) {
    features = LoadFeatureArchives(args.features);
    extractor = args.whitener.empty()
                    ? ReferenceExtractor()
                    : ReferenceExtractor(DecodeWhitener(ReadFile(args.whitener)));
    embed = FeatureEmbedder(&features, &*extractor);
  } else {
    Fail(ErrorCode::kMissingPath, "need --embeddings or --features");
  }
  StageTimer timer("enroll");
  const EnrollmentReport report =
      BuildEnrollments(refs, targets, ParseIntList(args.durations), meta, embed);
  for (const auto &s : report.skipped) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", s.available_s);
    Log(LogLevel::kWarn, "speaker " + s.speaker_id + " has " + buf + " s for the " +
                             std::to_string(s.duration_class) + " s class; skipped");
  }
  std::map<std::string, Eigen::VectorXd> vectors;
  for (const auto &e : report.enrollments) vectors[e.enroll_id] = e.embedding;
  WriteFile(args.output_vectors, EmitVectors(vectors));
  WriteFile(args.output_meta, EmitEnrollmentMeta(report.enrollments));
}

// ------------------------------------------------------------------ chunk

struct ChunkArgs {
  std::string uem;
  std::string speech;
  std::string meta;
  double chunk_length = 60.0;
  std::string output;
};

void RunChunk(const ChunkArgs &args, const Globals &) {
  RequirePath(args.uem, "--uem");
  RequirePath(args.speech, "--speech");
  const UemMap uem = ParseUem(ReadFile(args.uem));
  const auto speech = ByRecording(LoadRttm(args.speech));
  RecordingMetaMap meta;
  if (!args.meta.empty()) meta = ParseRecordingMeta(ReadFile(args.meta));
  std::vector<TestChunk> chunks;
  for (const auto &[id, regions] : uem) {
    double end = 0.0;
    for (const auto &s : regions.segments) end = std::max(end, s.offset());
    auto it = speech.find(id);
    const Timeline sp = it == speech.end() ? Timeline{id, {}}
                                           : Support(it->second.ToTimeline(), 0.0);
    for (auto &c : ChunkTests(id, end, sp, MetaFor(meta, id), args.chunk_length))
      chunks.push_back(std::move(c));
  }
  WriteOutput(args.output, EmitChunks(chunks));
}

// ------------------------------------------------------------ make-trials

struct TrialsArgs {
  std::string enroll_meta;
  std::string chunks;
  std::string ref;
  double min_speech = 5.0;
  std::string output;
};

void RunMakeTrials(const TrialsArgs &args, const Globals &) {
  RequirePath(args.enroll_meta, "--enroll-meta");
  RequirePath(args.chunks, "--chunks");
  RequirePath(args.ref, "--ref");
  const auto trials = MakeTrials(ParseEnrollmentMeta(ReadFile(args.enroll_meta)),
                                 ParseChunks(ReadFile(args.chunks)), LoadRttm(args.ref),
                                 TrialOptions{args.min_speech});
  WriteOutput(args.output, EmitTrials(trials));
}

// ----------------------------------------------------------- score-trials

struct ScoreArgs {
  std::string model;
  std::string enroll_vectors;
  std::string enroll_meta;
  std::string chunks;
  std::vector<std::string> embeddings;
  std::string trials;
  std::string mode = "diarized";
  double threshold = 0.0;
  std::string output;
};

void RunScoreTrials(const ScoreArgs &args, const Globals &) {
  RequirePath(args.model, "--model");
  RequirePath(args.enroll_vectors, "--enroll-vectors");
  RequirePath(args.enroll_meta, "--enroll-meta");
  RequirePath(args.chunks, "--chunks");
  RequirePath(args.trials, "--trials");
  if (args.embeddings.empty()) Fail(ErrorCode::kMissingPath, "--embeddings is not set");
  const ScoringMode mode = ParseScoringMode(args.mode);
  const PldaModel model = DecodePlda(ReadFile(args.model));
  model.Validate();
  const auto vectors = ParseVectors(ReadFile(args.enroll_vectors));
  std::vector<Enrollment> enrollments = ParseEnrollmentMeta(ReadFile(args.enroll_meta));
  for (auto &e : enrollments) {
    auto it = vectors.find(e.enroll_id);
    if (it == vectors.end())
      Fail(ErrorCode::kMalformedLine, "no vector for enrollment " + e.enroll_id);
    e.embedding = it->second;
  }
  const auto streams = LoadStreams(args.embeddings, true);
  std::map<std::string, ChunkEmbeddings> chunk_embeddings;
  {
    StageTimer timer(std::string("chunk embeddings (") + ScoringModeName(mode) + ")");
    for (const auto &c : ParseChunks(ReadFile(args.chunks))) {
      auto it = streams.find(c.recording_id);
      if (it == streams.end()) Fail(ErrorCode::kUnknownRecording, c.recording_id);
      chunk_embeddings[c.chunk_id] = ChunkEmbeddingsFor(
          mode, c.chunk_id, it->second.Slice(c.window), model, args.threshold);
    }
  }
  StageTimer timer("score-trials");
  const auto scores =
      ScoreTrials(model, enrollments, chunk_embeddings, ParseTrials(ReadFile(args.trials)));
  WriteOutput(args.output, EmitScores(scores));
}

// -------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string scores;
  std::string trials;
  std::string apply;
  double p_target = 0.05;
  std::string output;
};

std::vector<ScoredTrial> KeyedScores(const std::string &scores, const std::string &trials) {
  RequirePath(scores, "--scores");
  RequirePath(trials, "--trials");
  std::vector<ScoredTrial> out = ParseScores(ReadFile(scores));
  ApplyKeys(ParseTrials(ReadFile(trials)), &out);
  return out;
}

void RunCalibrate(const CalibrateArgs &args, const Globals &) {
  if (!args.apply.empty()) {
    RequirePath(args.apply, "--apply");
    RequirePath(args.scores, "--scores");
    const Calibration cal = ParseCalibration(ReadFile(args.apply));
    std::vector<ScoredTrial> scores = ParseScores(ReadFile(args.scores));
    for (auto &s : scores) s.score = cal.Apply(s.score);
    WriteOutput(args.output, EmitScores(scores));
    return;
  }
  std::vector<double> tar, non;
  SplitByKey(KeyedScores(args.scores, args.trials), &tar, &non);
  CalibrationOptions opts;
  opts.effective_prior = args.p_target;
  const Calibration cal = Calibrate(tar, non, opts);
  WriteOutput(args.output, EmitCalibration(cal));
}

// ---------------------------------------------------------------- eval-der

struct EvalDerArgs {
  std::string ref;
  std::string hyp;
  std::string uem;
  double collar = 0.0;
  bool skip_overlap = false;
  bool per_file = false;
  bool key_values = false;
};

void RunEvalDer(const EvalDerArgs &args, const Globals &) {
  RequirePath(args.ref, "--ref");
  RequirePath(args.hyp, "--hyp");
  const std::vector<Annotation> refs = LoadRttm(args.ref);
  const std::vector<Annotation> hyps = LoadRttm(args.hyp);
  UemMap uem;
  if (!args.uem.empty()) {
    RequirePath(args.uem, "--uem");
    uem = ParseUem(ReadFile(args.uem));
  }
  DerOptions opts;
  opts.collar = args.collar;
  opts.score_overlap = !args.skip_overlap;
  StageTimer timer("eval-der");
  std::vector<DerRow> rows;
  if (args.per_file) {
    const auto hyp_by = ByRecording(hyps);
    for (const auto &r : refs) {
      auto it = hyp_by.find(r.recording_id);
      const Annotation h = it == hyp_by.end() ? Annotation{r.recording_id, {}} : it->second;
      rows.push_back(DerRow{r.recording_id, DerComponents(r, h, uem, opts)});
    }
  }
  rows.push_back(DerRow{"Overall", Der(refs, hyps, uem, opts)});
  std::cout << (args.key_values ? FormatDerKeyValues(rows) : FormatDerTable(rows, opts));
}

// ---------------------------------------------------------------- eval-det

struct EvalDetArgs {
  std::string scores;
  std::string trials;
  std::string name = "System";
  DcfParams dcf;
  bool key_values = false;
};

void RunEvalDet(const EvalDetArgs &args, const Globals &) {
  args.dcf.Validate();
  std::vector<double> tar, non;
  SplitByKey(KeyedScores(args.scores, args.trials), &tar, &non);
  const std::vector<DetRow> rows{DetRow{args.name, EvaluateDetection(tar, non, args.dcf)}};
  std::cout << (args.key_values ? FormatDetKeyValues(rows) : FormatDetTable(rows, args.dcf));
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string preset = "default";
  std::string output;
  std::optional<int> n_recordings;
  std::optional<int> n_speakers;
  std::optional<int> speaker_pool;
  std::optional<double> duration;
  std::optional<double> noise_sigma;
  std::optional<double> overlap_prob;
  std::optional<double> silence_prob;
  std::optional<std::string> emit;
};

void RunSimulate(const SimulateArgs &args, const Globals &g) {
  RequireValue(args.output, "--output");
  SimConfig cfg;
  if (args.preset == "ablation") {
    cfg = AblationCorpusConfig(g.seed);
  } else if (args.preset == "detection") {
    cfg = DetectionCorpusConfig(g.seed);
  } else if (args.preset != "default") {
    Fail(ErrorCode::kInvalidArgument, "unknown preset " + args.preset);
  }
  cfg.seed = g.seed;
  if (args.n_recordings) cfg.n_recordings = *args.n_recordings;
  if (args.n_speakers) cfg.n_speakers = *args.n_speakers;
  if (args.speaker_pool) cfg.speaker_pool = *args.speaker_pool;
  if (args.duration) cfg.duration = *args.duration;
  if (args.noise_sigma) cfg.noise_sigma = *args.noise_sigma;
  if (args.overlap_prob) cfg.overlap_prob = *args.overlap_prob;
  if (args.silence_prob) cfg.silence_prob = *args.silence_prob;
  if (args.emit) cfg.emit = ParseEmitKind(*args.emit);
  SynthCorpus corpus;
  {
    StageTimer timer("simulate");
    corpus = GenCorpus(cfg);
  }
  StageTimer timer("write corpus");
  WriteCorpus(corpus, args.output);
}

// ------------------------------------------------------------------ ablate

struct AblateArgs {
  int seeds = 1;
  bool no_der = false;
  bool detection = false;
  bool calibrate = false;
  bool key_values = false;
};

void RunAblate(const AblateArgs &args, const Globals &g) {
  if (args.seeds < 1) Fail(ErrorCode::kOutOfRange, "--seeds must be positive");
  const DiarizerConfig dcfg = HarnessDiarizerConfig();
  std::vector<AblationResult> der(args.seeds), det(args.seeds);
  {
    StageTimer timer("ablate (" + std::to_string(args.seeds) + " seeds)");
    ParallelFor(args.seeds, g.jobs, [&](int i) {
      const std::uint64_t seed = g.seed + static_cast<std::uint64_t>(i);
      if (!args.no_der) der[i] = RunAblation(GenCorpus(AblationCorpusConfig(seed)),
                                             AblationSpec{}, dcfg);
      if (args.detection) {
        AblationSpec spec;
        spec.stages.clear();
        spec.detection = true;
        spec.calibrate = args.calibrate;
        det[i] = RunAblation(GenCorpus(DetectionCorpusConfig(seed)), spec, dcfg);
      }
    });
  }
  AblationResult total;
  for (int i = 0; i < args.seeds; ++i) {
    for (size_t r = 0; r < der[i].der_rows.size(); ++r) {
      if (total.der_rows.size() <= r) total.der_rows.push_back({der[i].der_rows[r].name, {}});
      total.der_rows[r].der += der[i].der_rows[r].der;
    }
    for (size_t r = 0; r < det[i].det_rows.size(); ++r) {
      if (total.det_rows.size() <= r) total.det_rows.push_back({det[i].det_rows[r].name, {}});
      DetMetrics &m = total.det_rows[r].det;
      m.eer += det[i].det_rows[r].det.eer / args.seeds;
      m.min_dcf += det[i].det_rows[r].det.min_dcf / args.seeds;
      m.act_dcf += det[i].det_rows[r].det.act_dcf / args.seeds;
    }
  }
  if (args.key_values) {
    std::cout << FormatDerKeyValues(total.der_rows) << FormatDetKeyValues(total.det_rows);
  } else {
    std::cout << total.Table();
  }
}

template <class Args>
std::function<void()> Bind(void (*fn)(const Args &, const Globals &), const Args &args,
                           const Globals &g) {
  return [fn, &args, &g] { fn(args, g); };
}

}  // namespace

int Run(int argc, char **argv) {
  CLI::App app{"diadet: speaker diarization and speaker detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->default_val(0);
  app.add_option("--jobs,-j", g.jobs, "Recordings processed in parallel")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", g.verbose, "Print the effective configuration");

  std::map<std::string, std::function<void()>> runners;

  DiarizeArgs da;
  auto *diarize = app.add_subcommand("diarize", "Diarize feature, wave or embedding archives");
  diarize->add_option("--config", da.config, "Pipeline configuration file");
  diarize->add_option("--model", da.model, "PLDA model archive");
  diarize->add_option("--whitener", da.whitener, "Whitener archive for the extractor");
  diarize->add_option("--input,input", da.inputs, "Archives or directories of archives");
  diarize->add_option("--output,-o", da.output, "Output RTTM (default stdout)");
  diarize->add_option("--posteriors", da.posteriors, "Directory for frame posteriors");
  diarize->add_option("--vad-rttm", da.vad_rttm, "Use the speech of this RTTM as VAD");
  diarize->add_option("--overlap-rttm", da.overlap_rttm,
                      "Use the overlap regions of this RTTM as overlap detector");
  diarize->add_option("--threshold", da.threshold, "AHC stopping threshold");
  diarize->add_flag("--no-vb", da.no_vb, "Skip VB resegmentation");
  diarize->add_flag("--no-overlap-assign", da.no_overlap, "Skip overlap assignment");
  runners["diarize"] = Bind(&RunDiarize, da, g);

  TrainArgs ta;
  auto *train = app.add_subcommand("train-plda", "Train a two-covariance PLDA model");
  train->add_option("--vectors", ta.vectors, "Text vectors \"id v1 v2 ...\"");
  train->add_option("--utt2spk", ta.utt2spk, "Map \"id speaker\" for --vectors");
  train->add_option("--embeddings", ta.embeddings, "Embedding archives or directories");
  train->add_option("--ref", ta.ref, "Reference RTTM labelling --embeddings windows");
  train->add_option("--n-iter", ta.n_iter, "EM iterations")->default_val(10);
  train->add_flag("--no-length-norm", ta.no_length_norm, "Keep raw vector lengths");
  train->add_option("--output,-o", ta.output, "Output model archive");
  runners["train-plda"] = Bind(&RunTrainPlda, ta, g);

  AdaptArgs aa;
  auto *adapt = app.add_subcommand("adapt-plda", "Adapt a PLDA model to in-domain data");
  adapt->add_option("--model", aa.model, "Out-of-domain model archive");
  adapt->add_option("--vectors", aa.vectors, "In-domain text vectors");
  adapt->add_option("--embeddings", aa.embeddings, "In-domain embedding archives");
  adapt->add_option("--alpha", aa.alpha, "Interpolation weight of the in-domain data")
      ->default_val(0.5);
  adapt->add_flag("--no-length-norm", aa.no_length_norm, "Keep raw vector lengths");
  adapt->add_option("--output,-o", aa.output, "Output model archive");
  runners["adapt-plda"] = Bind(&RunAdaptPlda, aa, g);

  EnrollArgs ea;
  auto *enroll = app.add_subcommand("enroll", "Build enrollment vectors from reference speech");
  enroll->add_option("--ref", ea.ref, "Reference RTTM");
  enroll->add_option("--meta", ea.meta, "Recording metadata \"recording session mic\"");
  enroll->add_option("--embeddings", ea.embeddings, "Embedding archives or directories");
  enroll->add_option("--features", ea.features, "Feature archives or directories");
  enroll->add_option("--whitener", ea.whitener, "Whitener for --features");
  enroll->add_option("--durations", ea.durations, "Enrollment duration classes (s)")
      ->default_val("5,15,30");
  enroll->add_option("--targets", ea.targets, "Comma-separated speakers (default all)");
  enroll->add_option("--output-vectors", ea.output_vectors, "Output text vectors");
  enroll->add_option("--output-meta", ea.output_meta, "Output enrollment list");
  runners["enroll"] = Bind(&RunEnroll, ea, g);

  ChunkArgs ca;
  auto *chunk = app.add_subcommand("chunk", "Cut recordings into test chunks");
  chunk->add_option("--uem", ca.uem, "Recording extents");
  chunk->add_option("--speech", ca.speech, "RTTM whose union is the detected speech");
  chunk->add_option("--meta", ca.meta, "Recording metadata");
  chunk->add_option("--chunk-length", ca.chunk_length, "Chunk length (s)")->default_val(60.0);
  chunk->add_option("--output,-o", ca.output, "Output chunk list (default stdout)");
  runners["chunk"] = Bind(&RunChunk, ca, g);

  TrialsArgs tra;
  auto *trials = app.add_subcommand("make-trials", "Pair enrollments with test chunks");
  trials->add_option("--enroll-meta", tra.enroll_meta, "Enrollment list");
  trials->add_option("--chunks", tra.chunks, "Chunk list");
  trials->add_option("--ref", tra.ref, "Reference RTTM for the keys");
  trials->add_option("--min-speech", tra.min_speech, "Minimum chunk speech (s)")
      ->default_val(5.0);
  trials->add_option("--output,-o", tra.output, "Output trial list (default stdout)");
  runners["make-trials"] = Bind(&RunMakeTrials, tra, g);

  ScoreArgs sa;
  auto *score = app.add_subcommand("score-trials", "Score trials with PLDA");
  score->add_option("--model", sa.model, "PLDA model archive");
  score->add_option("--enroll-vectors", sa.enroll_vectors, "Enrollment text vectors");
  score->add_option("--enroll-meta", sa.enroll_meta, "Enrollment list");
  score->add_option("--chunks", sa.chunks, "Chunk list");
  score->add_option("--embeddings", sa.embeddings, "Embedding archives or directories");
  score->add_option("--trials", sa.trials, "Trial list");
  score->add_option("--mode", sa.mode, "diarized or sliding")->default_val("diarized");
  score->add_option("--threshold", sa.threshold, "AHC threshold of diarized mode")
      ->default_val(0.0);
  score->add_option("--output,-o", sa.output, "Output scores (default stdout)");
  runners["score-trials"] = Bind(&RunScoreTrials, sa, g);

  CalibrateArgs cla;
  auto *calibrate = app.add_subcommand("calibrate", "Fit or apply affine score calibration");
  calibrate->add_option("--scores", cla.scores, "Score file");
  calibrate->add_option("--trials", cla.trials, "Keyed trial list");
  calibrate->add_option("--apply", cla.apply, "Calibration to apply to --scores");
  calibrate->add_option("--p-target", cla.p_target, "Effective target prior")
      ->default_val(0.05);
  calibrate->add_option("--output,-o", cla.output, "Output (default stdout)");
  runners["calibrate"] = Bind(&RunCalibrate, cla, g);

  EvalDerArgs dera;
  auto *eval_der = app.add_subcommand("eval-der", "Diarization error rate");
  eval_der->add_option("--ref", dera.ref, "Reference RTTM");
  eval_der->add_option("--hyp", dera.hyp, "Hypothesis RTTM");
  eval_der->add_option("--uem", dera.uem, "Scored regions");
  eval_der->add_option("--collar", dera.collar, "Forgiveness collar (s)")->default_val(0.0);
  eval_der->add_flag("--skip-overlap", dera.skip_overlap, "Do not score overlapped speech");
  eval_der->add_flag("--per-file", dera.per_file, "One row per recording");
  eval_der->add_flag("--kv", dera.key_values, "key=value output");
  runners["eval-der"] = Bind(&RunEvalDer, dera, g);

  EvalDetArgs deta;
  auto *eval_det = app.add_subcommand("eval-det", "EER, minDCF and actDCF of a score file");
  eval_det->add_option("--scores", deta.scores, "Score file");
  eval_det->add_option("--trials", deta.trials, "Keyed trial list");
  eval_det->add_option("--name", deta.name, "Row label")->default_val("System");
  eval_det->add_option("--p-target", deta.dcf.p_target, "Target prior")->default_val(0.05);
  eval_det->add_option("--c-miss", deta.dcf.c_miss, "Miss cost")->default_val(1.0);
  eval_det->add_option("--c-fa", deta.dcf.c_fa, "False alarm cost")->default_val(1.0);
  eval_det->add_flag("--kv", deta.key_values, "key=value output");
  runners["eval-det"] = Bind(&RunEvalDet, deta, g);

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Write a synthetic corpus");
  simulate->add_option("--output,-o", sim.output, "Output directory");
  simulate->add_option("--preset", sim.preset, "default, ablation or detection")
      ->default_val("default");
  simulate->add_option("--n-recordings", sim.n_recordings, "Recordings");
  simulate->add_option("--n-speakers", sim.n_speakers, "Speakers per recording");
  simulate->add_option("--speaker-pool", sim.speaker_pool, "Shared speaker pool (0: fresh)");
  simulate->add_option("--duration", sim.duration, "Recording length (s)");
  simulate->add_option("--noise-sigma", sim.noise_sigma, "Additive noise std");
  simulate->add_option("--overlap-prob", sim.overlap_prob, "Overlap probability");
  simulate->add_option("--silence-prob", sim.silence_prob, "Pause probability");
  simulate->add_option("--emit", sim.emit, "embeddings, features or both");
  runners["simulate"] = Bind(&RunSimulate, sim, g);

  AblateArgs aba;
  auto *ablate = app.add_subcommand("ablate", "Cumulative-stage DER and detection tables");
  ablate->add_option("--seeds", aba.seeds, "Corpora, seeded --seed, --seed + 1, ...")
      ->default_val(1);
  ablate->add_flag("--no-der", aba.no_der, "Skip the DER rows");
  ablate->add_flag("--detection", aba.detection, "Add diarized and sliding detection rows");
  ablate->add_flag("--calibrate", aba.calibrate, "Add a calibrated detection row");
  ablate->add_flag("--kv", aba.key_values, "key=value output");
  runners["ablate"] = Bind(&RunAblate, aba, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  const CLI::App *command = app.get_subcommands().front();
  try {
    runners.at(command->get_name())();
  } catch (const Error &e) {
    std::cerr << "diadet " << command->get_name() << ": " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << "\n";
    const ExitStatus status = ExitStatusFor(e.code());
    if (status == kExitUsage)
      std::cerr << "Run 'diadet " << command->get_name() << " --help' for usage.\n";
    return status;
  } catch (const std::exception &e) {
    std::cerr << "diadet " << command->get_name() << ": " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace cli
}  // namespace diadet
