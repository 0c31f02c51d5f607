// core/src/harness.cpp

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

#include "diadet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "diadet/archive.hpp"
#include "diadet/calibration.hpp"
#include "diadet/error.hpp"

namespace diadet {

namespace {

constexpr std::uint64_t kPlantedTag = 0x706c616e74656400ULL;
constexpr std::uint64_t kSpeakerTag = 0x7370656b72000000ULL;
constexpr std::uint64_t kFeatureTrainTag = 0x7472616e66656174ULL;
constexpr std::uint64_t kEmbedTrainTag = 0x7472616e656d6264ULL;
constexpr std::uint64_t kCalibrationTag = 0x63616c6962726174ULL;
constexpr std::uint64_t kDevTag = 0x6465767365740000ULL;

std::uint64_t Mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Normal() { return normal_(engine_); }
  double Uniform() { return uniform_(engine_); }
  double Exponential(double mean) { return -mean * std::log1p(-Uniform()); }
  int Index(int n) { return std::min(n - 1, static_cast<int>(Uniform() * n)); }
  Eigen::VectorXd Normal(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = Normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

Eigen::MatrixXd RandomRotation(Rng &rng, int n) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.Normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

// Eigenvalues spaced geometrically from hi to lo.
Eigen::MatrixXd PlantedCovariance(Rng &rng, int n, double hi, double lo) {
  Eigen::VectorXd eig(n);
  for (int i = 0; i < n; ++i)
    eig(i) = n == 1 ? hi : hi * std::pow(lo / hi, static_cast<double>(i) / (n - 1));
  Eigen::MatrixXd q = RandomRotation(rng, n);
  Eigen::MatrixXd c = q * eig.asDiagonal() * q.transpose();
  return 0.5 * (c + c.transpose());
}

struct PoolSpeaker {
  Eigen::VectorXd y;         // embedding-path offset
  Eigen::VectorXd mean;      // feature-path means, dims 1..
  Eigen::VectorXd log_std;
  double energy = 0.0;
};

PoolSpeaker MakeSpeaker(const SimConfig &cfg, const Eigen::MatrixXd &b_chol, int index) {
  Rng rng(Mix(cfg.seed ^ kSpeakerTag, static_cast<std::uint64_t>(index)));
  PoolSpeaker s;
  s.y = b_chol * rng.Normal(cfg.embedding_dim);
  s.mean = cfg.speaker_spread * rng.Normal(cfg.feature_dim - 1);
  s.log_std = cfg.log_std_spread * rng.Normal(cfg.feature_dim - 1);
  s.energy = 0.3 * rng.Normal();
  return s;
}

std::string SpeakerName(int pool_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "spk%03d", pool_index);
  return buf;
}

struct Turn {
  int speaker;  // local index
  int onset;    // frames
  int offset;
};

std::vector<Turn> SampleTurns(const SimConfig &cfg, Rng &rng, int n_frames) {
  const int n = cfg.n_speakers;
  auto frames = [&](double seconds) {
    return static_cast<int>(std::lround(seconds / cfg.frame_shift));
  };
  auto draw_len = [&] {
    return std::max(frames(cfg.min_turn), frames(rng.Exponential(cfg.turn_mean)));
  };
  std::vector<Turn> turns;
  int cur = rng.Index(n);
  int on = 0;
  int len = draw_len();
  while (on < n_frames) {
    const int off = std::min(on + len, n_frames);
    turns.push_back(Turn{cur, on, off});
    if (off >= n_frames) break;
    const int next = n > 1 ? (cur + 1 + rng.Index(n - 1)) % n : cur;
    const int next_len = draw_len();
    int next_on = off;
    if (rng.Uniform() < cfg.silence_prob) {
      next_on = off + std::max(1, frames(rng.Exponential(cfg.silence_mean)));
    } else if (n > 1 && rng.Uniform() < cfg.overlap_prob) {
      const int ov = std::min({frames(rng.Exponential(cfg.overlap_mean)), len / 2, next_len / 2});
      if (ov >= 1) next_on = off - ov;
    }
    cur = next;
    on = next_on;
    len = next_len;
  }
  return turns;
}

SynthRecording MakeRecording(const SimConfig &cfg, const PldaModel &planted,
                             const std::vector<PoolSpeaker> &pool, int index) {
  Rng rng(Mix(cfg.seed, static_cast<std::uint64_t>(index)));
  SynthRecording rec;
  char id[32];
  std::snprintf(id, sizeof id, "rec%04d", index);
  rec.recording_id = id;
  rec.meta = RecordingMeta{rec.recording_id, "sess" + std::string(id + 3), "mic0"};
  rec.frame_shift = cfg.frame_shift;
  rec.n_frames = static_cast<int>(std::lround(cfg.duration / cfg.frame_shift));

  // Speakers of this recording.
  std::vector<int> members;
  const int pool_size = static_cast<int>(pool.size());
  if (cfg.speaker_pool <= 0) {
    for (int k = 0; k < cfg.n_speakers; ++k) members.push_back(index * cfg.n_speakers + k);
  } else {
    std::vector<int> all(pool_size);
    for (int k = 0; k < pool_size; ++k) all[k] = k;
    for (int k = 0; k < cfg.n_speakers; ++k) {
      std::swap(all[k], all[k + rng.Index(pool_size - k)]);
      members.push_back(all[k]);
    }
  }

  const std::vector<Turn> turns = SampleTurns(cfg, rng, rec.n_frames);
  rec.reference.recording_id = rec.recording_id;
  for (const auto &t : turns)
    rec.reference.entries.push_back(
        AnnotationEntry{Segment{t.onset * cfg.frame_shift, (t.offset - t.onset) * cfg.frame_shift},
                        SpeakerName(members[t.speaker])});
  rec.reference.Sort();
  rec.labels = Discretize(rec.reference, cfg.frame_shift, rec.n_frames);
  for (const auto &name : rec.labels.speakers) rec.speakers.push_back(std::stoi(name.substr(3)));
  const int n_cols = static_cast<int>(rec.speakers.size());

  if (cfg.emit != EmitKind::kEmbeddings) {
    const int d = cfg.feature_dim;
    rec.clean.values.resize(rec.n_frames, d);
    rec.clean.frame_shift = cfg.frame_shift;
    rec.clean.frame_length = 0.025;
    rec.clean.kind = FeatureKind::kMfcc;
    std::vector<int> active;
    for (int t = 0; t < rec.n_frames; ++t) {
      active.clear();
      for (int c = 0; c < n_cols; ++c)
        if (rec.labels.active(t, c)) active.push_back(c);
      auto row = rec.clean.values.row(t);
      if (active.empty()) {
        row(0) = cfg.silence_energy + 0.5 * rng.Normal();
        for (int k = 1; k < d; ++k) row(k) = rng.Normal();
        continue;
      }
      const int c = active.size() == 1 ? active[0] : active[rng.Index(active.size())];
      const PoolSpeaker &s = pool[rec.speakers[c]];
      row(0) = s.energy + 0.5 * rng.Normal();
      for (int k = 1; k < d; ++k) row(k) = s.mean(k - 1) + std::exp(s.log_std(k - 1)) * rng.Normal();
    }
    rec.noisy = rec.clean;
    if (cfg.noise_sigma > 0.0)
      for (int t = 0; t < rec.n_frames; ++t)
        for (int k = 0; k < d; ++k) rec.noisy.values(t, k) += cfg.noise_sigma * rng.Normal();
  }

  if (cfg.emit != EmitKind::kFeatures) {
    Eigen::LLT<Eigen::MatrixXd> w_chol(planted.within);
    const Eigen::MatrixXd lw = w_chol.matrixL();
    const int min_frames = std::max(
        2, static_cast<int>(std::lround(cfg.windows.min_speech_per_window / cfg.frame_shift)));
    rec.embeddings.recording_id = rec.noisy_embeddings.recording_id = rec.recording_id;
    for (auto [start, len] : WindowPositions(rec.n_frames, cfg.windows, cfg.frame_shift)) {
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_cols);
      int speech = 0;
      for (int t = start; t < start + len; ++t) {
        bool any = false;
        for (int c = 0; c < n_cols; ++c)
          if (rec.labels.active(t, c)) {
            counts(c) += 1.0;
            any = true;
          }
        speech += any;
      }
      if (speech < min_frames) continue;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(cfg.embedding_dim);
      int present = 0, who = -1;
      for (int c = 0; c < n_cols; ++c)
        if (counts(c) > 0.0) {
          y += counts(c) / counts.sum() * pool[rec.speakers[c]].y;
          ++present;
          who = rec.speakers[c];
        }
      Eigen::VectorXd e = planted.mu + y + lw * rng.Normal(cfg.embedding_dim);
      const Segment window{start * cfg.frame_shift, len * cfg.frame_shift};
      rec.embeddings.items.push_back(Embedding{e, window, rec.recording_id});
      Eigen::VectorXd noisy = e;
      if (cfg.noise_sigma > 0.0) noisy += cfg.noise_sigma * rng.Normal(cfg.embedding_dim);
      rec.noisy_embeddings.items.push_back(Embedding{noisy, window, rec.recording_id});
      rec.window_speaker.push_back(present == 1 ? who : -1);
    }
  }
  return rec;
}

// Drops rows whose label occurs once.
void KeepRepeatedLabels(std::vector<Eigen::VectorXd> *rows, std::vector<int> *labels) {
  std::map<int, int> count;
  for (int l : *labels) ++count[l];
  size_t k = 0;
  for (size_t i = 0; i < labels->size(); ++i)
    if (count[(*labels)[i]] >= 2) {
      (*rows)[k] = std::move((*rows)[i]);
      (*labels)[k] = (*labels)[i];
      ++k;
    }
  rows->resize(k);
  labels->resize(k);
}

}  // namespace

const char *EmitKindName(EmitKind kind) {
  switch (kind) {
    case EmitKind::kEmbeddings: return "embeddings";
    case EmitKind::kFeatures: return "features";
    case EmitKind::kBoth: return "both";
  }
  return "both";
}

EmitKind ParseEmitKind(const std::string &name) {
  if (name == "embeddings") return EmitKind::kEmbeddings;
  if (name == "features") return EmitKind::kFeatures;
  if (name == "both") return EmitKind::kBoth;
  Fail(ErrorCode::kConfigInvalid, "unknown emit kind " + name);
}

void SimConfig::Validate() const {
  auto bad = [](const std::string &what) { Fail(ErrorCode::kConfigInvalid, what); };
  if (n_speakers < 1) bad("n_speakers must be >= 1");
  if (n_recordings < 1) bad("n_recordings must be >= 1");
  if (speaker_pool != 0 && speaker_pool < n_speakers) bad("speaker_pool smaller than n_speakers");
  for (double p : {overlap_prob, silence_prob})
    if (!(p >= 0.0 && p <= 1.0)) bad("probabilities must lie in [0, 1]");
  for (double v : {duration, turn_mean, overlap_mean, silence_mean, frame_shift})
    if (!(v > 0.0)) bad("durations must be positive");
  if (!(min_turn >= 0.0)) bad("min_turn must be >= 0");
  if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
  if (embedding_dim < 1 || feature_dim < 2) bad("dimensions too small");
  if (!(between_scale > 0.0) || !(within_scale > 0.0)) bad("covariance scales must be positive");
  if (!(enhancer_prior > 0.0)) bad("enhancer_prior must be positive");
  if (duration < frame_shift) bad("duration shorter than one frame");
  windows.Validate();
}

std::vector<Annotation> SynthCorpus::References() const {
  std::vector<Annotation> out;
  for (const auto &r : recordings) out.push_back(r.reference);
  return out;
}

RecordingMetaMap SynthCorpus::Metadata() const {
  RecordingMetaMap out;
  for (const auto &r : recordings) out[r.recording_id] = r.meta;
  return out;
}

SynthCorpus GenCorpus(const SimConfig &cfg) {
  cfg.Validate();
  SynthCorpus corpus;
  corpus.config = cfg;
  Rng rng(Mix(cfg.seed ^ kPlantedTag, 0));
  const int e = cfg.embedding_dim;
  corpus.planted.mu = Eigen::VectorXd::Zero(e);
  corpus.planted.between = PlantedCovariance(rng, e, 2.0 * cfg.between_scale,
                                             0.25 * cfg.between_scale);
  corpus.planted.within = PlantedCovariance(rng, e, 1.5 * cfg.within_scale,
                                            0.5 * cfg.within_scale);
  Eigen::LLT<Eigen::MatrixXd> b_chol(corpus.planted.between);
  const Eigen::MatrixXd lb = b_chol.matrixL();
  const int pool_size =
      cfg.speaker_pool > 0 ? cfg.speaker_pool : cfg.n_speakers * cfg.n_recordings;
  std::vector<PoolSpeaker> pool;
  pool.reserve(pool_size);
  for (int p = 0; p < pool_size; ++p) pool.push_back(MakeSpeaker(cfg, lb, p));
  for (int r = 0; r < cfg.n_recordings; ++r)
    corpus.recordings.push_back(MakeRecording(cfg, corpus.planted, pool, r));
  return corpus;
}

void WriteCorpus(const SynthCorpus &corpus, const std::string &dir) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/";
  std::vector<Annotation> refs = corpus.References();
  UemMap uem;
  for (const auto &r : corpus.recordings) {
    WriteFile(base + r.recording_id + ".rttm", EmitRttm(r.reference));
    uem[r.recording_id] = Timeline{r.recording_id, {Segment{0.0, r.duration()}}};
    if (corpus.config.emit != EmitKind::kFeatures)
      WriteFile(base + r.recording_id + ".emb",
                EncodeEmbeddings(corpus.config.noise_sigma > 0.0 ? r.noisy_embeddings
                                                                 : r.embeddings));
    if (corpus.config.emit != EmitKind::kEmbeddings) {
      WriteFile(base + r.recording_id + ".feat", EncodeFeatures(r.noisy));
      if (corpus.config.noise_sigma > 0.0)
        WriteFile(base + r.recording_id + ".clean.feat", EncodeFeatures(r.clean));
    }
  }
  WriteFile(base + "all.rttm", EmitRttm(refs));
  WriteFile(base + "all.uem", EmitUem(uem));
  WriteFile(base + "metadata", EmitRecordingMeta(corpus.Metadata()));
  WriteFile(base + "planted.plda", EncodePlda(corpus.planted));
}

VadMask OracleVad(const SynthRecording &rec) {
  VadMask mask(rec.n_frames, false);
  for (int t = 0; t < rec.n_frames; ++t) mask[t] = rec.labels.active.row(t).sum() >= 1;
  return mask;
}

std::vector<bool> OracleOverlap(const SynthRecording &rec) {
  std::vector<bool> mask(rec.n_frames, false);
  for (int t = 0; t < rec.n_frames; ++t) mask[t] = rec.labels.active.row(t).sum() >= 2;
  return mask;
}

OracleEnhancer::OracleEnhancer(FeatureMatrix clean, double noise_sigma, double prior_sigma)
    : clean_(std::move(clean)),
      gain_(prior_sigma * prior_sigma /
            (prior_sigma * prior_sigma + noise_sigma * noise_sigma)) {}

FeatureMatrix OracleEnhancer::Enhance(const FeatureMatrix &feat) const {
  if (feat.frames() != clean_.frames() || feat.dims() != clean_.dims())
    Fail(ErrorCode::kDimensionMismatch, "enhancer input does not match its clean reference");
  if (gain_ == 1.0) return feat;
  FeatureMatrix out = feat;
  out.values = clean_.values + gain_ * (feat.values - clean_.values);
  return out;
}

VadMask MaskVadProvider::Detect(const FeatureMatrix &feat) const {
  if (static_cast<int>(mask_.size()) != feat.frames())
    Fail(ErrorCode::kLengthMismatch, "VAD mask is not aligned to features");
  return mask_;
}

std::vector<bool> MaskOverlapProvider::Detect(const FeatureMatrix &feat) const {
  if (static_cast<int>(mask_.size()) != feat.frames())
    Fail(ErrorCode::kLengthMismatch, "overlap mask is not aligned to features");
  return mask_;
}

SimConfig AblationCorpusConfig(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.noise_sigma = 3.0;
  cfg.emit = EmitKind::kFeatures;
  return cfg;
}

SimConfig DetectionCorpusConfig(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_recordings = 100;
  cfg.speaker_pool = 60;
  cfg.noise_sigma = 1.0;
  cfg.emit = EmitKind::kEmbeddings;
  return cfg;
}

DiarizerConfig HarnessDiarizerConfig() {
  DiarizerConfig cfg;
  cfg.frontend.norm_window = 1e4;  // recording-level mean removal
  cfg.ahc_threshold = 0.0;
  return cfg;
}

namespace {

double TuneThreshold(const SimConfig &cfg, bool enhanced, const DiarizerConfig &dcfg,
                     const Backend &backend) {
  SimConfig dc = cfg;
  dc.seed = Mix(cfg.seed ^ kDevTag, 0);
  dc.n_recordings = 6;
  dc.speaker_pool = 0;
  dc.emit = EmitKind::kFeatures;
  const SynthCorpus dev = GenCorpus(dc);

  static const double kGrid[] = {0,   -1,  1,   -2,   2,   -5,   5,    -10,  10,  -20,
                                 20,  -50, 50,  -100, 100, -200, -500, -1000};
  constexpr int kGridSize = sizeof(kGrid) / sizeof(kGrid[0]);
  DiarizerConfig cfg_dev = dcfg;
  cfg_dev.enhance = enhanced;
  cfg_dev.vb_reseg = false;
  cfg_dev.overlap_assign = false;
  std::vector<double> err(kGridSize, 0.0);
  for (const auto &rec : dev.recordings) {
    MaskVadProvider vad(OracleVad(rec));
    OracleEnhancer enhancer(rec.clean, dc.noise_sigma, dc.enhancer_prior);
    Providers p;
    p.vad = &vad;
    p.extractor = &backend.extractor;
    p.enhancer = &enhancer;
    const DiarizationResult base =
        Diarize(RecordingInput{rec.recording_id, std::nullopt, rec.noisy}, backend.plda,
                cfg_dev, p);
    UemMap uem;
    uem[rec.recording_id] = Timeline{rec.recording_id, {Segment{0.0, rec.duration()}}};
    for (int g = 0; g < kGridSize; ++g) {
      DiarizerConfig c = cfg_dev;
      c.ahc_threshold = kGrid[g];
      const DiarizationResult r =
          DiarizeStream(base.stream, base.vad, base.overlap, rec.frame_shift, backend.plda, c);
      const DerBreakdown d = DerComponents(rec.reference, r.hypothesis, uem, DerOptions{});
      err[g] += d.false_alarm_s + d.miss_s + d.confusion_s;
    }
  }
  int best = 0;
  for (int g = 1; g < kGridSize; ++g)
    if (err[g] < err[best]) best = g;
  return kGrid[best];
}

}  // namespace

Backend TrainFeatureBackend(const SimConfig &cfg, bool enhanced, const DiarizerConfig &dcfg) {
  SimConfig tc = cfg;
  tc.seed = Mix(cfg.seed ^ kFeatureTrainTag, 0);
  tc.n_recordings = 60;
  tc.n_speakers = 3;
  tc.duration = 40.0;
  tc.speaker_pool = 0;
  tc.emit = EmitKind::kFeatures;
  const SynthCorpus train = GenCorpus(tc);

  std::vector<Eigen::VectorXd> stats;
  std::vector<int> labels;
  const int min_frames = std::max(
      2, static_cast<int>(std::lround(dcfg.extractor.min_speech_per_window / tc.frame_shift)));
  for (const auto &rec : train.recordings) {
    FeatureMatrix feat = rec.noisy;
    if (enhanced) feat = OracleEnhancer(rec.clean, tc.noise_sigma, tc.enhancer_prior).Enhance(feat);
    if (dcfg.normalize) feat = SlidingCmn(feat, dcfg.frontend.norm_window);
    const int n_cols = static_cast<int>(rec.speakers.size());
    for (auto [start, len] : WindowPositions(rec.n_frames, dcfg.extractor, tc.frame_shift)) {
      std::vector<int> rows;
      std::set<int> who;
      for (int t = start; t < start + len; ++t) {
        bool any = false;
        for (int c = 0; c < n_cols; ++c)
          if (rec.labels.active(t, c)) {
            who.insert(c);
            any = true;
          }
        if (any) rows.push_back(t);
      }
      if (who.size() != 1 || static_cast<int>(rows.size()) < min_frames) continue;
      Eigen::MatrixXd frames(rows.size(), feat.dims());
      for (size_t i = 0; i < rows.size(); ++i) frames.row(i) = feat.values.row(rows[i]);
      stats.push_back(ReferenceExtractor::Statistics(frames));
      labels.push_back(rec.speakers[*who.begin()]);
    }
  }
  KeepRepeatedLabels(&stats, &labels);
  Eigen::MatrixXd raw(stats.size(), stats.front().size());
  for (size_t i = 0; i < stats.size(); ++i) raw.row(i) = stats[i].transpose();
  Whitener whitener = TrainWhitener(raw);
  Eigen::MatrixXd emb(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    emb.row(i) = LengthNorm(whitener.Apply(raw.row(i).transpose())).transpose();
  Backend out{ReferenceExtractor(std::move(whitener)), {}};
  out.plda = TrainPlda(emb, labels, 20).first;
  out.ahc_threshold = TuneThreshold(cfg, enhanced, dcfg, out);
  return out;
}

PldaModel TrainEmbeddingBackend(const SimConfig &cfg) {
  SimConfig tc = cfg;
  tc.seed = Mix(cfg.seed ^ kEmbedTrainTag, 0);
  tc.n_recordings = 150;
  tc.n_speakers = 3;
  tc.duration = 60.0;
  tc.speaker_pool = 0;
  tc.emit = EmitKind::kEmbeddings;
  const SynthCorpus train = GenCorpus(tc);
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> labels;
  for (const auto &rec : train.recordings) {
    const EmbeddingStream &s = tc.noise_sigma > 0.0 ? rec.noisy_embeddings : rec.embeddings;
    for (int i = 0; i < s.size(); ++i) {
      if (rec.window_speaker[i] < 0) continue;
      rows.push_back(LengthNorm(s.items[i].vector));
      labels.push_back(rec.window_speaker[i]);
    }
  }
  KeepRepeatedLabels(&rows, &labels);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
  return TrainPlda(m, labels, 20).first;
}

const char *StageName(Stage stage) {
  switch (stage) {
    case Stage::kOracleVad: return "+ Oracle VAD";
    case Stage::kEnhance: return "+ Enhancement";
    case Stage::kVbReseg: return "+ VB reseg";
    case Stage::kOverlapAssign: return "+ Overlap assign";
  }
  return "";
}

std::string AblationResult::Table() const {
  std::string out;
  if (!der_rows.empty()) out += FormatDerTable(der_rows, der_options);
  if (!det_rows.empty()) {
    if (!out.empty()) out += "\n";
    out += FormatDetTable(det_rows, dcf);
  }
  return out;
}

namespace {

struct StageState {
  bool oracle_vad = false;
  bool enhance = false;
  bool vb = false;
  bool overlap = false;
};

DerBreakdown RunDerRow(const SynthCorpus &corpus, const StageState &st, const Backend &backend,
                       const DiarizerConfig &base) {
  DiarizerConfig cfg = base;
  cfg.ahc_threshold = backend.ahc_threshold;
  cfg.enhance = st.enhance;
  cfg.vb_reseg = st.vb;
  cfg.overlap_assign = st.overlap;
  DerBreakdown total;
  for (const auto &rec : corpus.recordings) {
    MaskVadProvider oracle_vad(OracleVad(rec));
    EnergyVadProvider energy_vad;
    MaskOverlapProvider overlap(OracleOverlap(rec));
    OracleEnhancer enhancer(rec.clean, corpus.config.noise_sigma, corpus.config.enhancer_prior);
    Providers p;
    p.vad = st.oracle_vad ? static_cast<const VadProvider *>(&oracle_vad) : &energy_vad;
    p.overlap = &overlap;
    p.extractor = &backend.extractor;
    p.enhancer = &enhancer;
    RecordingInput in{rec.recording_id, std::nullopt, rec.noisy};
    DiarizationResult res = Diarize(in, backend.plda, cfg, p);
    UemMap uem;
    uem[rec.recording_id] = Timeline{rec.recording_id, {Segment{0.0, rec.duration()}}};
    total += DerComponents(rec.reference, res.hypothesis, uem, DerOptions{});
  }
  return total;
}

}  // namespace

AblationResult RunAblation(const SynthCorpus &corpus, const AblationSpec &spec,
                           const DiarizerConfig &dcfg) {
  AblationResult out;
  if (corpus.config.emit != EmitKind::kEmbeddings) {
    const bool uses_enhance =
        std::find(spec.stages.begin(), spec.stages.end(), Stage::kEnhance) != spec.stages.end();
    std::optional<Backend> noisy_backend, enhanced_backend;
    noisy_backend = TrainFeatureBackend(corpus.config, false, dcfg);
    if (uses_enhance && corpus.config.noise_sigma > 0.0)
      enhanced_backend = TrainFeatureBackend(corpus.config, true, dcfg);
    StageState st;
    auto run = [&](const std::string &name) {
      const Backend &b = st.enhance && enhanced_backend ? *enhanced_backend : *noisy_backend;
      out.der_rows.push_back(DerRow{name, RunDerRow(corpus, st, b, dcfg)});
    };
    run("Baseline");
    for (Stage s : spec.stages) {
      switch (s) {
        case Stage::kOracleVad: st.oracle_vad = true; break;
        case Stage::kEnhance: st.enhance = true; break;
        case Stage::kVbReseg: st.vb = true; break;
        case Stage::kOverlapAssign: st.overlap = true; break;
      }
      run(StageName(s));
    }
  }
  if (spec.detection && corpus.config.emit != EmitKind::kFeatures) {
    const PldaModel model = TrainEmbeddingBackend(corpus.config);
    DetectionOutcome det = RunDetectionExperiment(corpus, model, {}, out.dcf);
    out.det_rows.push_back(DetRow{"Diarized", det.diarized_metrics});
    out.det_rows.push_back(DetRow{"Sliding", det.sliding_metrics});
    if (spec.calibrate) {
      SimConfig cc = corpus.config;
      cc.seed = Mix(corpus.config.seed ^ kCalibrationTag, 0);
      DetectionOutcome held = RunDetectionExperiment(GenCorpus(cc), model, {}, out.dcf);
      std::vector<double> tar, non;
      SplitByKey(held.diarized, &tar, &non);
      CalibrationOptions opts;
      opts.effective_prior = out.dcf.p_target;
      const Calibration cal = Calibrate(tar, non, opts);
      SplitByKey(det.diarized, &tar, &non);
      out.det_rows.push_back(DetRow{"Diarized + calibration",
                                    EvaluateDetection(cal.Apply(tar), cal.Apply(non), out.dcf)});
    }
  }
  return out;
}

DetectionOutcome RunDetectionExperiment(const SynthCorpus &corpus, const PldaModel &model,
                                        const DetectionExperimentConfig &cfg,
                                        const DcfParams &dcf) {
  if (corpus.config.emit == EmitKind::kFeatures)
    Fail(ErrorCode::kInvalidArgument, "detection experiment needs embeddings");
  std::map<std::string, EmbeddingStream> streams;
  for (const auto &rec : corpus.recordings) {
    EmbeddingStream s =
        corpus.config.noise_sigma > 0.0 ? rec.noisy_embeddings : rec.embeddings;
    for (auto &e : s.items) e.vector = LengthNorm(e.vector);
    streams[rec.recording_id] = std::move(s);
  }
  const std::vector<Annotation> refs = corpus.References();
  std::set<std::string> names;
  for (const auto &r : refs)
    for (const auto &e : r.entries) names.insert(e.speaker);
  const std::vector<std::string> targets(names.begin(), names.end());
  const EnrollmentReport enroll = BuildEnrollments(refs, targets, cfg.durations,
                                                   corpus.Metadata(), StreamEmbedder(&streams));

  std::vector<TestChunk> chunks;
  for (const auto &rec : corpus.recordings) {
    Timeline speech = MaskToTimeline(OracleVad(rec), rec.frame_shift, rec.recording_id);
    for (auto &c : ChunkTests(rec.recording_id, rec.duration(), speech, rec.meta,
                              cfg.chunk_length))
      chunks.push_back(std::move(c));
  }
  const std::vector<Trial> trials =
      MakeTrials(enroll.enrollments, chunks, refs, TrialOptions{cfg.min_speech});

  std::map<std::string, ChunkEmbeddings> diarized, sliding;
  for (const auto &c : chunks) {
    const EmbeddingStream slice = streams.at(c.recording_id).Slice(c.window);
    diarized[c.chunk_id] = ChunkEmbeddingsFor(ScoringMode::kDiarized, c.chunk_id, slice, model,
                                              cfg.ahc_threshold);
    sliding[c.chunk_id] = ChunkEmbeddingsFor(ScoringMode::kSliding, c.chunk_id, slice, model,
                                             cfg.ahc_threshold);
  }
  DetectionOutcome out;
  out.diarized = ScoreTrials(model, enroll.enrollments, diarized, trials);
  out.sliding = ScoreTrials(model, enroll.enrollments, sliding, trials);
  std::vector<double> tar, non;
  SplitByKey(out.diarized, &tar, &non);
  out.diarized_metrics = EvaluateDetection(tar, non, dcf);
  SplitByKey(out.sliding, &tar, &non);
  out.sliding_metrics = EvaluateDetection(tar, non, dcf);
  return out;
}

}  // namespace diadet
