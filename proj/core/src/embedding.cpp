// core/src/embedding.cpp

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

#include "diadet/embedding.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "diadet/error.hpp"
#include "diadet/linalg.hpp"

namespace diadet {

Eigen::MatrixXd EmbeddingStream::AsMatrix() const {
  Eigen::MatrixXd out(size(), dim());
  for (int i = 0; i < size(); ++i) out.row(i) = items[i].vector.transpose();
  return out;
}

EmbeddingStream EmbeddingStream::Slice(const Segment &window) const {
  EmbeddingStream out{recording_id, {}};
  for (const auto &e : items)
    if (window.Contains(e.window.midpoint())) out.items.push_back(e);
  return out;
}

void ExtractorConfig::Validate() const {
  if (!(window_shift > 0.0) || !(window_shift <= window_length))
    Fail(ErrorCode::kOutOfRange, "extractor: need 0 < window_shift <= window_length");
  if (min_speech_per_window < 0.0)
    Fail(ErrorCode::kOutOfRange, "extractor: min_speech_per_window >= 0");
}

Whitener TrainWhitener(const Eigen::MatrixXd &rows) {
  if (rows.rows() < 2)
    Fail(ErrorCode::kDegenerate, "whitener needs at least two samples");
  const int dim = static_cast<int>(rows.cols());
  linalg::Moments m = linalg::SampleMoments(rows);
  const double trace = m.cov.trace();
  if (!(trace > 0.0) || !std::isfinite(trace))
    Fail(ErrorCode::kDegenerate, "training vectors have zero variance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.cov);
  Eigen::VectorXd vals = eig.eigenvalues();
  const double ridge = 1e-6 * trace / dim;
  if (vals.minCoeff() < ridge) vals.array() += ridge;
  Whitener w;
  w.mean = m.mean;
  w.transform = eig.eigenvectors() * vals.cwiseInverse().cwiseSqrt().asDiagonal() *
                eig.eigenvectors().transpose();
  return w;
}

Eigen::VectorXd LengthNorm(const Eigen::VectorXd &v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    Fail(ErrorCode::kZeroVector, "cannot length-normalise a zero vector");
  return v * (std::sqrt(static_cast<double>(v.size())) / norm);
}

Eigen::VectorXd ReferenceExtractor::Statistics(const Eigen::MatrixXd &frames) {
  if (frames.rows() < 2)
    Fail(ErrorCode::kTooFewFrames,
         std::to_string(frames.rows()) + " frames (need at least 2)");
  const int d = static_cast<int>(frames.cols());
  Eigen::VectorXd stats(2 * d);
  Eigen::RowVectorXd mean = frames.colwise().mean();
  Eigen::RowVectorXd var =
      (frames.rowwise() - mean).array().square().colwise().mean();
  stats.head(d) = mean.transpose();
  stats.tail(d) = var.cwiseMax(0.0).cwiseSqrt().transpose();
  return stats;
}

Eigen::VectorXd ReferenceExtractor::Extract(const Eigen::MatrixXd &frames) const {
  Eigen::VectorXd stats = Statistics(frames);
  if (whitener_) {
    if (whitener_->dim() != stats.size())
      Fail(ErrorCode::kDimensionMismatch, "whitener dimension");
    stats = whitener_->Apply(stats);
  }
  return LengthNorm(stats);
}

std::vector<std::pair<int, int>> WindowPositions(int n_frames,
                                                 const ExtractorConfig &cfg,
                                                 double frame_shift) {
  cfg.Validate();
  const int len = std::max(1, static_cast<int>(std::lround(cfg.window_length / frame_shift)));
  const int shift = std::max(1, static_cast<int>(std::lround(cfg.window_shift / frame_shift)));
  std::vector<std::pair<int, int>> out;
  if (n_frames <= 0) return out;
  if (n_frames < len) {
    out.emplace_back(0, n_frames);
    return out;
  }
  for (int start = 0; start + len <= n_frames; start += shift)
    out.emplace_back(start, len);
  return out;
}

EmbeddingStream ExtractStream(const FeatureMatrix &feat, const VadMask &vad,
                              const ExtractorConfig &cfg,
                              const EmbeddingExtractor &extractor,
                              const std::string &recording_id) {
  if (static_cast<int>(vad.size()) != feat.frames())
    Fail(ErrorCode::kLengthMismatch, "VAD mask is not aligned to features");
  const int min_frames = std::max(
      2, static_cast<int>(std::lround(cfg.min_speech_per_window / feat.frame_shift)));
  EmbeddingStream out{recording_id, {}};
  for (auto [start, len] : WindowPositions(feat.frames(), cfg, feat.frame_shift)) {
    std::vector<int> rows;
    for (int t = start; t < start + len; ++t)
      if (vad[t]) rows.push_back(t);
    if (static_cast<int>(rows.size()) < min_frames) continue;
    Eigen::MatrixXd frames(rows.size(), feat.dims());
    for (size_t i = 0; i < rows.size(); ++i) frames.row(i) = feat.values.row(rows[i]);
    out.items.push_back(Embedding{
        extractor.Extract(frames),
        Segment{start * feat.frame_shift, len * feat.frame_shift}, recording_id});
  }
  if (out.items.empty())
    Fail(ErrorCode::kNoSpeech, "no window has enough speech" +
                                   (recording_id.empty() ? "" : " in " + recording_id));
  return out;
}

}  // namespace diadet
