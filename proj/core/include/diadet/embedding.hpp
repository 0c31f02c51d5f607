// diadet/embedding.hpp

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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "diadet/frontend.hpp"
#include "diadet/timeline.hpp"

namespace diadet {

struct Embedding {
  Eigen::VectorXd vector;
  Segment window;
  std::string recording_id;
};

// Sliding-window embeddings of one recording, sorted by window onset.
struct EmbeddingStream {
  std::string recording_id;
  std::vector<Embedding> items;

  int size() const { return static_cast<int>(items.size()); }
  int dim() const { return items.empty() ? 0 : items.front().vector.size(); }
  // One embedding per row.
  Eigen::MatrixXd AsMatrix() const;
  // Embeddings whose window midpoint lies inside `window`.
  EmbeddingStream Slice(const Segment &window) const;
};

struct ExtractorConfig {
  double window_length = 1.5;
  double window_shift = 0.75;
  double min_speech_per_window = 0.3;

  void Validate() const;
};

// Maps whitened-space statistics to zero mean and identity covariance.
struct Whitener {
  Eigen::VectorXd mean;
  Eigen::MatrixXd transform;

  int dim() const { return static_cast<int>(mean.size()); }
  Eigen::VectorXd Apply(const Eigen::VectorXd &v) const {
    return transform * (v - mean);
  }
};

// Fits a symmetric (ZCA) whitening transform on row samples. A ridge of
// 1e-6 * trace / E is added to a near-singular covariance.
Whitener TrainWhitener(const Eigen::MatrixXd &rows);

// Rescales v to Euclidean norm sqrt(E).
Eigen::VectorXd LengthNorm(const Eigen::VectorXd &v);

// Embedding provider. Implementations must be safe for concurrent const use.
class EmbeddingExtractor {
 public:
  virtual ~EmbeddingExtractor() = default;
  // `frames` holds the speech frames of one window, one per row.
  virtual Eigen::VectorXd Extract(const Eigen::MatrixXd &frames) const = 0;
};

// Per-dimension mean and standard deviation, whitened and length-normalised.
class ReferenceExtractor : public EmbeddingExtractor {
 public:
  ReferenceExtractor() = default;
  explicit ReferenceExtractor(Whitener whitener)
      : whitener_(std::move(whitener)) {}

  // mean (+) std of the frames, before whitening.
  static Eigen::VectorXd Statistics(const Eigen::MatrixXd &frames);

  Eigen::VectorXd Extract(const Eigen::MatrixXd &frames) const override;

  const std::optional<Whitener> &whitener() const { return whitener_; }

 private:
  std::optional<Whitener> whitener_;
};

// Window placement in frames: starts at k * shift while the window fits; a
// recording shorter than one window yields a single window over all frames.
std::vector<std::pair<int, int>> WindowPositions(int n_frames,
                                                 const ExtractorConfig &cfg,
                                                 double frame_shift);

// Gathers the speech frames of every window and embeds the windows that
// carry at least cfg.min_speech_per_window seconds of speech.
EmbeddingStream ExtractStream(const FeatureMatrix &feat, const VadMask &vad,
                              const ExtractorConfig &cfg,
                              const EmbeddingExtractor &extractor,
                              const std::string &recording_id = "");

}  // namespace diadet
