// diadet/vb.hpp

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

#include <vector>

#include <Eigen/Core>

#include "diadet/ahc.hpp"
#include "diadet/embedding.hpp"
#include "diadet/plda.hpp"

namespace diadet {

// Per-frame speaker posteriors. Column s belongs to cluster speaker_ids[s].
struct SpeakerPosterior {
  Eigen::MatrixXd q;  // T x S, rows sum to one
  double frame_shift = 0.0;
  std::vector<int> speaker_ids;

  int frames() const { return static_cast<int>(q.rows()); }
  int speakers() const { return static_cast<int>(q.cols()); }
};

struct VbConfig {
  double p_loop = 0.99;
  int n_iter = 1;
  double min_posterior_floor = 1e-10;

  void Validate() const;
};

struct VbResult {
  SpeakerPosterior posterior;
  // elbo[0] is the bound at the initial one-hot assignment (with optimal
  // speaker factors); elbo[k] follows iteration k.
  std::vector<double> elbo;
  std::vector<int> dropped_speakers;
};

// Variational Bayes HMM resegmentation over an embedding stream. Every
// speaker has a latent offset y_s ~ N(0, B) and emits N(mu + y_s, W).
VbResult VbResegment(const EmbeddingStream &stream, const ClusterLabels &init,
                     const PldaModel &model, const VbConfig &cfg);

// Posterior with q rows one-hot at each label.
SpeakerPosterior OneHotPosterior(const ClusterLabels &labels,
                                 double frame_shift);

// Keeps every entry >= floor while preserving row sums.
void FloorPosterior(Eigen::MatrixXd *q, double floor);

}  // namespace diadet
