// diadet/plda.hpp

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

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "diadet/embedding.hpp"

namespace diadet {

// Two-covariance PLDA: x = mu + y + e, y ~ N(0, B) shared by a speaker,
// e ~ N(0, W) drawn per sample.
struct PldaModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd between;  // B, symmetric PSD
  Eigen::MatrixXd within;   // W, symmetric PD

  int dim() const { return static_cast<int>(mu.size()); }
  // Throws kDegenerate / kDimensionMismatch on violated invariants.
  void Validate() const;
};

struct TrainReport {
  // Entry 0 is the initial model, entry k the model after EM iteration k.
  std::vector<double> log_likelihood;
  std::vector<std::string> warnings;
};

// Labelled training data grouped by speaker; exposes the individual EM
// pieces so callers can inspect a single iteration.
class PldaTrainer {
 public:
  // rows: one embedding per row; labels: arbitrary speaker ids per row.
  PldaTrainer(const Eigen::MatrixXd &rows, const std::vector<int> &labels);

  // Moment-based starting point (within-class scatter and PSD-clipped
  // between-class scatter).
  PldaModel Initialize() const;
  // One exact EM update. Appends a warning when W hits the ridge floor.
  PldaModel EmStep(const PldaModel &model,
                   std::vector<std::string> *warnings = nullptr) const;
  // Marginal log-likelihood of all training data.
  double LogLikelihood(const PldaModel &model) const;

  int num_speakers() const { return static_cast<int>(counts_.size()); }
  int num_samples() const { return static_cast<int>(rows_.rows()); }

 private:
  Eigen::VectorXd offset_;  // global mean, removed from rows_
  Eigen::MatrixXd rows_;
  std::vector<std::vector<int>> members_;
  std::vector<int> counts_;
  std::vector<Eigen::VectorXd> sums_;  // per-speaker sum of rows
  Eigen::MatrixXd scatter_;            // sum of x x^T over all rows
};

std::pair<PldaModel, TrainReport> TrainPlda(const Eigen::MatrixXd &rows,
                                            const std::vector<int> &labels,
                                            int n_iter);

// Verification log-likelihood ratio with precomputed quadratic forms.
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel &model);

  double Llr(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const;
  // Symmetric matrix of pairwise LLRs over the rows of `x`, +inf diagonal.
  Eigen::MatrixXd Pairwise(const Eigen::MatrixXd &x) const;
  const PldaModel &model() const { return model_; }

 private:
  PldaModel model_;
  Eigen::MatrixXd self_;   // applied to each input alone
  Eigen::MatrixXd cross_;  // couples the two inputs
  double constant_ = 0.0;
};

double Llr(const PldaModel &model, const Eigen::VectorXd &a,
           const Eigen::VectorXd &b);

Eigen::MatrixXd ScoreMatrix(const PldaModel &model,
                            const EmbeddingStream &stream);

// Convex interpolation of (mu, B) toward in-domain statistics:
// B' = (1-alpha) B + alpha * psd(C_in - W), mu' = (1-alpha) mu + alpha m_in.
PldaModel AdaptPlda(const PldaModel &model, const Eigen::MatrixXd &in_domain,
                    double alpha);

// Mean embedding of each label 0..K-1, length-normalised.
std::vector<Eigen::VectorXd> AverageByLabel(const EmbeddingStream &stream,
                                            const std::vector<int> &labels);

}  // namespace diadet
