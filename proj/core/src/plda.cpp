// core/src/plda.cpp

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

#include "diadet/plda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "diadet/error.hpp"
#include "diadet/linalg.hpp"

namespace diadet {

namespace {

constexpr double kWithinFloor = 1e-10;

// Keeps B invertible for the E-step without visibly changing it.
Eigen::MatrixXd RegularizedBetween(const PldaModel &m) {
  double scale = std::max(m.within.trace() / m.dim(), 1e-300);
  return linalg::ClipEigenvalues(m.between, 1e-10 * scale);
}

}  // namespace

void PldaModel::Validate() const {
  const int e = dim();
  if (between.rows() != e || between.cols() != e || within.rows() != e ||
      within.cols() != e)
    Fail(ErrorCode::kDimensionMismatch, "PLDA parameter shapes");
  if (!mu.allFinite() || !between.allFinite() || !within.allFinite())
    Fail(ErrorCode::kDegenerate, "PLDA parameters are not finite");
  if (linalg::MinEigenvalue(within) <= kWithinFloor * 0.5)
    Fail(ErrorCode::kSingularW, "within-speaker covariance is not PD");
}

PldaTrainer::PldaTrainer(const Eigen::MatrixXd &rows,
                         const std::vector<int> &labels)
    : offset_(rows.colwise().mean().transpose()),
      rows_(rows.rowwise() - rows.colwise().mean()) {
  if (static_cast<Eigen::Index>(labels.size()) != rows.rows())
    Fail(ErrorCode::kLengthMismatch, "labels vs rows");
  std::map<int, int> index;
  for (size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = index.emplace(labels[i], members_.size());
    if (inserted) members_.emplace_back();
    members_[it->second].push_back(static_cast<int>(i));
  }
  if (members_.size() < 2)
    Fail(ErrorCode::kInsufficientData, "PLDA training needs >= 2 speakers");
  for (const auto &m : members_)
    if (m.size() < 2)
      Fail(ErrorCode::kInsufficientData,
           "every speaker needs >= 2 embeddings for PLDA training");
  const int e = static_cast<int>(rows.cols());
  for (const auto &m : members_) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(e);
    for (int i : m) s += rows_.row(i).transpose();
    counts_.push_back(static_cast<int>(m.size()));
    sums_.push_back(std::move(s));
  }
  scatter_ = rows_.transpose() * rows_;
}

PldaModel PldaTrainer::Initialize() const {
  const int e = static_cast<int>(rows_.cols());
  const double n = static_cast<double>(rows_.rows());
  PldaModel m;
  m.mu = Eigen::VectorXd::Zero(e);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(e, e);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(e, e);
  double inv_count = 0.0;
  for (size_t s = 0; s < members_.size(); ++s) {
    Eigen::VectorXd mean = sums_[s] / counts_[s];
    for (int i : members_[s]) {
      Eigen::VectorXd d = rows_.row(i).transpose() - mean;
      within += d * d.transpose();
    }
    Eigen::VectorXd c = mean - m.mu;
    between += c * c.transpose();
    inv_count += 1.0 / counts_[s];
  }
  within /= n;
  between /= static_cast<double>(members_.size());
  between -= within * (inv_count / members_.size());
  m.within = linalg::ClipEigenvalues(within, kWithinFloor);
  m.between = linalg::ClipEigenvalues(between, 0.0);
  m.mu += offset_;
  return m;
}

PldaModel PldaTrainer::EmStep(const PldaModel &model,
                              std::vector<std::string> *warnings) const {
  const int e = model.dim();
  const double n = static_cast<double>(rows_.rows());
  const double k = static_cast<double>(members_.size());
  const Eigen::MatrixXd b_inv = linalg::InverseSpd(RegularizedBetween(model));
  const Eigen::MatrixXd w_inv = linalg::InverseSpd(model.within);
  const Eigen::VectorXd mu = model.mu - offset_;

  // Posterior covariance depends only on the speaker's sample count.
  std::map<int, Eigen::MatrixXd> post_cov;
  for (int c : counts_)
    if (!post_cov.count(c))
      post_cov[c] = linalg::InverseSpd(b_inv + c * w_inv);

  std::vector<Eigen::VectorXd> post_mean(members_.size());
  Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(e);
  Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(e);
  Eigen::MatrixXd yy = Eigen::MatrixXd::Zero(e, e);
  Eigen::MatrixXd yy_weighted = Eigen::MatrixXd::Zero(e, e);
  Eigen::MatrixXd xy = Eigen::MatrixXd::Zero(e, e);
  for (size_t s = 0; s < members_.size(); ++s) {
    const double c = counts_[s];
    const Eigen::MatrixXd &cov = post_cov.at(counts_[s]);
    Eigen::VectorXd centered = sums_[s] - c * mu;
    post_mean[s] = cov * (w_inv * centered);
    Eigen::MatrixXd second = post_mean[s] * post_mean[s].transpose() + cov;
    yy += second;
    yy_weighted += c * second;
    xy += sums_[s] * post_mean[s].transpose();
    sum_x += sums_[s];
    sum_y += c * post_mean[s];
  }

  PldaModel out;
  out.mu = (sum_x - sum_y) / n;
  out.between = linalg::Symmetrize(yy / k);
  // sum over samples of E[(x - mu - y)(x - mu - y)^T]
  Eigen::MatrixXd w = scatter_ - xy - xy.transpose() + yy_weighted -
                      sum_x * out.mu.transpose() - out.mu * sum_x.transpose() +
                      sum_y * out.mu.transpose() + out.mu * sum_y.transpose() +
                      n * out.mu * out.mu.transpose();
  w = linalg::Symmetrize(w / n);
  out.mu += offset_;
  if (!w.allFinite()) Fail(ErrorCode::kSingularW, "within covariance diverged");
  if (linalg::MinEigenvalue(w) < kWithinFloor) {
    if (warnings)
      warnings->push_back(
          "within-speaker covariance collapsed to the ridge floor");
    w = linalg::ClipEigenvalues(w, kWithinFloor);
  }
  out.within = w;
  return out;
}

double PldaTrainer::LogLikelihood(const PldaModel &model) const {
  const int e = model.dim();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const Eigen::MatrixXd w_inv = linalg::InverseSpd(model.within);
  const double logdet_w = linalg::LogDetSpd(model.within);
  const Eigen::VectorXd mu = model.mu - offset_;

  // Speaker mean ~ N(mu, B + W / c); deviations from it depend on W only.
  std::map<int, std::pair<Eigen::MatrixXd, double>> mean_cov;
  for (int c : counts_)
    if (!mean_cov.count(c)) {
      Eigen::MatrixXd cov = linalg::Symmetrize(model.between + model.within / c);
      mean_cov[c] = {linalg::InverseSpd(cov), linalg::LogDetSpd(cov)};
    }

  double total = 0.0;
  for (size_t s = 0; s < members_.size(); ++s) {
    const double c = counts_[s];
    const auto &[prec, logdet_cov] = mean_cov.at(counts_[s]);
    Eigen::VectorXd mean = sums_[s] / c;
    double scatter = 0.0;
    for (int i : members_[s]) {
      Eigen::VectorXd d = rows_.row(i).transpose() - mean;
      scatter += d.dot(w_inv * d);
    }
    Eigen::VectorXd m = mean - mu;
    total += -0.5 * ((c - 1.0) * (e * log2pi + logdet_w) + scatter + e * std::log(c)) -
             0.5 * (e * log2pi + logdet_cov + m.dot(prec * m));
  }
  return total;
}

std::pair<PldaModel, TrainReport> TrainPlda(const Eigen::MatrixXd &rows,
                                            const std::vector<int> &labels,
                                            int n_iter) {
  PldaTrainer trainer(rows, labels);
  TrainReport report;
  PldaModel model = trainer.Initialize();
  report.log_likelihood.push_back(trainer.LogLikelihood(model));
  for (int it = 0; it < n_iter; ++it) {
    model = trainer.EmStep(model, &report.warnings);
    report.log_likelihood.push_back(trainer.LogLikelihood(model));
  }
  return {model, report};
}

PldaScorer::PldaScorer(const PldaModel &model) : model_(model) {
  model.Validate();
  const Eigen::MatrixXd &b = model.between;
  const Eigen::MatrixXd total = linalg::Symmetrize(b + model.within);
  const Eigen::MatrixXd total_inv = linalg::InverseSpd(total);
  // Schur complement of the same-speaker joint covariance [[T, B], [B, T]].
  const Eigen::MatrixXd schur = linalg::Symmetrize(total - b * total_inv * b);
  const Eigen::MatrixXd schur_inv = linalg::InverseSpd(schur);
  self_ = linalg::Symmetrize(schur_inv - total_inv);
  cross_ = linalg::Symmetrize(-total_inv * b * schur_inv);
  constant_ = -0.5 * (linalg::LogDetSpd(total) + linalg::LogDetSpd(schur)) +
              linalg::LogDetSpd(total);
}

double PldaScorer::Llr(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const {
  if (a.size() != model_.dim() || b.size() != model_.dim())
    Fail(ErrorCode::kDimensionMismatch,
         "embedding dimension " + std::to_string(a.size()) + "/" +
             std::to_string(b.size()) + " vs model " +
             std::to_string(model_.dim()));
  Eigen::VectorXd x1 = a - model_.mu;
  Eigen::VectorXd x2 = b - model_.mu;
  return constant_ - 0.5 * (x1.dot(self_ * x1) + x2.dot(self_ * x2)) -
         x1.dot(cross_ * x2);
}

Eigen::MatrixXd PldaScorer::Pairwise(const Eigen::MatrixXd &x) const {
  const Eigen::Index n = x.rows();
  if (n > 0 && x.cols() != model_.dim())
    Fail(ErrorCode::kDimensionMismatch,
         "embedding dimension " + std::to_string(x.cols()) + " vs model " +
             std::to_string(model_.dim()));
  const Eigen::MatrixXd c = x.rowwise() - model_.mu.transpose();
  const Eigen::VectorXd q = (c * self_).cwiseProduct(c).rowwise().sum();
  const Eigen::MatrixXd cross = c * cross_ * c.transpose();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = constant_ - 0.5 * (q(i) + q(j)) - cross(i, j);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

double Llr(const PldaModel &model, const Eigen::VectorXd &a,
           const Eigen::VectorXd &b) {
  return PldaScorer(model).Llr(a, b);
}

Eigen::MatrixXd ScoreMatrix(const PldaModel &model,
                            const EmbeddingStream &stream) {
  return PldaScorer(model).Pairwise(stream.AsMatrix());
}

PldaModel AdaptPlda(const PldaModel &model, const Eigen::MatrixXd &in_domain,
                    double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    Fail(ErrorCode::kOutOfRange, "adaptation alpha must lie in [0, 1]");
  if (in_domain.cols() != model.dim())
    Fail(ErrorCode::kDimensionMismatch, "in-domain dimension");
  if (in_domain.rows() < model.dim() + 1)
    Fail(ErrorCode::kInsufficientData,
         "adaptation needs at least E+1 in-domain samples");
  if (alpha == 0.0) return model;
  linalg::Moments m = linalg::SampleMoments(in_domain);
  PldaModel out = model;
  Eigen::MatrixXd target = linalg::ClipEigenvalues(m.cov - model.within, 0.0);
  out.between = linalg::Symmetrize((1.0 - alpha) * model.between + alpha * target);
  out.mu = (1.0 - alpha) * model.mu + alpha * m.mean;
  return out;
}

std::vector<Eigen::VectorXd> AverageByLabel(const EmbeddingStream &stream,
                                            const std::vector<int> &labels) {
  if (static_cast<int>(labels.size()) != stream.size())
    Fail(ErrorCode::kLengthMismatch, "labels are not aligned to the stream");
  if (labels.empty()) return {};
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(stream.dim()));
  std::vector<int> counts(k, 0);
  for (int i = 0; i < stream.size(); ++i) {
    if (labels[i] < 0) Fail(ErrorCode::kInvalidArgument, "negative label");
    sums[labels[i]] += stream.items[i].vector;
    ++counts[labels[i]];
  }
  std::vector<Eigen::VectorXd> out;
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0)
      Fail(ErrorCode::kEmptyCluster, "label " + std::to_string(c) + " is empty");
    out.push_back(LengthNorm(sums[c] / counts[c]));
  }
  return out;
}

}  // namespace diadet
