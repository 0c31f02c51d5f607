// core/src/vb.cpp

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

#include "diadet/vb.hpp"

#include <cmath>
#include <numbers>

#include "diadet/error.hpp"
#include "diadet/hmm.hpp"
#include "diadet/linalg.hpp"

namespace diadet {

namespace {

// Speaker-factor posteriors q(y_s) = N(alpha_s, cov_s) and the resulting
// expected log-emissions.
struct FactorPosterior {
  Eigen::MatrixXd alpha;  // E x S
  std::vector<Eigen::MatrixXd> cov;
  Eigen::MatrixXd log_emission;  // T x S
  double kl = 0.0;               // sum_s KL(q(y_s) || N(0, B))
};

struct VbContext {
  Eigen::MatrixXd x;        // T x E, mean removed
  Eigen::MatrixXd x_winv;   // x W^{-1}
  Eigen::VectorXd x_quad;   // x_t^T W^{-1} x_t
  Eigen::MatrixXd w_inv;
  Eigen::MatrixXd b_inv;
  double logdet_b = 0.0;
  double emission_const = 0.0;
};

FactorPosterior UpdateFactors(const VbContext &ctx, const Eigen::MatrixXd &q) {
  const Eigen::Index e = ctx.x.cols();
  const Eigen::Index s = q.cols();
  FactorPosterior out;
  Eigen::VectorXd counts = q.colwise().sum().transpose();
  Eigen::MatrixXd first = ctx.x.transpose() * q;  // E x S
  out.alpha.resize(e, s);
  Eigen::VectorXd offset(s);
  for (Eigen::Index k = 0; k < s; ++k) {
    Eigen::MatrixXd precision = ctx.b_inv + counts(k) * ctx.w_inv;
    Eigen::MatrixXd cov = linalg::InverseSpd(precision);
    Eigen::VectorXd a = cov * (ctx.w_inv * first.col(k));
    out.alpha.col(k) = a;
    offset(k) = a.dot(ctx.w_inv * a) + (ctx.w_inv * cov).trace();
    out.kl += 0.5 * ((ctx.b_inv * cov).trace() + a.dot(ctx.b_inv * a) -
                     static_cast<double>(e) + ctx.logdet_b +
                     linalg::LogDetSpd(precision));
    out.cov.push_back(std::move(cov));
  }
  out.log_emission = 2.0 * ctx.x_winv * out.alpha;
  out.log_emission.colwise() -= ctx.x_quad;
  out.log_emission.rowwise() -= offset.transpose();
  out.log_emission = 0.5 * out.log_emission.array() - ctx.emission_const;
  return out;
}

double SequenceLogPrior(const ClusterLabels &z, int s, double p_loop) {
  double lp = -std::log(static_cast<double>(s));
  if (s == 1) return lp;
  const double stay = std::log(p_loop);
  const double move = std::log((1.0 - p_loop) / (s - 1));
  for (size_t t = 1; t < z.size(); ++t) lp += z[t] == z[t - 1] ? stay : move;
  return lp;
}

}  // namespace

void VbConfig::Validate() const {
  if (!(p_loop > 0.0 && p_loop < 1.0))
    Fail(ErrorCode::kOutOfRange, "vb: p_loop must lie in (0, 1)");
  if (n_iter < 1) Fail(ErrorCode::kOutOfRange, "vb: n_iter must be >= 1");
  if (!(min_posterior_floor >= 0.0 && min_posterior_floor < 0.01))
    Fail(ErrorCode::kOutOfRange, "vb: min_posterior_floor must lie in [0, 0.01)");
}

SpeakerPosterior OneHotPosterior(const ClusterLabels &labels,
                                 double frame_shift) {
  const int s = NumClusters(labels);
  SpeakerPosterior out;
  out.q = Eigen::MatrixXd::Zero(labels.size(), s);
  for (size_t t = 0; t < labels.size(); ++t) out.q(t, labels[t]) = 1.0;
  out.frame_shift = frame_shift;
  for (int k = 0; k < s; ++k) out.speaker_ids.push_back(k);
  return out;
}

void FloorPosterior(Eigen::MatrixXd *q, double floor) {
  const double s = static_cast<double>(q->cols());
  if (floor <= 0.0 || s * floor >= 1.0) return;
  *q = (floor + (1.0 - s * floor) * q->array()).matrix();
}

VbResult VbResegment(const EmbeddingStream &stream, const ClusterLabels &init,
                     const PldaModel &model, const VbConfig &cfg) {
  cfg.Validate();
  model.Validate();
  if (stream.size() < 2)
    Fail(ErrorCode::kDegenerateInit, "resegmentation needs at least two frames");
  if (static_cast<int>(init.size()) != stream.size())
    Fail(ErrorCode::kDimensionMismatch, "init labels are not aligned to the stream");
  if (stream.dim() != model.dim())
    Fail(ErrorCode::kDimensionMismatch,
         "stream dimension " + std::to_string(stream.dim()) + " vs model " +
             std::to_string(model.dim()));
  for (int l : init)
    if (l < 0) Fail(ErrorCode::kInvalidArgument, "negative init label");

  const int e = model.dim();
  VbContext ctx;
  ctx.x = stream.AsMatrix().rowwise() - model.mu.transpose();
  ctx.w_inv = linalg::InverseSpd(model.within);
  Eigen::MatrixXd b = linalg::ClipEigenvalues(
      model.between, 1e-10 * model.within.trace() / e);
  ctx.b_inv = linalg::InverseSpd(b);
  ctx.logdet_b = linalg::LogDetSpd(b);
  ctx.x_winv = ctx.x * ctx.w_inv;
  ctx.x_quad = (ctx.x_winv.array() * ctx.x.array()).rowwise().sum();
  ctx.emission_const =
      0.5 * (e * std::log(2.0 * std::numbers::pi) + linalg::LogDetSpd(model.within));

  SpeakerPosterior init_post = OneHotPosterior(init, stream.items.front().window.duration);
  Eigen::MatrixXd q = init_post.q;
  std::vector<int> ids = init_post.speaker_ids;

  VbResult result;
  FactorPosterior factors = UpdateFactors(ctx, q);
  {
    double fit = 0.0;
    for (size_t t = 0; t < init.size(); ++t) fit += factors.log_emission(t, init[t]);
    result.elbo.push_back(fit + SequenceLogPrior(init, static_cast<int>(q.cols()), cfg.p_loop) -
                          factors.kl);
  }

  for (int it = 0; it < cfg.n_iter; ++it) {
    if (it > 0) factors = UpdateFactors(ctx, q);
    ForwardBackwardResult fb = ForwardBackward(factors.log_emission, cfg.p_loop);
    result.elbo.push_back(fb.log_likelihood - factors.kl);
    q = std::move(fb.posterior);

    // Drop speakers that lost their posterior mass.
    Eigen::VectorXd mass = q.colwise().sum().transpose();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      if (mass(k) >= 1e-6)
        keep.push_back(k);
      else
        result.dropped_speakers.push_back(ids[k]);
    }
    if (static_cast<Eigen::Index>(keep.size()) < q.cols()) {
      Eigen::MatrixXd kept(q.rows(), keep.size());
      std::vector<int> kept_ids;
      for (size_t c = 0; c < keep.size(); ++c) {
        kept.col(c) = q.col(keep[c]);
        kept_ids.push_back(ids[keep[c]]);
      }
      kept = kept.array().colwise() / kept.rowwise().sum().array();
      q = std::move(kept);
      ids = std::move(kept_ids);
    }
  }

  FloorPosterior(&q, cfg.min_posterior_floor);
  result.posterior.q = std::move(q);
  result.posterior.speaker_ids = std::move(ids);
  result.posterior.frame_shift =
      stream.size() > 1
          ? stream.items[1].window.onset - stream.items[0].window.onset
          : stream.items[0].window.duration;
  return result;
}

}  // namespace diadet
