// tests/unit/plda_test.cpp

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
#include <map>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "diadet/error.hpp"
#include "diadet/linalg.hpp"
#include "diadet/plda.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace diadet {
namespace {

using testing::CodeOf;

PldaModel Isotropic(int dim, double b, double w) {
  PldaModel m;
  m.mu = Eigen::VectorXd::Zero(dim);
  m.between = b * Eigen::MatrixXd::Identity(dim, dim);
  m.within = w * Eigen::MatrixXd::Identity(dim, dim);
  return m;
}

double RelFrobenius(const Eigen::MatrixXd &est, const Eigen::MatrixXd &ref) {
  return (est - ref).norm() / ref.norm();
}

Eigen::MatrixXd RandomRotation(oracle::Rng &rng, int dim) {
  Eigen::MatrixXd a(dim, dim);
  for (int c = 0; c < dim; ++c) a.col(c) = oracle::StandardNormal(rng, dim);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
         Eigen::MatrixXd::Identity(dim, dim);
}

TEST(Llr, OneDimensionalClosedForm) {
  PldaModel m = Isotropic(1, 1.0, 1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(Llr(m, z, z), std::log(2.0) - 0.5 * std::log(3.0), 1e-10);
  EXPECT_NEAR(oracle::GaussianLlr(m, z, z), std::log(2.0) - 0.5 * std::log(3.0), 1e-10);
}

TEST(Llr, MatchesExplicitGaussians) {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    int dim = 1 + trial % 6;
    PldaModel m = oracle::RandomModel(rng, dim, 0.1, 3.0, 0.2, 2.0);
    Eigen::VectorXd a = oracle::StandardNormal(rng, dim), b = oracle::StandardNormal(rng, dim);
    EXPECT_NEAR(Llr(m, a, b), oracle::GaussianLlr(m, a, b), 1e-9);
  }
}

TEST(Llr, ZeroBetweenGivesZero) {
  oracle::Rng rng(32);
  PldaModel m = Isotropic(4, 0.0, 1.5);
  for (int i = 0; i < 10; ++i)
    EXPECT_NEAR(Llr(m, oracle::StandardNormal(rng, 4), oracle::StandardNormal(rng, 4)), 0.0, 1e-12);
}

TEST(Llr, Symmetric) {
  oracle::Rng rng(33);
  PldaModel m = oracle::RandomModel(rng, 5, 0.5, 2.0, 0.5, 2.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd a = oracle::StandardNormal(rng, 5), b = oracle::StandardNormal(rng, 5);
    EXPECT_NEAR(Llr(m, a, b), Llr(m, b, a), 1e-12);
  }
}

TEST(Llr, RotationInvariant) {
  oracle::Rng rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    PldaModel m = oracle::RandomModel(rng, 4, 0.2, 2.0, 0.3, 1.5);
    Eigen::MatrixXd r = RandomRotation(rng, 4);
    PldaModel rot;
    rot.mu = r * m.mu;
    rot.between = r * m.between * r.transpose();
    rot.within = r * m.within * r.transpose();
    Eigen::VectorXd a = oracle::StandardNormal(rng, 4), b = oracle::StandardNormal(rng, 4);
    EXPECT_NEAR(Llr(m, a, b), Llr(rot, r * a, r * b), 1e-9);
  }
}

TEST(Llr, SelfScoreGrowsWithBetweenScale) {
  oracle::Rng rng(35);
  Eigen::VectorXd e = oracle::StandardNormal(rng, 3);
  double prev = -std::numeric_limits<double>::infinity();
  for (double c : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
    double s = Llr(Isotropic(3, c, 1.0), e, e);
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(Llr, DimensionMismatch) {
  PldaModel m = Isotropic(3, 1.0, 1.0);
  EXPECT_EQ(CodeOf([&] { Llr(m, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(ScoreMatrix, SymmetricAndMatchesPairwiseLlr) {
  oracle::Rng rng(36);
  PldaModel m = oracle::RandomModel(rng, 4, 0.5, 2.0, 0.5, 1.0);
  EmbeddingStream s{"rec", {}};
  for (int i = 0; i < 9; ++i)
    s.items.push_back(Embedding{oracle::StandardNormal(rng, 4), Segment{0.75 * i, 1.5}, "rec"});
  Eigen::MatrixXd sm = ScoreMatrix(m, s);
  EXPECT_TRUE(sm == sm.transpose());
  for (int i = 0; i < 9; ++i) {
    EXPECT_TRUE(std::isinf(sm(i, i)) && sm(i, i) > 0);
    for (int j = 0; j < 9; ++j)
      if (i != j) EXPECT_NEAR(sm(i, j), Llr(m, s.items[i].vector, s.items[j].vector), 1e-12);
  }
  EmbeddingStream two{"rec", {s.items[0], s.items[1]}};
  Eigen::MatrixXd sm2 = ScoreMatrix(m, two);
  EXPECT_TRUE(std::isfinite(sm2(0, 1)));
  EXPECT_EQ(sm2(0, 1), sm2(1, 0));
}

TEST(Train, LogLikelihoodNonDecreasing) {
  oracle::Rng rng(37);
  for (int problem = 0; problem < 50; ++problem) {
    int dim = 2 + problem % 5;
    PldaModel truth = oracle::RandomModel(rng, dim, 0.2, 3.0, 0.2, 1.5);
    Eigen::MatrixXd rows;
    std::vector<int> labels;
    oracle::SampleFromModel(rng, truth, 10 + problem % 7, 2 + problem % 5, &rows, &labels);
    auto [model, report] = TrainPlda(rows, labels, 10);
    ASSERT_EQ(report.log_likelihood.size(), 11u);
    for (size_t k = 1; k < report.log_likelihood.size(); ++k)
      EXPECT_GE(report.log_likelihood[k], report.log_likelihood[k - 1] - 1e-8)
          << "problem " << problem << " iteration " << k;
    model.Validate();
  }
}

// Each speaker's samples stacked into one Gaussian with covariance
// I (x) W + 1 1^T (x) B.
double StackedLogLikelihood(const PldaModel &m, const Eigen::MatrixXd &rows,
                            const std::vector<int> &labels) {
  std::map<int, std::vector<int>> groups;
  for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  const int e = m.dim();
  double total = 0.0;
  for (const auto &[spk, idx] : groups) {
    const int c = idx.size();
    Eigen::MatrixXd cov(c * e, c * e);
    Eigen::VectorXd x(c * e);
    for (int i = 0; i < c; ++i) {
      x.segment(i * e, e) = rows.row(idx[i]).transpose() - m.mu;
      for (int j = 0; j < c; ++j)
        cov.block(i * e, j * e, e, e) = m.between + (i == j ? m.within : Eigen::MatrixXd::Zero(e, e));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    total += -0.5 * (c * e * std::log(2.0 * std::numbers::pi) + logdet + x.dot(llt.solve(x)));
  }
  return total;
}

TEST(Train, LogLikelihoodMatchesStackedGaussian) {
  oracle::Rng rng(46);
  for (double b_lo : {0.3, 0.0}) {
    PldaModel m = oracle::RandomModel(rng, 3, b_lo, 2.0, 0.3, 1.0);
    Eigen::MatrixXd rows;
    std::vector<int> labels;
    oracle::SampleFromModel(rng, m, 7, 3, &rows, &labels);
    labels.back() = 0;
    EXPECT_NEAR(PldaTrainer(rows, labels).LogLikelihood(m), StackedLogLikelihood(m, rows, labels),
                1e-9);
  }
}

TEST(Train, ReportMatchesTrainerLikelihood) {
  oracle::Rng rng(38);
  PldaModel truth = oracle::RandomModel(rng, 3, 0.5, 2.0, 0.5, 1.0);
  Eigen::MatrixXd rows;
  std::vector<int> labels;
  oracle::SampleFromModel(rng, truth, 30, 5, &rows, &labels);
  PldaTrainer trainer(rows, labels);
  PldaModel m = trainer.Initialize();
  auto [model, report] = TrainPlda(rows, labels, 3);
  EXPECT_NEAR(report.log_likelihood[0], trainer.LogLikelihood(m), 1e-8);
  for (int k = 1; k <= 3; ++k) {
    m = trainer.EmStep(m);
    EXPECT_NEAR(report.log_likelihood[k], trainer.LogLikelihood(m), 1e-8);
  }
}

TEST(Train, ConvergedModelIsStationary) {
  oracle::Rng rng(39);
  PldaModel truth = oracle::RandomModel(rng, 3, 0.5, 2.0, 0.5, 1.0);
  Eigen::MatrixXd rows;
  std::vector<int> labels;
  oracle::SampleFromModel(rng, truth, 40, 6, &rows, &labels);
  auto [model, report] = TrainPlda(rows, labels, 500);
  PldaTrainer trainer(rows, labels);
  PldaModel next = trainer.EmStep(model);
  EXPECT_NEAR(trainer.LogLikelihood(next), trainer.LogLikelihood(model), 1e-8);
}

TEST(Train, PlantedWithinRecovered) {
  oracle::Rng rng(40);
  PldaModel truth = oracle::RandomModel(rng, 8, 0.5, 2.0, 0.5, 1.5);
  Eigen::MatrixXd rows;
  std::vector<int> labels;
  oracle::SampleFromModel(rng, truth, 500, 20, &rows, &labels);
  auto [model, report] = TrainPlda(rows, labels, 20);
  EXPECT_LT(RelFrobenius(model.within, truth.within), 0.05);

  // Sample covariance of the planted speaker offsets, recomputed from the
  // per-speaker means: the attainable target for B at this sample size.
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(500, 8);
  for (size_t i = 0; i < labels.size(); ++i) means.row(labels[i]) += rows.row(i) / 20.0;
  Eigen::RowVectorXd grand = means.colwise().mean();
  Eigen::MatrixXd c = means.rowwise() - grand;
  Eigen::MatrixXd b_moment = c.transpose() * c / 500.0 - model.within / 20.0;
  EXPECT_LT(RelFrobenius(model.between, b_moment), 0.02);
}

TEST(Train, IdenticalSamplesWarn) {
  oracle::Rng rng(41);
  Eigen::MatrixXd rows(20, 3);
  std::vector<int> labels;
  for (int s = 0; s < 5; ++s) {
    Eigen::VectorXd v = oracle::StandardNormal(rng, 3);
    for (int i = 0; i < 4; ++i) {
      rows.row(4 * s + i) = v.transpose();
      labels.push_back(s);
    }
  }
  auto [model, report] = TrainPlda(rows, labels, 3);
  EXPECT_FALSE(report.warnings.empty());
  EXPECT_LT(linalg::MinEigenvalue(model.within), 1e-6);
}

TEST(Train, InsufficientData) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Random(4, 2);
  EXPECT_EQ(CodeOf([&] { TrainPlda(rows, {0, 0, 0, 0}, 2); }), ErrorCode::kInsufficientData);
  EXPECT_EQ(CodeOf([&] { TrainPlda(rows, {0, 0, 0, 1}, 2); }), ErrorCode::kInsufficientData);
}

TEST(Adapt, ZeroAlphaIsIdentity) {
  oracle::Rng rng(42);
  PldaModel m = oracle::RandomModel(rng, 4, 0.5, 2.0, 0.5, 1.0);
  Eigen::MatrixXd in(30, 4);
  for (int i = 0; i < 30; ++i) in.row(i) = oracle::StandardNormal(rng, 4).transpose();
  PldaModel out = AdaptPlda(m, in, 0.0);
  EXPECT_EQ(out.mu, m.mu);
  EXPECT_EQ(out.between, m.between);
  EXPECT_EQ(out.within, m.within);
}

TEST(Adapt, FullAlphaOnModelDataRecoversBetween) {
  oracle::Rng rng(43);
  PldaModel m = oracle::RandomModel(rng, 4, 0.5, 2.0, 0.5, 1.0);
  Eigen::MatrixXd rows;
  std::vector<int> labels;
  oracle::SampleFromModel(rng, m, 20000, 1, &rows, &labels);
  PldaModel out = AdaptPlda(m, rows, 1.0);
  EXPECT_LT(RelFrobenius(out.between, m.between), 0.05);
  EXPECT_EQ(out.within, m.within);
  EXPECT_LT((out.mu - m.mu).norm(), 0.05);
}

TEST(Adapt, ClipsNegativeEigenvalues) {
  oracle::Rng rng(44);
  PldaModel m = Isotropic(3, 1.0, 4.0);
  Eigen::MatrixXd in(200, 3);
  for (int i = 0; i < 200; ++i) in.row(i) = oracle::StandardNormal(rng, 3).transpose();
  PldaModel out = AdaptPlda(m, in, 1.0);
  EXPECT_GE(linalg::MinEigenvalue(out.between), -1e-12);
  EXPECT_LT(out.between.norm(), 1e-9);
}

TEST(Adapt, Errors) {
  PldaModel m = Isotropic(3, 1.0, 1.0);
  Eigen::MatrixXd few = Eigen::MatrixXd::Random(3, 3);
  EXPECT_EQ(CodeOf([&] { AdaptPlda(m, few, 0.5); }), ErrorCode::kInsufficientData);
  Eigen::MatrixXd ok = Eigen::MatrixXd::Random(10, 3);
  EXPECT_EQ(CodeOf([&] { AdaptPlda(m, ok, 1.5); }), ErrorCode::kOutOfRange);
}

TEST(AverageByLabel, Examples) {
  oracle::Rng rng(45);
  EmbeddingStream s{"rec", {}};
  for (int i = 0; i < 8; ++i)
    s.items.push_back(Embedding{oracle::StandardNormal(rng, 5), Segment{i * 0.75, 1.5}, "rec"});
  auto one = AverageByLabel(s, std::vector<int>(8, 0));
  ASSERT_EQ(one.size(), 1u);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
  for (const auto &e : s.items) mean += e.vector / 8.0;
  EXPECT_LT((one[0] - mean * (std::sqrt(5.0) / mean.norm())).norm(), 1e-12);

  EmbeddingStream same{"rec", {}};
  for (int i = 0; i < 6; ++i) same.items.push_back(s.items[0]);
  auto two = AverageByLabel(same, {0, 1, 0, 1, 0, 1});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_LT((two[0] - two[1]).norm(), 1e-12);

  std::vector<int> labels{2, 0, 1, 2, 0, 1, 1, 0};
  auto three = AverageByLabel(s, labels);
  ASSERT_EQ(three.size(), 3u);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
    for (int i = 0; i < 8; ++i)
      if (labels[i] == c) sum += s.items[i].vector;
    EXPECT_LT((three[c] - sum.normalized() * std::sqrt(5.0)).norm(), 1e-12);
  }
  EXPECT_EQ(CodeOf([&] { AverageByLabel(s, {0, 0, 2, 2, 0, 0, 2, 2}); }),
            ErrorCode::kEmptyCluster);
}

}  // namespace
}  // namespace diadet
