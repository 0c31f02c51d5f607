// tests/unit/embedding_test.cpp

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
#include <random>

#include <gtest/gtest.h>

#include "diadet/embedding.hpp"
#include "diadet/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace diadet {
namespace {

using testing::CodeOf;

FeatureMatrix Gaussian(oracle::Rng &rng, int frames, int dims, double mean, double sd) {
  std::normal_distribution<double> g;
  FeatureMatrix f;
  f.values.resize(frames, dims);
  for (int i = 0; i < f.values.size(); ++i) f.values.data()[i] = mean + sd * g(rng);
  return f;
}

TEST(ExtractStream, TenSecondsGivesTwelveWindows) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(1000, 4);
  auto s = ExtractStream(f, VadMask(1000, true), ExtractorConfig{}, ReferenceExtractor());
  ASSERT_EQ(s.size(), 12);
  for (int i = 0; i < 12; ++i) {
    EXPECT_NEAR(s.items[i].window.onset, 0.75 * i, 1e-9);
    EXPECT_NEAR(s.items[i].window.duration, 1.5, 1e-9);
  }
  EXPECT_EQ(s.dim(), 8);
}

TEST(ExtractStream, AllSilenceIsNoSpeech) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(500, 4);
  EXPECT_EQ(CodeOf([&] {
              ExtractStream(f, VadMask(500, false), ExtractorConfig{}, ReferenceExtractor());
            }),
            ErrorCode::kNoSpeech);
}

TEST(ExtractStream, ConstantFeaturesGiveIdenticalEmbeddings) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(600, 3, 1.25);
  auto s = ExtractStream(f, VadMask(600, true), ExtractorConfig{}, ReferenceExtractor());
  for (const auto &e : s.items) EXPECT_EQ(e.vector, s.items[0].vector);
}

TEST(ExtractStream, UsesSpeechFramesOnly) {
  oracle::Rng rng(2);
  FeatureMatrix f = Gaussian(rng, 300, 3, 0.0, 1.0);
  VadMask vad(300, false);
  for (int t = 10; t < 140; ++t) vad[t] = true;
  ExtractorConfig cfg;
  auto s = ExtractStream(f, vad, cfg, ReferenceExtractor());
  auto pos = WindowPositions(300, cfg, 0.01);
  size_t k = 0;
  for (auto [start, len] : pos) {
    std::vector<int> rows;
    for (int t = start; t < start + len; ++t)
      if (vad[t]) rows.push_back(t);
    if (rows.size() < 30) continue;
    ASSERT_LT(k, s.items.size());
    Eigen::MatrixXd frames(rows.size(), 3);
    for (size_t i = 0; i < rows.size(); ++i) frames.row(i) = f.values.row(rows[i]);
    EXPECT_TRUE(s.items[k].vector.isApprox(LengthNorm(ReferenceExtractor::Statistics(frames))));
    EXPECT_NEAR(s.items[k].window.onset, start * 0.01, 1e-12);
    ++k;
  }
  EXPECT_EQ(k, s.items.size());
}

TEST(ExtractStream, PropertyWindowCountIsClosedForm) {
  ExtractorConfig cfg;
  for (int n = 150; n < 3000; n += 37) {
    auto pos = WindowPositions(n, cfg, 0.01);
    EXPECT_EQ(static_cast<int>(pos.size()), (n - 150) / 75 + 1) << n;
    for (auto [start, len] : pos) {
      EXPECT_GE(start, 0);
      EXPECT_LE(start + len, n);
    }
  }
  auto short_rec = WindowPositions(40, cfg, 0.01);
  ASSERT_EQ(short_rec.size(), 1u);
  EXPECT_EQ(short_rec[0], std::make_pair(0, 40));
}

TEST(ExtractStream, IndependentOfBatchComposition) {
  oracle::Rng rng(8);
  FeatureMatrix a = Gaussian(rng, 400, 4, 0.0, 1.0);
  FeatureMatrix b = Gaussian(rng, 500, 4, 1.0, 2.0);
  auto alone = ExtractStream(a, VadMask(400, true), ExtractorConfig{}, ReferenceExtractor());
  (void)ExtractStream(b, VadMask(500, true), ExtractorConfig{}, ReferenceExtractor());
  auto again = ExtractStream(a, VadMask(400, true), ExtractorConfig{}, ReferenceExtractor());
  ASSERT_EQ(alone.size(), again.size());
  for (int i = 0; i < alone.size(); ++i) EXPECT_EQ(alone.items[i].vector, again.items[i].vector);
}

TEST(ReferenceExtractor, EqualFramesHaveZeroStd) {
  Eigen::MatrixXd frames = Eigen::MatrixXd::Constant(10, 3, 2.0);
  auto stats = ReferenceExtractor::Statistics(frames);
  EXPECT_EQ(stats.head(3), Eigen::VectorXd::Constant(3, 2.0));
  EXPECT_EQ(stats.tail(3), Eigen::VectorXd::Zero(3));
}

TEST(ReferenceExtractor, NeedsTwoFrames) {
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 3);
  EXPECT_EQ(CodeOf([&] { ReferenceExtractor().Extract(one); }), ErrorCode::kTooFewFrames);
}

TEST(ReferenceExtractor, DuplicationInvariant) {
  oracle::Rng rng(6);
  FeatureMatrix f = Gaussian(rng, 50, 5, 0.3, 1.7);
  Eigen::MatrixXd twice(100, 5);
  twice << f.values, f.values;
  ReferenceExtractor ex;
  EXPECT_LT((ex.Extract(f.values) - ex.Extract(twice)).norm(), 1e-12);
}

TEST(ReferenceExtractor, SeparatesDistinctSpeakers) {
  oracle::Rng rng(12);
  std::vector<Eigen::VectorXd> a, b;
  std::normal_distribution<double> g;
  Eigen::RowVectorXd ma(6), mb(6);
  for (int d = 0; d < 6; ++d) {
    ma(d) = g(rng);
    mb(d) = g(rng);
  }
  for (int i = 0; i < 20; ++i) {
    FeatureMatrix fa = Gaussian(rng, 150, 6, 0.0, 1.0), fb = Gaussian(rng, 150, 6, 0.0, 1.3);
    fa.values.rowwise() += ma;
    fb.values.rowwise() += mb;
    a.push_back(ReferenceExtractor().Extract(fa.values));
    b.push_back(ReferenceExtractor().Extract(fb.values));
  }
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) {
      inter += (a[i] - b[j]).norm();
      ++n_inter;
      if (j > i) {
        intra += (a[i] - a[j]).norm() + (b[i] - b[j]).norm();
        n_intra += 2;
      }
    }
  EXPECT_GT((inter / n_inter) / (intra / n_intra), 2.0);
}

TEST(Whitener, StandardNormalIsNearIdentity) {
  oracle::Rng rng(14);
  Eigen::MatrixXd rows(20000, 4);
  for (int i = 0; i < rows.rows(); ++i) rows.row(i) = oracle::StandardNormal(rng, 4).transpose();
  auto w = TrainWhitener(rows);
  EXPECT_LT((w.transform - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT(w.mean.norm(), 0.05);
}

TEST(Whitener, ScaledInputsHalveTransform) {
  oracle::Rng rng(15);
  Eigen::MatrixXd rows(4000, 3);
  for (int i = 0; i < rows.rows(); ++i) rows.row(i) = oracle::StandardNormal(rng, 3).transpose();
  // Exact unit covariance, then scaled to 4 I.
  Eigen::RowVectorXd mean = rows.colwise().mean();
  rows.rowwise() -= mean;
  Eigen::MatrixXd cov = rows.transpose() * rows / (rows.rows() - 1);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  rows = (llt.matrixL().solve(rows.transpose())).transpose() * 2.0;
  auto w = TrainWhitener(rows);
  EXPECT_LT((w.transform - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Whitener, PropertyTrainingSetIsWhite) {
  oracle::Rng rng(16);
  Eigen::MatrixXd mix = Eigen::MatrixXd::Random(5, 5) + 2.0 * Eigen::MatrixXd::Identity(5, 5);
  Eigen::MatrixXd rows(500, 5);
  for (int i = 0; i < rows.rows(); ++i)
    rows.row(i) = (mix * oracle::StandardNormal(rng, 5)).transpose() + Eigen::RowVectorXd::Constant(5, 3.0);
  auto w = TrainWhitener(rows);
  Eigen::MatrixXd out(500, 5);
  for (int i = 0; i < 500; ++i) out.row(i) = w.Apply(rows.row(i).transpose()).transpose();
  Eigen::RowVectorXd mean = out.colwise().mean();
  EXPECT_LT(mean.norm(), 1e-9);
  Eigen::MatrixXd centered = out.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / 500.0;
  EXPECT_LT((cov - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-6);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd v = LengthNorm(out.row(i).transpose());
    EXPECT_NEAR(v.norm(), std::sqrt(5.0), 1e-12);
    sum += v;
  }
  EXPECT_LT((sum / 500).norm(), 0.1 * std::sqrt(5.0));
}

TEST(Whitener, RepeatedVectorIsDegenerate) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Ones(10, 3);
  EXPECT_EQ(CodeOf([&] { TrainWhitener(rows); }), ErrorCode::kDegenerate);
}

TEST(LengthNorm, Examples) {
  Eigen::VectorXd e = Eigen::VectorXd::Unit(4, 1);
  EXPECT_NEAR(LengthNorm(e).norm(), 2.0, 1e-15);
  oracle::Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd v = oracle::StandardNormal(rng, 7);
    Eigen::VectorXd out = LengthNorm(v);
    EXPECT_NEAR(out.normalized().dot(v.normalized()), 1.0, 1e-12);
  }
  EXPECT_EQ(CodeOf([] { LengthNorm(Eigen::VectorXd::Zero(3)); }), ErrorCode::kZeroVector);
}

}  // namespace
}  // namespace diadet
