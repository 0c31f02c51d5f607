// core/src/linalg.cpp

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

#include "diadet/linalg.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "diadet/error.hpp"

namespace diadet::linalg {

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd &m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd ClipEigenvalues(const Eigen::MatrixXd &m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrize(m));
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor);
  return Symmetrize(eig.eigenvectors() * vals.asDiagonal() *
                    eig.eigenvectors().transpose());
}

double MinEigenvalue(const Eigen::MatrixXd &m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrize(m),
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double LogDetSpd(const Eigen::MatrixXd &m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    Fail(ErrorCode::kDegenerate, "matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd &m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    Fail(ErrorCode::kDegenerate, "matrix is not positive definite");
  return Symmetrize(llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols())));
}

Moments SampleMoments(const Eigen::MatrixXd &rows) {
  Moments out;
  const double n = static_cast<double>(rows.rows());
  out.mean = rows.colwise().mean().transpose();
  Eigen::MatrixXd centered = rows.rowwise() - out.mean.transpose();
  out.cov = Symmetrize(centered.transpose() * centered / n);
  return out;
}

double LogGaussian(const Eigen::VectorXd &x, const Eigen::VectorXd &mean,
                   const Eigen::MatrixXd &precision, double log_det_cov) {
  Eigen::VectorXd d = x - mean;
  const double dim = static_cast<double>(x.size());
  return -0.5 * (dim * std::log(2.0 * std::numbers::pi) + log_det_cov +
                 d.dot(precision * d));
}

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd> &v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace diadet::linalg
