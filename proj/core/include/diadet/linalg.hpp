// diadet/linalg.hpp

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

#include <Eigen/Core>

namespace diadet::linalg {

// (M + M^T) / 2
Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd &m);

// Eigenvalues of a symmetric matrix clipped at `floor` (PSD projection
// for floor = 0).
Eigen::MatrixXd ClipEigenvalues(const Eigen::MatrixXd &m, double floor);

double MinEigenvalue(const Eigen::MatrixXd &m);

// log|M| and M^{-1} for symmetric positive-definite M; throw
// ErrorCode::kDegenerate when the Cholesky factorisation fails.
double LogDetSpd(const Eigen::MatrixXd &m);
Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd &m);

// Row-sample mean and maximum-likelihood (1/N) covariance.
struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
Moments SampleMoments(const Eigen::MatrixXd &rows);

// log N(x; mean, cov) given the precision matrix and log|cov|.
double LogGaussian(const Eigen::VectorXd &x, const Eigen::VectorXd &mean,
                   const Eigen::MatrixXd &precision, double log_det_cov);

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd> &v);

}  // namespace diadet::linalg
