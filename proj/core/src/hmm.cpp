// core/src/hmm.cpp

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

#include "diadet/hmm.hpp"

#include <cmath>
#include <limits>

#include "diadet/error.hpp"
#include "diadet/linalg.hpp"

namespace diadet {

ForwardBackwardResult ForwardBackward(const Eigen::MatrixXd &log_emissions,
                                      double p_loop) {
  const Eigen::Index n = log_emissions.rows();
  const Eigen::Index s = log_emissions.cols();
  if (s < 1) Fail(ErrorCode::kInvalidArgument, "need at least one state");
  if (!log_emissions.allFinite())
    Fail(ErrorCode::kInvalidArgument, "log-emissions must be finite");
  if (s > 1 && !(p_loop > 0.0 && p_loop < 1.0))
    Fail(ErrorCode::kOutOfRange, "p_loop must lie in (0, 1)");
  ForwardBackwardResult out;
  out.posterior = Eigen::MatrixXd::Ones(n, s);
  if (n == 0) return out;

  Eigen::MatrixXd log_trans(s, s);
  if (s == 1) {
    log_trans(0, 0) = 0.0;
  } else {
    log_trans.setConstant(std::log((1.0 - p_loop) / (s - 1)));
    log_trans.diagonal().setConstant(std::log(p_loop));
  }

  Eigen::MatrixXd alpha(n, s), beta(n, s);
  alpha.row(0) = log_emissions.row(0).array() - std::log(static_cast<double>(s));
  Eigen::VectorXd scratch(s);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index j = 0; j < s; ++j) {
      scratch = alpha.row(t - 1).transpose() + log_trans.col(j);
      alpha(t, j) = log_emissions(t, j) + linalg::LogSumExp(scratch);
    }
  beta.row(n - 1).setZero();
  for (Eigen::Index t = n - 2; t >= 0; --t)
    for (Eigen::Index i = 0; i < s; ++i) {
      scratch = log_trans.row(i).transpose() +
                log_emissions.row(t + 1).transpose() +
                beta.row(t + 1).transpose();
      beta(t, i) = linalg::LogSumExp(scratch);
    }
  out.log_likelihood = linalg::LogSumExp(alpha.row(n - 1).transpose());
  Eigen::MatrixXd joint = alpha + beta;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double norm = linalg::LogSumExp(joint.row(t).transpose());
    out.posterior.row(t) = (joint.row(t).array() - norm).exp();
    out.posterior.row(t) /= out.posterior.row(t).sum();
  }
  return out;
}

}  // namespace diadet
