// diadet/hmm.hpp

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

namespace diadet {

struct ForwardBackwardResult {
  Eigen::MatrixXd posterior;  // T x S state marginals
  double log_likelihood = 0.0;
};

// Exact state marginals of an S-state HMM with a uniform initial
// distribution, self-loop probability `p_loop` and (1 - p_loop) / (S - 1)
// on every other transition. Recursions run in the log domain.
ForwardBackwardResult ForwardBackward(const Eigen::MatrixXd &log_emissions,
                                      double p_loop);

}  // namespace diadet
