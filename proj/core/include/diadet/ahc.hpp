// diadet/ahc.hpp

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

namespace diadet {

// Per-item cluster index in [0, n_clusters), numbered by first occurrence.
using ClusterLabels = std::vector<int>;

int NumClusters(const ClusterLabels &labels);

// Average-linkage agglomerative clustering over a similarity matrix. The
// pair with the highest mean cross score is merged while that score is at
// least `threshold`; ties go to the lowest (i, j) cluster pair, where a
// cluster is identified by its smallest member. The diagonal is ignored.
ClusterLabels Ahc(const Eigen::MatrixXd &scores, double threshold);

}  // namespace diadet
