// core/src/ahc.cpp

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

#include "diadet/ahc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diadet/error.hpp"

namespace diadet {

int NumClusters(const ClusterLabels &labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

ClusterLabels Ahc(const Eigen::MatrixXd &scores, double threshold) {
  const Eigen::Index n = scores.rows();
  if (scores.cols() != n)
    Fail(ErrorCode::kDimensionMismatch, "score matrix must be square");
  if (n == 0) return {};

  // sums(i, j): total cross score between the clusters represented by i, j.
  Eigen::MatrixXd sums = scores;
  sums.diagonal().setZero();
  std::vector<double> sizes(n, 1.0);
  std::vector<bool> active(n, true);
  std::vector<Eigen::Index> owner(n);
  for (Eigen::Index i = 0; i < n; ++i) owner[i] = i;

  while (true) {
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        double link = sums(i, j) / (sizes[i] * sizes[j]);
        if (link > best) {
          best = link;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0 || !(best >= threshold)) break;
    sums.row(bi) += sums.row(bj);
    sums.col(bi) += sums.col(bj);
    sums(bi, bi) = 0.0;
    sizes[bi] += sizes[bj];
    active[bj] = false;
    for (auto &o : owner)
      if (o == bj) o = bi;
  }

  ClusterLabels labels(n);
  std::vector<int> renumber(n, -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (renumber[owner[i]] < 0) renumber[owner[i]] = next++;
    labels[i] = renumber[owner[i]];
  }
  return labels;
}

}  // namespace diadet
