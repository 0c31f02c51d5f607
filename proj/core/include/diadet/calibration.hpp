// core/include/diadet/calibration.hpp

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

#include <span>
#include <string>
#include <vector>

namespace diadet {

// Affine score-to-LLR map s -> a s + b with a > 0.
struct Calibration {
  double a = 1.0;
  double b = 0.0;

  double Apply(double score) const { return a * score + b; }
  std::vector<double> Apply(std::span<const double> scores) const;
};

struct CalibrationOptions {
  double effective_prior = 0.05;
  double ridge = 1e-6;
  double gradient_tolerance = 1e-8;
  int max_iter = 200;
};

// Prior-weighted logistic regression. Non-finite scores are ignored.
Calibration Calibrate(std::span<const double> target,
                      std::span<const double> nontarget,
                      const CalibrationOptions &opts = {});

// Weighted cross-entropy of the calibrated scores (the objective without
// the ridge term), in nats.
double CalibrationLoss(std::span<const double> target,
                       std::span<const double> nontarget, const Calibration &cal,
                       double effective_prior);

// "a b" on one line.
std::string EmitCalibration(const Calibration &cal);
Calibration ParseCalibration(const std::string &text);

}  // namespace diadet
