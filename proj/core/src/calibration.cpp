// core/src/calibration.cpp

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

#include "diadet/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Dense>

#include "diadet/error.hpp"

namespace diadet {

namespace {

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> Finite(std::span<const double> v) {
  std::vector<double> out;
  for (double s : v)
    if (std::isfinite(s)) out.push_back(s);
  return out;
}

struct Objective {
  const std::vector<double> &tar;
  const std::vector<double> &non;
  double prior;
  double ridge;

  double Value(const Eigen::Vector2d &w) const {
    const double offset = std::log(prior / (1.0 - prior));
    double f = 0.0;
    for (double s : tar) f += prior / tar.size() * Softplus(-(w(0) * s + w(1) + offset));
    for (double s : non)
      f += (1.0 - prior) / non.size() * Softplus(w(0) * s + w(1) + offset);
    return f + 0.5 * ridge * w.squaredNorm();
  }

  void Derivatives(const Eigen::Vector2d &w, Eigen::Vector2d *g,
                   Eigen::Matrix2d *h) const {
    const double offset = std::log(prior / (1.0 - prior));
    *g = ridge * w;
    *h = ridge * Eigen::Matrix2d::Identity();
    auto add = [&](double s, double weight, double sign) {
      const double z = w(0) * s + w(1) + offset;
      const double p = Sigmoid(sign * z);
      // d/dz softplus(sign z) = sign sigmoid(sign z)
      const Eigen::Vector2d x(s, 1.0);
      *g += weight * sign * p * x;
      *h += weight * p * (1.0 - p) * x * x.transpose();
    };
    for (double s : tar) add(s, prior / tar.size(), -1.0);
    for (double s : non) add(s, (1.0 - prior) / non.size(), +1.0);
  }
};

}  // namespace

std::vector<double> Calibration::Apply(std::span<const double> scores) const {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(Apply(s));
  return out;
}

Calibration Calibrate(std::span<const double> target,
                      std::span<const double> nontarget,
                      const CalibrationOptions &opts) {
  if (!(opts.effective_prior > 0.0 && opts.effective_prior < 1.0))
    Fail(ErrorCode::kOutOfRange, "effective prior must lie in (0, 1)");
  const std::vector<double> tar = Finite(target);
  const std::vector<double> non = Finite(nontarget);
  if (tar.empty() || non.empty())
    Fail(ErrorCode::kDegenerateKeys, "calibration needs target and nontarget scores");
  Objective obj{tar, non, opts.effective_prior, opts.ridge};

  Eigen::Vector2d w(1.0, 0.0);
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::Vector2d g;
    Eigen::Matrix2d h;
    obj.Derivatives(w, &g, &h);
    if (g.norm() < opts.gradient_tolerance) break;
    Eigen::Vector2d step = h.ldlt().solve(-g);
    const double f0 = obj.Value(w);
    double t = 1.0;
    while (t > 1e-12 && obj.Value(w + t * step) > f0 + 1e-4 * t * g.dot(step)) t *= 0.5;
    w += t * step;
  }

  if (w(0) <= 0.0) {
    // Constrained optimum sits on the boundary: keep a tiny slope, refit b.
    w(0) = 1e-6;
    for (int it = 0; it < opts.max_iter; ++it) {
      Eigen::Vector2d g;
      Eigen::Matrix2d h;
      obj.Derivatives(w, &g, &h);
      if (std::abs(g(1)) < opts.gradient_tolerance) break;
      w(1) -= g(1) / h(1, 1);
    }
  }
  return Calibration{w(0), w(1)};
}

double CalibrationLoss(std::span<const double> target,
                       std::span<const double> nontarget, const Calibration &cal,
                       double effective_prior) {
  const std::vector<double> tar = Finite(target);
  const std::vector<double> non = Finite(nontarget);
  if (tar.empty() || non.empty())
    Fail(ErrorCode::kDegenerateKeys, "loss needs target and nontarget scores");
  Objective obj{tar, non, effective_prior, 0.0};
  return obj.Value(Eigen::Vector2d(cal.a, cal.b));
}

std::string EmitCalibration(const Calibration &cal) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", cal.a, cal.b);
  return buf;
}

Calibration ParseCalibration(const std::string &text) {
  std::istringstream in(text);
  Calibration cal;
  if (!(in >> cal.a >> cal.b))
    Fail(ErrorCode::kMalformedLine, "calibration file needs \"a b\"", 1);
  if (!(cal.a > 0.0)) Fail(ErrorCode::kOutOfRange, "calibration scale must be positive");
  return cal;
}

}  // namespace diadet
