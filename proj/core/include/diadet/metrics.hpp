// core/include/diadet/metrics.hpp

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

#include "diadet/timeline.hpp"

namespace diadet {

struct DerBreakdown {
  double false_alarm_s = 0.0;
  double miss_s = 0.0;
  double confusion_s = 0.0;
  double total_s = 0.0;  // scored reference speaker-time

  double der() const { return Pct(false_alarm_s + miss_s + confusion_s); }
  double fa_pct() const { return Pct(false_alarm_s); }
  double miss_pct() const { return Pct(miss_s); }
  double conf_pct() const { return Pct(confusion_s); }

  DerBreakdown &operator+=(const DerBreakdown &o);

 private:
  double Pct(double v) const { return total_s > 0.0 ? 100.0 * v / total_s : 0.0; }
};

struct DerOptions {
  double collar = 0.0;        // excluded on each side of reference boundaries
  bool score_overlap = true;  // false drops regions with >= 2 reference speakers
};

// Interval-based DER with an optimal one-to-one speaker mapping. An empty
// UEM scores the whole span of both annotations.
DerBreakdown Der(const Annotation &ref, const Annotation &hyp,
                 const UemMap &uem = {}, const DerOptions &opts = {});

// Components summed over recordings (matched by recording id) before the
// ratio is formed. Recordings missing from `hyps` count as all-miss.
DerBreakdown Der(const std::vector<Annotation> &refs,
                 const std::vector<Annotation> &hyps, const UemMap &uem = {},
                 const DerOptions &opts = {});

// Per-recording components without the empty-reference check.
DerBreakdown DerComponents(const Annotation &ref, const Annotation &hyp,
                           const UemMap &uem, const DerOptions &opts);

struct DcfParams {
  double p_target = 0.05;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void Validate() const;
  // log(c_fa (1 - p) / (c_miss p)); accept iff llr > threshold.
  double BayesThreshold() const;
  double Normalizer() const;
};

struct DetMetrics {
  double eer = 0.0;
  double min_dcf = 0.0;
  double act_dcf = 0.0;
};

// Trials are accepted iff score > threshold; -inf scores never are.
// Equal error rate on the ROC convex hull.
double Eer(std::span<const double> target, std::span<const double> nontarget);

struct DcfResult {
  double min_dcf = 0.0;
  double act_dcf = 0.0;
};
DcfResult Dcf(std::span<const double> target, std::span<const double> nontarget,
              const DcfParams &params = {});

DetMetrics EvaluateDetection(std::span<const double> target,
                             std::span<const double> nontarget,
                             const DcfParams &params = {});

// 100 (baseline - improved) / baseline.
double RelImprovement(double baseline, double improved);

struct DerRow {
  std::string name;
  DerBreakdown der;
};

struct DetRow {
  std::string name;
  DetMetrics det;
};

// Aligned text tables and their key=value counterparts.
std::string FormatDerTable(const std::vector<DerRow> &rows,
                           const DerOptions &opts);
std::string FormatDerKeyValues(const std::vector<DerRow> &rows);
std::string FormatDetTable(const std::vector<DetRow> &rows,
                           const DcfParams &params);
std::string FormatDetKeyValues(const std::vector<DetRow> &rows);

}  // namespace diadet
