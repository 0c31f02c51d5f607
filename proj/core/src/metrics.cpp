// core/src/metrics.cpp

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

#include "diadet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <Eigen/Core>

#include "diadet/error.hpp"
#include "diadet/hungarian.hpp"

namespace diadet {

namespace {

std::string Format(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Timeline ScoringRegions(const Annotation &ref, const Annotation &hyp,
                        const UemMap &uem, const DerOptions &opts) {
  Timeline regions{ref.recording_id, {}};
  if (uem.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto *a : {&ref, &hyp})
      for (const auto &e : a->entries) {
        lo = std::min(lo, e.segment.onset);
        hi = std::max(hi, e.segment.offset());
      }
    if (hi > lo) regions.segments.push_back(Segment{lo, hi - lo});
  } else {
    auto it = uem.find(ref.recording_id);
    if (it == uem.end()) Fail(ErrorCode::kUnknownRecording, ref.recording_id);
    regions = Support(it->second, 0.0);
  }
  Timeline excluded{ref.recording_id, {}};
  if (opts.collar > 0.0)
    for (const auto &e : ref.entries)
      for (double b : {e.segment.onset, e.segment.offset()}) {
        const double lo = std::max(0.0, b - opts.collar);
        excluded.segments.push_back(Segment{lo, b + opts.collar - lo});
      }
  if (!opts.score_overlap)
    for (const auto &s : OverlapRegions(ref).segments)
      excluded.segments.push_back(s);
  if (!excluded.segments.empty())
    regions = Subtract(regions, Support(excluded, 0.0));
  return regions;
}

// Per-speaker unions restricted to the scoring regions, as index-tagged
// boundary events.
struct Event {
  double time;
  int speaker;
  int delta;
};

std::vector<Event> SpeakerEvents(const Annotation &a, const Timeline &regions,
                                 std::vector<std::string> *names) {
  *names = a.Speakers();
  std::vector<Event> events;
  for (size_t s = 0; s < names->size(); ++s) {
    Timeline t = Crop(Support(a.SpeakerTimeline((*names)[s]), 0.0), regions);
    for (const auto &seg : Support(t, 0.0).segments) {
      events.push_back(Event{seg.onset, static_cast<int>(s), +1});
      events.push_back(Event{seg.offset(), static_cast<int>(s), -1});
    }
  }
  return events;
}

struct Piece {
  double length;
  std::vector<int> ref;
  std::vector<int> hyp;
};

}  // namespace

DerBreakdown &DerBreakdown::operator+=(const DerBreakdown &o) {
  false_alarm_s += o.false_alarm_s;
  miss_s += o.miss_s;
  confusion_s += o.confusion_s;
  total_s += o.total_s;
  return *this;
}

DerBreakdown DerComponents(const Annotation &ref, const Annotation &hyp,
                           const UemMap &uem, const DerOptions &opts) {
  if (opts.collar < 0.0) Fail(ErrorCode::kOutOfRange, "collar must be >= 0");
  const Timeline regions = ScoringRegions(ref, hyp, uem, opts);
  std::vector<std::string> ref_names, hyp_names;
  std::vector<Event> events = SpeakerEvents(ref, regions, &ref_names);
  const int n_ref = static_cast<int>(ref_names.size());
  for (const auto &e : SpeakerEvents(hyp, regions, &hyp_names))
    events.push_back(Event{e.time, e.speaker + n_ref, e.delta});
  const int n_hyp = static_cast<int>(hyp_names.size());
  std::sort(events.begin(), events.end(),
            [](const Event &a, const Event &b) { return a.time < b.time; });

  std::vector<int> active(n_ref + n_hyp, 0);
  std::vector<Piece> pieces;
  Eigen::MatrixXd cooccur = Eigen::MatrixXd::Zero(n_ref, n_hyp);
  size_t i = 0;
  while (i < events.size()) {
    const double t = events[i].time;
    while (i < events.size() && events[i].time == t) {
      active[events[i].speaker] += events[i].delta;
      ++i;
    }
    if (i == events.size()) break;
    const double len = events[i].time - t;
    if (len <= 0.0) continue;
    Piece p{len, {}, {}};
    for (int s = 0; s < n_ref; ++s)
      if (active[s] > 0) p.ref.push_back(s);
    for (int h = 0; h < n_hyp; ++h)
      if (active[n_ref + h] > 0) p.hyp.push_back(h);
    if (p.ref.empty() && p.hyp.empty()) continue;
    for (int r : p.ref)
      for (int h : p.hyp) cooccur(r, h) += len;
    pieces.push_back(std::move(p));
  }

  const std::vector<int> map = MaxWeightAssignment(cooccur);
  DerBreakdown out;
  for (const auto &p : pieces) {
    const double nr = static_cast<double>(p.ref.size());
    const double nh = static_cast<double>(p.hyp.size());
    double correct = 0.0;
    for (int r : p.ref)
      if (map[r] >= 0 && std::find(p.hyp.begin(), p.hyp.end(), map[r]) != p.hyp.end())
        correct += 1.0;
    out.total_s += p.length * nr;
    out.miss_s += p.length * std::max(nr - nh, 0.0);
    out.false_alarm_s += p.length * std::max(nh - nr, 0.0);
    out.confusion_s += p.length * (std::min(nr, nh) - correct);
  }
  return out;
}

DerBreakdown Der(const Annotation &ref, const Annotation &hyp,
                 const UemMap &uem, const DerOptions &opts) {
  DerBreakdown out = DerComponents(ref, hyp, uem, opts);
  if (out.total_s <= 0.0)
    Fail(ErrorCode::kEmptyReference, "no scored reference speech in " + ref.recording_id);
  return out;
}

DerBreakdown Der(const std::vector<Annotation> &refs,
                 const std::vector<Annotation> &hyps, const UemMap &uem,
                 const DerOptions &opts) {
  std::map<std::string, const Annotation *> by_id;
  for (const auto &h : hyps) by_id[h.recording_id] = &h;
  DerBreakdown out;
  for (const auto &r : refs) {
    auto it = by_id.find(r.recording_id);
    Annotation empty{r.recording_id, {}};
    out += DerComponents(r, it == by_id.end() ? empty : *it->second, uem, opts);
  }
  if (out.total_s <= 0.0) Fail(ErrorCode::kEmptyReference, "no scored reference speech");
  return out;
}

void DcfParams::Validate() const {
  if (!(p_target > 0.0 && p_target < 1.0))
    Fail(ErrorCode::kOutOfRange, "p_target must lie in (0, 1)");
  if (!(c_miss > 0.0) || !(c_fa > 0.0))
    Fail(ErrorCode::kOutOfRange, "detection costs must be positive");
}

double DcfParams::BayesThreshold() const {
  return std::log(c_fa * (1.0 - p_target) / (c_miss * p_target));
}

double DcfParams::Normalizer() const {
  return std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

namespace {

struct RocPoint {
  double pmiss;
  double pfa;
};

// Operating points for thresholds at -inf, every distinct score, and +inf.
std::vector<RocPoint> RocPoints(std::span<const double> target,
                                std::span<const double> nontarget) {
  if (target.empty() || nontarget.empty())
    Fail(ErrorCode::kEmptyClass, "detection metrics need both trial classes");
  for (auto *list : {&target, &nontarget})
    for (double s : *list)
      if (std::isnan(s)) Fail(ErrorCode::kInvalidArgument, "NaN score");
  std::vector<double> tar(target.begin(), target.end());
  std::vector<double> non(nontarget.begin(), nontarget.end());
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), tar.begin(), tar.end());
  thresholds.insert(thresholds.end(), non.begin(), non.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::vector<RocPoint> out;
  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  for (double th : thresholds) {
    // misses: targets <= th; false alarms: nontargets > th
    const double miss = std::upper_bound(tar.begin(), tar.end(), th) - tar.begin();
    const double fa = non.end() - std::upper_bound(non.begin(), non.end(), th);
    out.push_back(RocPoint{miss / nt, fa / nn});
  }
  return out;
}

double Cross(const RocPoint &o, const RocPoint &a, const RocPoint &b) {
  return (a.pfa - o.pfa) * (b.pmiss - o.pmiss) - (a.pmiss - o.pmiss) * (b.pfa - o.pfa);
}

// min over the segment p..q of max(pmiss, pfa).
double SegmentMinMax(const RocPoint &p, const RocPoint &q) {
  double best = std::min(std::max(p.pmiss, p.pfa), std::max(q.pmiss, q.pfa));
  const double dp = p.pmiss - p.pfa;
  const double dq = q.pmiss - q.pfa;
  if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
    const double lambda = dp / (dp - dq);
    best = std::min(best, p.pfa + lambda * (q.pfa - p.pfa));
  }
  return best;
}

}  // namespace

double Eer(std::span<const double> target, std::span<const double> nontarget) {
  std::vector<RocPoint> pts = RocPoints(target, nontarget);
  std::sort(pts.begin(), pts.end(), [](const RocPoint &a, const RocPoint &b) {
    return a.pfa < b.pfa || (a.pfa == b.pfa && a.pmiss < b.pmiss);
  });
  std::vector<RocPoint> hull;
  for (const auto &p : pts) {
    while (hull.size() >= 2 && Cross(hull[hull.size() - 2], hull.back(), p) <= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  double eer = std::max(hull.front().pmiss, hull.front().pfa);
  for (size_t i = 0; i + 1 < hull.size(); ++i)
    eer = std::min(eer, SegmentMinMax(hull[i], hull[i + 1]));
  return eer;
}

DcfResult Dcf(std::span<const double> target, std::span<const double> nontarget,
              const DcfParams &params) {
  params.Validate();
  const std::vector<RocPoint> pts = RocPoints(target, nontarget);
  const double wm = params.c_miss * params.p_target / params.Normalizer();
  const double wf = params.c_fa * (1.0 - params.p_target) / params.Normalizer();
  DcfResult out;
  out.min_dcf = std::numeric_limits<double>::infinity();
  for (const auto &p : pts) out.min_dcf = std::min(out.min_dcf, wm * p.pmiss + wf * p.pfa);
  const double th = params.BayesThreshold();
  double miss = 0.0, fa = 0.0;
  for (double s : target) miss += !(s > th);
  for (double s : nontarget) fa += s > th;
  out.act_dcf = wm * miss / target.size() + wf * fa / nontarget.size();
  return out;
}

DetMetrics EvaluateDetection(std::span<const double> target,
                             std::span<const double> nontarget,
                             const DcfParams &params) {
  DcfResult d = Dcf(target, nontarget, params);
  return DetMetrics{Eer(target, nontarget), d.min_dcf, d.act_dcf};
}

double RelImprovement(double baseline, double improved) {
  if (!(baseline > 0.0))
    Fail(ErrorCode::kNonpositiveBaseline, Format("%g", baseline));
  return 100.0 * (baseline - improved) / baseline;
}

std::string FormatDerTable(const std::vector<DerRow> &rows,
                           const DerOptions &opts) {
  size_t width = 6;
  for (const auto &r : rows) width = std::max(width, r.name.size());
  std::string out = "# collar=" + Format("%.3f", opts.collar) +
                    " score_overlap=" + (opts.score_overlap ? "true" : "false") + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %8s %8s %8s %8s\n", static_cast<int>(width),
                "System", "DER", "FA", "Miss", "Conf");
  out += line;
  for (const auto &r : rows) {
    std::snprintf(line, sizeof line, "%-*s %8.2f %8.2f %8.2f %8.2f\n",
                  static_cast<int>(width), r.name.c_str(), r.der.der(), r.der.fa_pct(),
                  r.der.miss_pct(), r.der.conf_pct());
    out += line;
  }
  return out;
}

std::string FormatDerKeyValues(const std::vector<DerRow> &rows) {
  std::string out;
  for (const auto &r : rows) {
    const std::string p = r.name + ".";
    out += p + "der=" + Format("%.4f", r.der.der()) + "\n";
    out += p + "fa=" + Format("%.4f", r.der.fa_pct()) + "\n";
    out += p + "miss=" + Format("%.4f", r.der.miss_pct()) + "\n";
    out += p + "conf=" + Format("%.4f", r.der.conf_pct()) + "\n";
    out += p + "total_s=" + Format("%.3f", r.der.total_s) + "\n";
  }
  return out;
}

std::string FormatDetTable(const std::vector<DetRow> &rows,
                           const DcfParams &params) {
  size_t width = 6;
  for (const auto &r : rows) width = std::max(width, r.name.size());
  std::string out = "# p_target=" + Format("%g", params.p_target) +
                    " c_miss=" + Format("%g", params.c_miss) +
                    " c_fa=" + Format("%g", params.c_fa) + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %8s %8s %8s\n", static_cast<int>(width),
                "System", "EER%", "minDCF", "actDCF");
  out += line;
  for (const auto &r : rows) {
    std::snprintf(line, sizeof line, "%-*s %8.2f %8.3f %8.3f\n", static_cast<int>(width),
                  r.name.c_str(), 100.0 * r.det.eer, r.det.min_dcf, r.det.act_dcf);
    out += line;
  }
  return out;
}

std::string FormatDetKeyValues(const std::vector<DetRow> &rows) {
  std::string out;
  for (const auto &r : rows) {
    const std::string p = r.name + ".";
    out += p + "eer=" + Format("%.6f", r.det.eer) + "\n";
    out += p + "min_dcf=" + Format("%.6f", r.det.min_dcf) + "\n";
    out += p + "act_dcf=" + Format("%.6f", r.det.act_dcf) + "\n";
  }
  return out;
}

}  // namespace diadet
