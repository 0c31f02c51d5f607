// core/src/config.cpp

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

#include "diadet/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>

#include "diadet/archive.hpp"
#include "diadet/error.hpp"
#include "text_util.hpp"

namespace diadet {

namespace {

struct Key {
  std::string name;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

std::string Trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void Invalid(const std::string &key, std::string_view value) {
  Fail(ErrorCode::kConfigInvalid, key + ": cannot parse \"" + std::string(value) + "\"");
}

[[noreturn]] void Range(const std::string &key, const std::string &rule) {
  Fail(ErrorCode::kOutOfRange, key + " " + rule);
}

using Check = std::function<bool(double)>;

Key Real(const std::string &name, double *field, Check ok, const std::string &rule) {
  return Key{name,
             [=](std::string_view v) {
               double x;
               if (!text::ParseDouble(v, &x)) Invalid(name, v);
               if (!ok(x)) Range(name, rule);
               *field = x;
             },
             [=] { return text::Printf("%g", *field); }};
}

Key Integer(const std::string &name, int *field, long long lo, long long hi) {
  return Key{name,
             [=](std::string_view v) {
               long long x;
               if (!text::ParseInt(v, &x)) Invalid(name, v);
               if (x < lo || x > hi)
                 Range(name, "must lie in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
               *field = static_cast<int>(x);
             },
             [=] { return std::to_string(*field); }};
}

Key Flag(const std::string &name, bool *field) {
  return Key{name,
             [=](std::string_view v) {
               if (v == "true" || v == "1" || v == "on" || v == "yes") *field = true;
               else if (v == "false" || v == "0" || v == "off" || v == "no") *field = false;
               else Invalid(name, v);
             },
             [=] { return std::string(*field ? "true" : "false"); }};
}

Key Text(const std::string &name, std::string *field) {
  return Key{name, [=](std::string_view v) { *field = std::string(v); },
             [=] { return *field; }};
}

std::vector<Key> KeyTable(PipelineConfig *c) {
  auto pos = [](double x) { return x > 0.0; };
  auto nonneg = [](double x) { return x >= 0.0; };
  auto open01 = [](double x) { return x > 0.0 && x < 1.0; };
  auto finite = [](double x) { return std::isfinite(x); };
  FrontendConfig &fe = c->diarizer.frontend;
  ExtractorConfig &ex = c->diarizer.extractor;
  DetectionConfig &det = c->detection;
  std::vector<Key> keys = {
      Key{"frontend.kind",
          [c](std::string_view v) {
            try {
              c->diarizer.feature_kind = ParseFeatureKind(std::string(v));
            } catch (const Error &) {
              Invalid("frontend.kind", v);
            }
          },
          [c] { return std::string(FeatureKindName(c->diarizer.feature_kind)); }},
      Integer("frontend.n_coeffs", &fe.n_coeffs, 1, 256),
      Integer("frontend.n_mels", &fe.n_mels, 1, 256),
      Real("frontend.frame_length", &fe.frame_length, pos, "must be > 0"),
      Real("frontend.frame_shift", &fe.frame_shift, pos, "must be > 0"),
      Real("frontend.preemphasis", &fe.preemphasis,
           [](double x) { return x >= 0.0 && x < 1.0; }, "must lie in [0, 1)"),
      Real("frontend.norm_window", &fe.norm_window, pos, "must be > 0"),
      Real("frontend.energy_floor", &fe.energy_floor, pos, "must be > 0"),
      Real("frontend.low_freq", &fe.low_freq, nonneg, "must be >= 0"),
      Real("frontend.high_freq", &fe.high_freq, finite, "must be finite"),
      Flag("frontend.normalize", &c->diarizer.normalize),
      Real("vad.threshold_offset_db", &c->vad.threshold_offset_db, finite, "must be finite"),
      Real("vad.min_speech", &c->vad.min_speech, nonneg, "must be >= 0"),
      Real("vad.min_silence", &c->vad.min_silence, nonneg, "must be >= 0"),
      Integer("vad.median_width", &c->vad.median_width, 1, 101),
      Real("extractor.window_length", &ex.window_length, pos, "must be > 0"),
      Real("extractor.window_shift", &ex.window_shift, pos, "must be > 0"),
      Real("extractor.min_speech_per_window", &ex.min_speech_per_window, nonneg,
           "must be >= 0"),
      Text("extractor.whitener", &c->whitener),
      Text("plda.model", &c->plda_model),
      Real("diarizer.threshold", &c->diarizer.ahc_threshold, finite, "must be finite"),
      Real("diarizer.p_loop", &c->diarizer.vb.p_loop, open01, "must lie in (0, 1)"),
      Integer("diarizer.n_iter", &c->diarizer.vb.n_iter, 1, 1000),
      Real("diarizer.min_posterior_floor", &c->diarizer.vb.min_posterior_floor,
           [](double x) { return x >= 0.0 && x < 0.01; }, "must lie in [0, 0.01)"),
      Flag("diarizer.enhance", &c->diarizer.enhance),
      Flag("diarizer.vb_reseg", &c->diarizer.vb_reseg),
      Flag("diarizer.overlap_assign", &c->diarizer.overlap_assign),
      Key{"detection.durations",
          [&det](std::string_view v) {
            std::vector<int> out;
            std::string s(v);
            std::replace(s.begin(), s.end(), ',', ' ');
            for (auto f : text::SplitFields(s)) {
              long long d;
              if (!text::ParseInt(f, &d)) Invalid("detection.durations", v);
              if (d != 5 && d != 15 && d != 30)
                Range("detection.durations", "entries must be 5, 15 or 30");
              out.push_back(static_cast<int>(d));
            }
            if (out.empty()) Invalid("detection.durations", v);
            det.durations = out;
          },
          [&det] {
            std::string s;
            for (int d : det.durations) s += (s.empty() ? "" : ",") + std::to_string(d);
            return s;
          }},
      Real("detection.chunk_length", &det.chunk_length, pos, "must be > 0"),
      Real("detection.min_speech", &det.min_speech, nonneg, "must be >= 0"),
      Key{"detection.mode",
          [&det](std::string_view v) {
            if (v == "diarized") det.mode = ScoringMode::kDiarized;
            else if (v == "sliding") det.mode = ScoringMode::kSliding;
            else Invalid("detection.mode", v);
          },
          [&det] { return std::string(ScoringModeName(det.mode)); }},
      Real("detection.p_target", &det.dcf.p_target, open01, "must lie in (0, 1)"),
      Real("detection.c_miss", &det.dcf.c_miss, pos, "must be > 0"),
      Real("detection.c_fa", &det.dcf.c_fa, pos, "must be > 0"),
      Text("paths.input", &c->input),
      Text("paths.output", &c->output),
      Key{"run.seed",
          [c](std::string_view v) {
            unsigned long long x;
            auto res = std::from_chars(v.data(), v.data() + v.size(), x);
            if (res.ec != std::errc() || res.ptr != v.data() + v.size())
              Invalid("run.seed", v);
            c->seed = x;
          },
          [c] { return std::to_string(c->seed); }},
  };
  return keys;
}

std::string Suggest(const std::string &key, const std::vector<Key> &keys) {
  int best = std::numeric_limits<int>::max();
  std::string match;
  for (const auto &k : keys) {
    const int d = Levenshtein(key, k.name);
    if (d < best) {
      best = d;
      match = k.name;
    }
  }
  return best <= 3 ? match : "";
}

}  // namespace

int Levenshtein(std::string_view a, std::string_view b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> ConfigKeys() {
  PipelineConfig c;
  std::vector<std::string> out;
  for (const auto &k : KeyTable(&c)) out.push_back(k.name);
  return out;
}

PipelineConfig ParseConfig(std::string_view body, bool check_paths) {
  PipelineConfig cfg;
  std::vector<Key> keys = KeyTable(&cfg);
  std::string section;
  std::set<std::string> seen;
  text::ForEachLine(body, [&](std::string_view raw, int no) {
    std::string line = Trim(raw.substr(0, std::min(raw.find('#'), raw.find(';'))));
    if (line.empty()) return;
    if (line.front() == '[') {
      if (line.back() != ']')
        Fail(ErrorCode::kConfigInvalid, "unterminated section header at line " +
                                            std::to_string(no), no);
      section = Trim(std::string_view(line).substr(1, line.size() - 2));
      return;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kConfigInvalid, "expected key = value at line " + std::to_string(no),
           no);
    const std::string name = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    const std::string dotted = section.empty() ? name : section + "." + name;
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const Key &k) { return k.name == dotted; });
    if (it == keys.end()) {
      std::string hint = Suggest(dotted, keys);
      Fail(ErrorCode::kUnknownKey,
           dotted + (hint.empty() ? "" : " (did you mean " + hint + "?)"), no);
    }
    if (!seen.insert(dotted).second)
      Fail(ErrorCode::kConfigInvalid, dotted + " given twice", no);
    it->set(value);
  });
  if (cfg.diarizer.frontend.n_coeffs > cfg.diarizer.frontend.n_mels)
    Range("frontend.n_coeffs", "must not exceed frontend.n_mels");
  if (check_paths) {
    for (const auto &[key, path] : {std::pair<std::string, std::string>{"plda.model",
                                                                        cfg.plda_model},
                                    {"extractor.whitener", cfg.whitener},
                                    {"paths.input", cfg.input}})
      if (!path.empty() && !std::filesystem::exists(path))
        Fail(ErrorCode::kMissingPath, key + ": " + path);
  }
  return cfg;
}

PipelineConfig LoadConfig(const std::string &path, bool check_paths) {
  if (!std::filesystem::exists(path)) Fail(ErrorCode::kMissingPath, path);
  return ParseConfig(ReadFile(path), check_paths);
}

std::string DescribeConfig(const PipelineConfig &cfg) {
  PipelineConfig copy = cfg;
  std::string out;
  for (const auto &k : KeyTable(&copy)) out += k.name + " = " + k.get() + "\n";
  return out;
}

}  // namespace diadet
