// core/include/diadet/config.hpp

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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diadet/detection.hpp"
#include "diadet/diarizer.hpp"
#include "diadet/frontend.hpp"
#include "diadet/metrics.hpp"

namespace diadet {

struct DetectionConfig {
  std::vector<int> durations{5, 15, 30};
  double chunk_length = 60.0;
  double min_speech = 5.0;
  ScoringMode mode = ScoringMode::kDiarized;
  DcfParams dcf;
};

struct PipelineConfig {
  DiarizerConfig diarizer;
  VadConfig vad;
  std::string plda_model;  // paths; empty when unset
  std::string whitener;
  DetectionConfig detection;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
};

// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
// comments. Unknown keys, unparsable values and out-of-range values are
// rejected with the dotted key in the message; referenced input paths must
// exist when `check_paths` is set.
PipelineConfig ParseConfig(std::string_view text, bool check_paths = true);
PipelineConfig LoadConfig(const std::string &path, bool check_paths = true);

// Every key with its current value, one "section.key = value" per line.
std::string DescribeConfig(const PipelineConfig &cfg);

// Known dotted keys, in declaration order.
std::vector<std::string> ConfigKeys();

// Edit distance, used for key suggestions.
int Levenshtein(std::string_view a, std::string_view b);

}  // namespace diadet
