// core/include/diadet/archive.hpp

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

#include <map>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "diadet/embedding.hpp"
#include "diadet/frontend.hpp"
#include "diadet/plda.hpp"
#include "diadet/vb.hpp"

namespace diadet {

// Binary archives: one text header line followed by little-endian float64
// values in row-major order.
//   features    "frames dims frame_shift frame_length kind"
//   embeddings  "count dim", then per item onset, duration, vector
//   plda        "E", then mu, B, W
//   whitener    "E", then mean, transform
//   posterior   "T S frame_shift", then Q
std::string EncodeFeatures(const FeatureMatrix &feat);
FeatureMatrix DecodeFeatures(std::string_view bytes);

std::string EncodeEmbeddings(const EmbeddingStream &stream);
EmbeddingStream DecodeEmbeddings(std::string_view bytes, const std::string &recording_id);

std::string EncodePlda(const PldaModel &model);
PldaModel DecodePlda(std::string_view bytes);

std::string EncodeWhitener(const Whitener &whitener);
Whitener DecodeWhitener(std::string_view bytes);

std::string EncodePosterior(const SpeakerPosterior &posterior);
SpeakerPosterior DecodePosterior(std::string_view bytes);

// Text vectors, one "id v1 ... vE" per line with round-trip precision.
std::string EmitVectors(const std::map<std::string, Eigen::VectorXd> &vectors);
std::map<std::string, Eigen::VectorXd> ParseVectors(std::string_view text);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace diadet
