// core/src/wav.cpp

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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "diadet/error.hpp"
#include "diadet/frontend.hpp"

namespace diadet {

namespace {

std::uint32_t ReadU32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<std::uint8_t> *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back((v >> (8 * i)) & 0xff);
}

void PutU16(std::vector<std::uint8_t> *out, std::uint16_t v) {
  out->push_back(v & 0xff);
  out->push_back((v >> 8) & 0xff);
}

void PutTag(std::vector<std::uint8_t> *out, const char *tag) {
  out->insert(out->end(), tag, tag + 4);
}

}  // namespace

Waveform ReadWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) Fail(ErrorCode::kTruncatedFile, "no RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kUnsupportedFormat, "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    std::uint32_t size = ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size())
        Fail(ErrorCode::kTruncatedFile, "fmt chunk");
      std::uint16_t format = ReadU16(bytes.data() + body);
      std::uint16_t channels = ReadU16(bytes.data() + body + 2);
      std::uint32_t rate = ReadU32(bytes.data() + body + 4);
      std::uint16_t bits = ReadU16(bytes.data() + body + 14);
      if (format != 1)
        Fail(ErrorCode::kUnsupportedFormat,
             "audio format " + std::to_string(format) + " (PCM required)");
      if (channels != 1)
        Fail(ErrorCode::kUnsupportedFormat,
             std::to_string(channels) + " channels (mono required)");
      if (bits != 16)
        Fail(ErrorCode::kUnsupportedFormat,
             std::to_string(bits) + " bits per sample (16 required)");
      if (rate != 16000)
        Fail(ErrorCode::kUnsupportedFormat,
             "sample rate " + std::to_string(rate) + " (16000 required)");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Fail(ErrorCode::kUnsupportedFormat, "data before fmt");
      if (body + size > bytes.size() || size % 2 != 0)
        Fail(ErrorCode::kTruncatedFile, "data chunk");
      Waveform wave;
      wave.rate = 16000;
      wave.samples.resize(size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        auto v = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        wave.samples[i] = v / 32768.0;
      }
      if (wave.samples.empty()) Fail(ErrorCode::kTruncatedFile, "no samples");
      return wave;
    }
    pos = body + size + (size & 1);
  }
  Fail(ErrorCode::kTruncatedFile, "missing data chunk");
}

Waveform ReadWavFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return ReadWav(bytes);
}

std::vector<std::uint8_t> WriteWav(const Waveform &wave) {
  std::vector<std::uint8_t> out;
  auto data_size = static_cast<std::uint32_t>(wave.samples.size() * 2);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_size);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(wave.rate));
  PutU32(&out, static_cast<std::uint32_t>(wave.rate * 2));
  PutU16(&out, 2);
  PutU16(&out, 16);
  PutTag(&out, "data");
  PutU32(&out, data_size);
  for (double s : wave.samples) {
    double v = std::round(std::clamp(s, -1.0, 32767.0 / 32768.0) * 32768.0);
    PutU16(&out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

}  // namespace diadet
