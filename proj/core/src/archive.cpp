// core/src/archive.cpp

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

#include "diadet/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "diadet/error.hpp"
#include "text_util.hpp"

namespace diadet {

static_assert(std::endian::native == std::endian::little,
              "archives are written in host byte order");

namespace {

class Writer {
 public:
  explicit Writer(const std::string &header) : out_(header + "\n") {}
  void Put(double v) { out_.append(reinterpret_cast<const char *>(&v), sizeof v); }
  void Put(const Eigen::MatrixXd &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) Put(m(r, c));
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view bytes, const char *what) : what_(what) {
    const size_t nl = bytes.find('\n');
    if (nl == std::string_view::npos) Fail(ErrorCode::kTruncatedFile, what_ + ": no header");
    header_ = text::SplitFields(bytes.substr(0, nl));
    body_ = bytes.substr(nl + 1);
  }
  size_t fields() const { return header_.size(); }
  std::string_view field(size_t i) const { return header_.at(i); }
  long long Int(size_t i) const {
    long long v;
    if (i >= header_.size() || !text::ParseInt(header_[i], &v) || v < 0)
      Fail(ErrorCode::kUnsupportedFormat, what_ + ": bad header");
    return v;
  }
  double Real(size_t i) const {
    double v;
    if (i >= header_.size() || !text::ParseDouble(header_[i], &v))
      Fail(ErrorCode::kUnsupportedFormat, what_ + ": bad header");
    return v;
  }
  void Expect(size_t n_values) const {
    if (body_.size() != n_values * sizeof(double))
      Fail(ErrorCode::kTruncatedFile, what_ + ": expected " + std::to_string(n_values) +
                                          " values, found " +
                                          std::to_string(body_.size() / sizeof(double)));
  }
  double Get() {
    double v;
    std::memcpy(&v, body_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  Eigen::MatrixXd Get(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = Get();
    return m;
  }

 private:
  std::string what_;
  std::vector<std::string_view> header_;
  std::string_view body_;
  size_t pos_ = 0;
};

std::string Num(double v) { return text::Printf("%.17g", v); }

}  // namespace

std::string EncodeFeatures(const FeatureMatrix &feat) {
  Writer w(std::to_string(feat.frames()) + " " + std::to_string(feat.dims()) + " " +
           Num(feat.frame_shift) + " " + Num(feat.frame_length) + " " +
           FeatureKindName(feat.kind));
  w.Put(feat.values);
  return w.Take();
}

FeatureMatrix DecodeFeatures(std::string_view bytes) {
  Reader r(bytes, "features");
  if (r.fields() != 5) Fail(ErrorCode::kUnsupportedFormat, "features: bad header");
  FeatureMatrix f;
  const long long n = r.Int(0), d = r.Int(1);
  f.frame_shift = r.Real(2);
  f.frame_length = r.Real(3);
  f.kind = ParseFeatureKind(std::string(r.field(4)));
  r.Expect(n * d);
  f.values = r.Get(n, d);
  return f;
}

std::string EncodeEmbeddings(const EmbeddingStream &stream) {
  Writer w(std::to_string(stream.size()) + " " + std::to_string(stream.dim()));
  for (const auto &e : stream.items) {
    w.Put(e.window.onset);
    w.Put(e.window.duration);
    w.Put(Eigen::MatrixXd(e.vector.transpose()));
  }
  return w.Take();
}

EmbeddingStream DecodeEmbeddings(std::string_view bytes, const std::string &recording_id) {
  Reader r(bytes, "embeddings");
  if (r.fields() != 2) Fail(ErrorCode::kUnsupportedFormat, "embeddings: bad header");
  const long long n = r.Int(0), d = r.Int(1);
  r.Expect(n * (d + 2));
  EmbeddingStream s{recording_id, {}};
  for (long long i = 0; i < n; ++i) {
    Embedding e;
    e.window.onset = r.Get();
    e.window.duration = r.Get();
    e.vector = r.Get(d, 1);
    e.recording_id = recording_id;
    s.items.push_back(std::move(e));
  }
  return s;
}

std::string EncodePlda(const PldaModel &model) {
  Writer w(std::to_string(model.dim()));
  w.Put(Eigen::MatrixXd(model.mu.transpose()));
  w.Put(model.between);
  w.Put(model.within);
  return w.Take();
}

PldaModel DecodePlda(std::string_view bytes) {
  Reader r(bytes, "plda");
  if (r.fields() != 1) Fail(ErrorCode::kUnsupportedFormat, "plda: bad header");
  const long long e = r.Int(0);
  r.Expect(e + 2 * e * e);
  PldaModel m;
  m.mu = r.Get(e, 1);
  m.between = r.Get(e, e);
  m.within = r.Get(e, e);
  return m;
}

std::string EncodeWhitener(const Whitener &whitener) {
  Writer w(std::to_string(whitener.dim()));
  w.Put(Eigen::MatrixXd(whitener.mean.transpose()));
  w.Put(whitener.transform);
  return w.Take();
}

Whitener DecodeWhitener(std::string_view bytes) {
  Reader r(bytes, "whitener");
  if (r.fields() != 1) Fail(ErrorCode::kUnsupportedFormat, "whitener: bad header");
  const long long e = r.Int(0);
  r.Expect(e + e * e);
  Whitener w;
  w.mean = r.Get(e, 1);
  w.transform = r.Get(e, e);
  return w;
}

std::string EncodePosterior(const SpeakerPosterior &posterior) {
  Writer w(std::to_string(posterior.frames()) + " " + std::to_string(posterior.speakers()) +
           " " + Num(posterior.frame_shift));
  w.Put(posterior.q);
  return w.Take();
}

SpeakerPosterior DecodePosterior(std::string_view bytes) {
  Reader r(bytes, "posterior");
  if (r.fields() != 3) Fail(ErrorCode::kUnsupportedFormat, "posterior: bad header");
  const long long t = r.Int(0), s = r.Int(1);
  SpeakerPosterior p;
  p.frame_shift = r.Real(2);
  r.Expect(t * s);
  p.q = r.Get(t, s);
  for (long long k = 0; k < s; ++k) p.speaker_ids.push_back(static_cast<int>(k));
  return p;
}

std::string EmitVectors(const std::map<std::string, Eigen::VectorXd> &vectors) {
  std::string out;
  for (const auto &[id, v] : vectors) {
    out += id;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += " " + Num(v(i));
    out += "\n";
  }
  return out;
}

std::map<std::string, Eigen::VectorXd> ParseVectors(std::string_view body) {
  std::map<std::string, Eigen::VectorXd> out;
  text::ForEachLine(body, [&](std::string_view line, int no) {
    auto f = text::SplitFields(line);
    if (f.empty()) return;
    if (f.size() < 2) Fail(ErrorCode::kMalformedLine, "vector line needs values", no);
    Eigen::VectorXd v(f.size() - 1);
    for (size_t i = 1; i < f.size(); ++i)
      if (!text::ParseDouble(f[i], &v(i - 1)))
        Fail(ErrorCode::kMalformedLine, "non-numeric vector entry", no);
    out[std::string(f[0])] = std::move(v);
  });
  return out;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kMissingPath, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path);
}

}  // namespace diadet
