// Copyright 2026 The Acton Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acton/motion.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace acton {

namespace {

using json = nlohmann::json;
using Kind = SequenceFormatError::Kind;

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

struct Header {
  double fps;
  std::size_t joints;
  std::size_t frames;
};

Header parse_header(const json& h, const std::string& where) {
  try {
    if (!h.is_object()) throw std::runtime_error("header is not an object");
    if (h.at("version").get<int>() != 1) throw std::runtime_error("unsupported version");
    Header out{h.at("fps").get<double>(), h.at("joints").get<std::size_t>(),
               h.at("frames").get<std::size_t>()};
    if (!(out.fps > 0.0) || out.joints == 0 || out.frames == 0)
      throw std::runtime_error("fps, joints and frames must be positive");
    return out;
  } catch (const std::exception& e) {
    throw SequenceFormatError(Kind::kMalformedHeader, where + ": malformed header: " + e.what());
  }
}

void check_finite(const std::vector<double>& values, const std::string& where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw SequenceFormatError(Kind::kNonFinite,
                                where + ": non-finite value at index " + std::to_string(i));
  }
}

void flatten_numbers(const json& node, std::vector<double>& out, const std::string& where) {
  if (node.is_array()) {
    for (const auto& child : node) flatten_numbers(child, out, where);
  } else if (node.is_number()) {
    out.push_back(node.get<double>());
  } else {
    throw SequenceFormatError(Kind::kNonFinite, where + ": payload entry is not a number");
  }
}

json header_json(const SkeletonSequence& seq) {
  return json{{"version", 1}, {"fps", seq.fps()}, {"joints", seq.joints()}, {"frames", seq.frames()}};
}

}  // namespace

SkeletonSequence::SkeletonSequence(std::size_t frames, std::size_t joints, double fps,
                                   std::vector<double> data)
    : frames_(frames), joints_(joints), fps_(fps), data_(std::move(data)) {
  if (frames_ == 0 || joints_ == 0)
    throw std::invalid_argument("SkeletonSequence: frames and joints must be >= 1");
  if (!(fps_ > 0.0) || !std::isfinite(fps_))
    throw std::invalid_argument("SkeletonSequence: fps must be positive");
  if (data_.size() != frames_ * joints_ * 3)
    throw std::invalid_argument("SkeletonSequence: payload size " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(frames_) + "x" +
                                std::to_string(joints_) + "x3");
  for (double v : data_)
    if (!std::isfinite(v)) throw std::invalid_argument("SkeletonSequence: non-finite value");
}

SkeletonSequence SkeletonSequence::crop(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > frames_) throw std::out_of_range("SkeletonSequence::crop: bad range");
  const std::size_t stride = joints_ * 3;
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                          data_.begin() + static_cast<std::ptrdiff_t>(end * stride));
  return SkeletonSequence(end - begin, joints_, fps_, std::move(out));
}

void LabeledCorpus::validate() const {
  if (frame_labels.size() != sequences.size())
    throw std::invalid_argument("LabeledCorpus: one label array per sequence required");
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (frame_labels[s].size() != sequences[s].frames())
      throw std::invalid_argument("LabeledCorpus: label count differs from frame count in sequence " +
                                  std::to_string(s));
    for (int l : frame_labels[s])
      if (l < 0 || l >= primitive_count)
        throw std::invalid_argument("LabeledCorpus: label out of range in sequence " + std::to_string(s));
  }
}

SkeletonSequence load_sequence(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SequenceFormatError(Kind::kIo, where + ": cannot open");

  if (path.extension() == ".json") {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const std::exception& e) {
      throw SequenceFormatError(Kind::kMalformedHeader, where + ": not valid JSON: " + e.what());
    }
    const Header h = parse_header(doc, where);
    if (!doc.contains("data"))
      throw SequenceFormatError(Kind::kMalformedHeader, where + ": missing data array");
    std::vector<double> values;
    flatten_numbers(doc["data"], values, where);
    if (values.size() != h.frames * h.joints * 3)
      throw SequenceFormatError(Kind::kDimensionMismatch,
                                where + ": expected " + std::to_string(h.frames * h.joints * 3) +
                                    " values, found " + std::to_string(values.size()));
    check_finite(values, where);
    return SkeletonSequence(h.frames, h.joints, h.fps, std::move(values));
  }

  std::string line;
  if (!std::getline(in, line))
    throw SequenceFormatError(Kind::kMalformedHeader, where + ": empty file");
  json doc;
  try {
    doc = json::parse(line);
  } catch (const std::exception& e) {
    throw SequenceFormatError(Kind::kMalformedHeader, where + ": header is not valid JSON: " + e.what());
  }
  const Header h = parse_header(doc, where);
  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t count = h.frames * h.joints * 3;
  if (payload.size() != count * 4)
    throw SequenceFormatError(Kind::kDimensionMismatch,
                              where + ": expected " + std::to_string(count * 4) + " payload bytes, found " +
                                  std::to_string(payload.size()));
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, payload.data() + i * 4, 4);
    values[i] = static_cast<double>(std::bit_cast<float>(to_little_endian(bits)));
  }
  check_finite(values, where);
  return SkeletonSequence(h.frames, h.joints, h.fps, std::move(values));
}

void save_sequence(const std::filesystem::path& path, const SkeletonSequence& seq, const Provenance& provenance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SequenceFormatError(Kind::kIo, path.string() + ": cannot open for writing");

  if (path.extension() == ".json") {
    json doc = header_json(seq);
    if (!provenance.empty()) doc["provenance"] = provenance;
    json frames = json::array();
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      json joints = json::array();
      for (std::size_t j = 0; j < seq.joints(); ++j) {
        const Vec3 p = seq.joint(t, j);
        joints.push_back({static_cast<float>(p[0]), static_cast<float>(p[1]), static_cast<float>(p[2])});
      }
      frames.push_back(std::move(joints));
    }
    doc["data"] = std::move(frames);
    out << doc.dump() << '\n';
  } else {
    json header = header_json(seq);
    if (!provenance.empty()) header["provenance"] = provenance;
    out << header.dump() << '\n';
    std::string payload(seq.data().size() * 4, '\0');
    for (std::size_t i = 0; i < seq.data().size(); ++i) {
      const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(seq.data()[i])));
      std::memcpy(payload.data() + i * 4, &bits, 4);
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (!out) throw SequenceFormatError(Kind::kIo, path.string() + ": write failed");
}

void save_corpus(const std::filesystem::path& dir, const LabeledCorpus& corpus, const Provenance& provenance) {
  corpus.validate();
  std::filesystem::create_directories(dir);
  json labels = json::object();
  for (std::size_t s = 0; s < corpus.sequences.size(); ++s) {
    std::string name = s < corpus.names.size() ? corpus.names[s] : "seq_" + std::to_string(s);
    const std::string file = name + ".skel";
    save_sequence(dir / file, corpus.sequences[s], provenance);
    labels[file] = corpus.frame_labels[s];
  }
  std::ofstream out(dir / kLabelFileName);
  json doc{{"primitive_count", corpus.primitive_count}, {"labels", labels}};
  if (!provenance.empty()) doc["provenance"] = provenance;
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error((dir / kLabelFileName).string() + ": write failed");
}

LabeledCorpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / kLabelFileName);
  if (!in) throw SequenceFormatError(Kind::kIo, (dir / kLabelFileName).string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw SequenceFormatError(Kind::kMalformedHeader, (dir / kLabelFileName).string() + ": " + e.what());
  }
  LabeledCorpus corpus;
  corpus.primitive_count = doc.at("primitive_count").get<int>();
  // std::map ordering of JSON objects gives a stable, name-sorted corpus.
  for (const auto& [file, labels] : doc.at("labels").items()) {
    corpus.sequences.push_back(load_sequence(dir / file));
    corpus.frame_labels.push_back(labels.get<std::vector<int>>());
    corpus.names.push_back(std::filesystem::path(file).stem().string());
  }
  corpus.validate();
  return corpus;
}

SkeletonSequence center_normalize(const SkeletonSequence& seq) {
  std::vector<double> out = seq.data();
  const std::size_t J = seq.joints();
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    double* f = out.data() + t * J * 3;
    for (int a = 0; a < 3; ++a) {
      double mean = 0.0;
      for (std::size_t j = 0; j < J; ++j) mean += f[j * 3 + a];
      mean /= static_cast<double>(J);
      for (std::size_t j = 0; j < J; ++j) f[j * 3 + a] -= mean;
    }
  }
  return SkeletonSequence(seq.frames(), J, seq.fps(), std::move(out));
}

}  // namespace acton
