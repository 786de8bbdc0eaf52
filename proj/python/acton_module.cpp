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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "acton/lexicon.hpp"
#include "acton/metrics.hpp"
#include "acton/motion.hpp"
#include "acton/synth.hpp"
#include "acton/tan.hpp"

namespace py = pybind11;
using namespace acton;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array from_matrix(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

SkeletonSequence to_sequence(const Array& a, double fps) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument("expected a T x J x 3 array");
  const auto t = static_cast<std::size_t>(a.shape(0)), j = static_cast<std::size_t>(a.shape(1));
  return SkeletonSequence(t, j, fps, std::vector<double>(a.data(), a.data() + t * j * 3));
}

Array from_sequence(const SkeletonSequence& s) {
  Array out({s.frames(), s.joints(), std::size_t{3}});
  std::copy(s.data().begin(), s.data().end(), out.mutable_data());
  return out;
}

std::vector<SkeletonSequence> to_sequences(const std::vector<Array>& arrays, double fps) {
  std::vector<SkeletonSequence> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(to_sequence(a, fps));
  return out;
}

tan::FeatureSpace parse_space(const std::string& s) {
  if (s == "projection") return tan::FeatureSpace::kProjection;
  if (s == "hidden") return tan::FeatureSpace::kHidden;
  throw std::invalid_argument("space must be 'projection' or 'hidden'");
}

}  // namespace

PYBIND11_MODULE(_acton, m) {
  m.doc() = "Motion tokenization: sequences, TAN embeddings, lexicons and metrics.";

  m.def("load_sequence", [](const std::string& path) {
    const auto s = load_sequence(path);
    return py::make_tuple(from_sequence(s), s.fps());
  }, py::arg("path"), "Returns (T x J x 3 array, fps).");
  m.def("save_sequence", [](const std::string& path, const Array& a, double fps) {
    save_sequence(path, to_sequence(a, fps));
  }, py::arg("path"), py::arg("joints"), py::arg("fps"));
  m.def("center_normalize", [](const Array& a) { return from_sequence(center_normalize(to_sequence(a, 1.0))); },
        py::arg("joints"));
  m.def("generate_synthetic_corpus", [](int primitives, int sequences, int per_sequence, int frames, std::uint64_t seed) {
    const auto c = generate_synthetic_corpus(primitives, sequences, per_sequence, frames, seed);
    py::list seqs;
    for (const auto& s : c.sequences) seqs.append(from_sequence(s));
    return py::make_tuple(seqs, c.frame_labels);
  }, py::arg("primitives"), py::arg("sequences"), py::arg("per_sequence"), py::arg("frames_per_primitive"),
        py::arg("seed"), "Returns (list of T x J x 3 arrays, per-frame labels).");

  py::class_<tan::TanWeights>(m, "TanWeights")
      .def_property_readonly("digest", &tan::TanWeights::digest)
      .def_property_readonly("parameter_count", &tan::TanWeights::parameter_count)
      .def_property_readonly("projection_dim", [](const tan::TanWeights& w) { return w.config().projection_dim; });
  m.def("load_checkpoint", [](const std::string& path) { return tan::load_checkpoint(path); }, py::arg("path"));
  m.def("embed", [](const std::vector<Array>& seqs, const tan::TanWeights& w, double fps, const std::string& space) {
    const auto in = to_sequences(seqs, fps);
    std::vector<Array> out;
    for (const auto& e : tan::embed(in, w, parse_space(space))) out.push_back(from_matrix(e));
    return out;
  }, py::arg("sequences"), py::arg("weights"), py::arg("fps") = 60.0, py::arg("space") = "projection");

  py::class_<lexicon::Lexicon>(m, "Lexicon")
      .def_readonly("k", &lexicon::Lexicon::k)
      .def_readonly("inertia", &lexicon::Lexicon::inertia)
      .def_property_readonly("centroids", [](const lexicon::Lexicon& l) { return from_matrix(l.centroids); });
  m.def("kmeans", [](const Array& points, std::size_t k, std::uint64_t seed) {
    return lexicon::kmeans(to_matrix(points), k, seed);
  }, py::arg("points"), py::arg("k"), py::arg("seed") = 0);
  m.def("load_lexicon", [](const std::string& path) { return lexicon::load_lexicon(path); }, py::arg("path"));
  m.def("assign", [](const Array& frames, const lexicon::Lexicon& l) { return lexicon::assign(to_matrix(frames), l); },
        py::arg("frames"), py::arg("lexicon"));
  m.def("segment", [](const std::vector<int>& labels) {
    std::vector<std::tuple<std::size_t, std::size_t, int>> out;
    for (const auto& s : lexicon::segment(labels)) out.emplace_back(s.start, s.end, s.acton);
    return out;
  }, py::arg("labels"), "Maximal runs as (start, end, acton) with end exclusive.");

  m.def("kendalls_tau", [](const Array& a, const Array& b) { return metrics::kendalls_tau(to_matrix(a), to_matrix(b)); },
        py::arg("a"), py::arg("b"));
  m.def("nmi", [](const std::vector<int>& y, const std::vector<int>& c) { return metrics::nmi(y, c); }, py::arg("truth"),
        py::arg("clusters"));
  m.def("ngram_entropy", [](const std::vector<std::vector<int>>& streams, std::size_t n) {
    const auto e = metrics::ngram_entropy(streams, n);
    return py::make_tuple(e.k_n, e.f_n);
  }, py::arg("streams"), py::arg("n"), "Returns (K_N, F_N) in bits.");
  m.def("detection_map", [](const std::vector<std::tuple<int, std::size_t, std::size_t, double>>& det,
                            const std::vector<std::tuple<int, std::size_t, std::size_t>>& truth, double iou) {
    std::vector<metrics::Detection> d;
    for (const auto& [c, s, e, conf] : det) d.push_back({c, s, e, conf});
    std::vector<metrics::Interval> t;
    for (const auto& [c, s, e] : truth) t.push_back({c, s, e});
    return metrics::detection_map(d, t, iou);
  }, py::arg("detections"), py::arg("truth"), py::arg("iou_threshold"));
}
