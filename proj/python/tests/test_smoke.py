# Copyright 2026 The Acton Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import math

import numpy as np
import pytest

import acton


def test_kendalls_tau_cases():
    a = np.arange(4.0).reshape(4, 1)
    assert acton.kendalls_tau(a, a) == pytest.approx(1.0)
    assert acton.kendalls_tau(a, a[::-1].copy()) == pytest.approx(-1.0)
    assert acton.kendalls_tau(a, a[[0, 2, 1, 3]]) == pytest.approx(2.0 / 3.0)


def test_nmi_matches_sklearn():
    sklearn = pytest.importorskip("sklearn.metrics")
    y, c = [0, 0, 1, 1], [0, 0, 0, 1]
    assert acton.nmi(y, c) == pytest.approx(sklearn.normalized_mutual_info_score(y, c), abs=1e-12)


def test_ngram_entropy_alternating():
    k2, f2 = acton.ngram_entropy([[0, 1] * 4], 2)
    expected = -(4 / 7) * math.log2(4 / 7) - (3 / 7) * math.log2(3 / 7)
    assert k2 == pytest.approx(expected, abs=1e-12)
    assert f2 == pytest.approx(expected - 1.0, abs=1e-12)


def test_detection_map_hand_case():
    det = [(0, 0, 10, 0.9), (0, 20, 30, 0.8)]
    assert acton.detection_map(det, [(0, 0, 10)], 0.3) == pytest.approx(1.0)


def test_center_normalize_and_roundtrip(tmp_path):
    joints = np.array([[[1.0, 1.0, 1.0], [3.0, 1.0, 1.0]]])
    centered = acton.center_normalize(joints)
    np.testing.assert_allclose(centered[0], [[-1, 0, 0], [1, 0, 0]])
    path = str(tmp_path / "s.json")
    acton.save_sequence(path, joints, 30.0)
    back, fps = acton.load_sequence(path)
    assert fps == 30.0
    np.testing.assert_array_equal(back, joints)


def test_corpus_kmeans_and_segments():
    seqs, labels = acton.generate_synthetic_corpus(3, 4, 2, 16, 7)
    assert len(seqs) == 4 and seqs[0].shape[1:] == (11, 3)
    assert all(len(l) == s.shape[0] for s, l in zip(seqs, labels))
    frames = np.vstack([s.reshape(s.shape[0], -1) for s in seqs])
    lex = acton.kmeans(frames, 4, seed=1)
    assert lex.centroids.shape == (4, 33)
    ids = acton.assign(frames, lex)
    segs = acton.segment(ids)
    assert segs[0][0] == 0 and segs[-1][1] == len(ids)
    assert all(a[2] != b[2] for a, b in zip(segs, segs[1:]))
