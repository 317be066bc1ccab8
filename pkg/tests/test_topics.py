from __future__ import annotations

import json
import math
import random

import numpy as np
import pytest

from storymap.embed import EmbeddingMatrix
from storymap.errors import InfeasibleError, InputError
from storymap.topics import (js_similarity, label_topics, load_topics, reduce,
                             soft_cluster)
from tests.conftest import make_corpus


def matrix_from(points: dict[str, list[float]]) -> EmbeddingMatrix:
    vectors = {k: np.asarray(v, dtype=float) for k, v in points.items()}
    dim = len(next(iter(vectors.values())))
    return EmbeddingMatrix(dim=dim, vectors=vectors)


def blob(center, n, spread, rng, dim=3):
    return [[center[d] + rng.uniform(-spread, spread) for d in range(dim)]
            for _ in range(n)]


# -- js_similarity ----------------------------------------------------------

def test_js_identical_distributions():
    assert js_similarity([0.6, 0.3, 0.1], [0.6, 0.3, 0.1]) == pytest.approx(1.0, abs=1e-12)


def test_js_disjoint_supports():
    assert js_similarity([0.4, 0.6, 0.0], [0.0, 0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)


def test_js_half_mixture_value():
    # direct base-2 evaluation: m=[0.75,0.25], JSD = H(m) - (H(p)+H(q))/2
    expected = 1.0 - (0.75 * math.log2(1 / 0.75) + 0.25 * math.log2(1 / 0.25)
                      - 0.5 * (0.0 + 1.0))
    assert js_similarity([1.0, 0.0], [0.5, 0.5]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.6887, abs=5e-5)


def test_js_symmetry_and_range():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(2, 5)
        p = [rng.random() for _ in range(n)]
        q = [rng.random() for _ in range(n)]
        p = [v / sum(p) for v in p]
        q = [v / sum(q) for v in q]
        a = js_similarity(p, q)
        assert 0.0 <= a <= 1.0
        assert a == pytest.approx(js_similarity(q, p), abs=1e-12)


def test_js_validation():
    with pytest.raises(InputError, match="length"):
        js_similarity([1.0], [0.5, 0.5])
    with pytest.raises(InputError, match="sums"):
        js_similarity([0.9, 0.0], [0.5, 0.5])
    with pytest.raises(InputError, match="negative"):
        js_similarity([1.5, -0.5], [0.5, 0.5])


# -- reduce -----------------------------------------------------------------

def test_reduce_shape_and_determinism():
    rng = random.Random(0)
    points = {f"p{i}": [rng.uniform(-1, 1) for _ in range(4)] for i in range(8)}
    matrix = matrix_from(points)
    a = reduce(matrix, target_dim=2, seed=0)
    b = reduce(matrix, target_dim=2, seed=0)
    assert a.dim == 2
    for key in points:
        assert np.array_equal(a.vectors[key], b.vectors[key])


def test_reduce_preserves_dominant_separation():
    # two groups split along one axis stay split after reduction
    rng = random.Random(1)
    points = {}
    for i in range(6):
        points[f"a{i}"] = [0.0 + rng.uniform(-0.1, 0.1) for _ in range(5)]
        points[f"b{i}"] = [4.0 + rng.uniform(-0.1, 0.1) for _ in range(5)]
    reduced = reduce(matrix_from(points), target_dim=2, seed=0)
    gap = np.linalg.norm(reduced.vectors["a0"] - reduced.vectors["b0"])
    within = np.linalg.norm(reduced.vectors["a0"] - reduced.vectors["a1"])
    assert gap > 10 * within


def test_reduce_rejects_bad_target():
    matrix = matrix_from({"a": [1.0, 2.0], "b": [2.0, 1.0]})
    with pytest.raises(InputError):
        reduce(matrix, target_dim=2, seed=0)
    with pytest.raises(InputError):
        reduce(matrix, target_dim=1, seed=0)


def test_reduce_degenerate_all_equal_warns():
    matrix = matrix_from({f"p{i}": [1.0, 2.0, 3.0] for i in range(4)})
    with pytest.warns(UserWarning, match="zero variance"):
        reduced = reduce(matrix, target_dim=2, seed=0)
    rows = [tuple(v) for v in reduced.vectors.values()]
    assert len(set(rows)) == 1


# -- soft_cluster -----------------------------------------------------------

def test_soft_cluster_two_blobs():
    rng = random.Random(2)
    points = {}
    for i, row in enumerate(blob((0, 0, 0), 10, 0.05, rng)):
        points[f"a{i}"] = row
    for i, row in enumerate(blob((10, 10, 10), 10, 0.05, rng)):
        points[f"b{i}"] = row
    model = soft_cluster(matrix_from(points), min_cluster_size=3, seed=0)
    assert model.k == 2
    groups = {"a": set(), "b": set()}
    for key in points:
        groups[key[0]].add(model.dominant(key))
    assert groups["a"] != groups["b"]
    assert all(len(g) == 1 for g in groups.values())
    for dist in model.distributions.values():
        assert dist[-1] == 0.0  # members carry no noise mass


def test_soft_cluster_identical_points():
    points = {f"p{i}": [1.0, 1.0] for i in range(5)}
    model = soft_cluster(matrix_from(points), min_cluster_size=3, seed=0)
    assert model.k == 1
    for dist in model.distributions.values():
        assert np.allclose(dist, [1.0, 0.0])


def test_soft_cluster_isolated_point_is_noise():
    rng = random.Random(3)
    points = {f"a{i}": row for i, row in enumerate(blob((0, 0, 0), 10, 0.05, rng))}
    points["far"] = [50.0, 50.0, 50.0]
    model = soft_cluster(matrix_from(points), min_cluster_size=3, seed=0)
    assert model.k == 1
    assert model.dominant("far") == model.k  # noise slot
    # brute-force nearest-centroid check: the blob members sit closest to
    # the blob centroid, the far point does not sit within the cutoff
    centroid = np.mean([points[f"a{i}"] for i in range(10)], axis=0)
    assert np.linalg.norm(np.asarray(points["far"]) - centroid) > 1.0
    for i in range(10):
        assert model.dominant(f"a{i}") == 0


def test_soft_cluster_all_noise_rejected():
    # six mutually distant points cannot form a cluster of three
    points = {f"p{i}": [float(3 ** i), float(i * 100), 0.0] for i in range(6)}
    with pytest.raises(InfeasibleError, match="noise"):
        soft_cluster(matrix_from(points), min_cluster_size=3, seed=0)


def test_soft_cluster_deterministic():
    rng = random.Random(4)
    points = {f"p{i}": [rng.uniform(-1, 1) for _ in range(3)] for i in range(12)}
    a = soft_cluster(matrix_from(points), min_cluster_size=2, seed=9)
    b = soft_cluster(matrix_from(points), min_cluster_size=2, seed=9)
    assert a.k == b.k
    for key in points:
        assert np.array_equal(a.distributions[key], b.distributions[key])


def test_distributions_sum_to_one():
    rng = random.Random(6)
    points = {f"p{i}": [rng.gauss(0, 1), rng.gauss(0, 1)] for i in range(20)}
    model = soft_cluster(matrix_from(points), min_cluster_size=2, seed=0)
    for dist in model.distributions.values():
        assert float(dist.sum()) == pytest.approx(1.0, abs=1e-9)
        assert np.all(dist >= 0)


# -- load_topics ------------------------------------------------------------

def write_topics(tmp_path, records):
    path = tmp_path / "topics.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n",
                    encoding="utf-8")
    return path


def test_load_topics_verbatim(tmp_path):
    corpus = make_corpus(["one", "two"])
    path = write_topics(tmp_path, [
        {"id": event_id, "dist": [0.6, 0.3, 0.1]} for event_id in corpus.ids()])
    model = load_topics(corpus, path)
    assert model.k == 2
    assert list(model.get(corpus.ids()[0])) == [0.6, 0.3, 0.1]


def test_load_topics_renormalizes_with_warning(tmp_path):
    corpus = make_corpus(["one", "two"])
    ids = corpus.ids()
    path = write_topics(tmp_path, [
        {"id": ids[0], "dist": [0.599, 0.3, 0.1]},
        {"id": ids[1], "dist": [0.5, 0.5, 0.0]}])
    with pytest.warns(UserWarning, match="renormalizing"):
        model = load_topics(corpus, path)
    assert float(model.get(ids[0]).sum()) == pytest.approx(1.0, abs=1e-12)


def test_load_topics_rejects_negative(tmp_path):
    corpus = make_corpus(["one", "two"])
    path = write_topics(tmp_path, [
        {"id": event_id, "dist": [1.2, -0.2, 0.0]} for event_id in corpus.ids()])
    with pytest.raises(InputError, match="negative"):
        load_topics(corpus, path)


def test_label_topics_surfaces_theme_tokens():
    corpus = make_corpus([
        "virus outbreak spreads fast",
        "virus outbreak worsens overnight",
        "virus outbreak response begins",
    ])
    path_points = {event_id: [0.9, 0.1] for event_id in corpus.ids()}
    from storymap.topics import TopicModel
    model = TopicModel(k=1, distributions={
        k: np.asarray(v) for k, v in path_points.items()}, labels=[[]])
    labeled = label_topics(model, corpus, top_n=2)
    assert labeled.labels[0] == ["outbreak", "virus"]
