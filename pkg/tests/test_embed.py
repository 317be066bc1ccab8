from __future__ import annotations

import json
import math
import random

import numpy as np
import pytest

from storymap.embed import (angular_similarity, builtin_embed, load_embeddings,
                            tokenize)
from storymap.errors import InputError
from tests.conftest import make_corpus


def test_angular_similarity_anchors():
    u = np.array([1.0, 2.0, 3.0])
    assert angular_similarity(u, u) == pytest.approx(1.0, abs=1e-12)
    assert angular_similarity([1, 0], [0, 1]) == pytest.approx(0.5, abs=1e-12)
    assert angular_similarity(u, -u) == pytest.approx(0.0, abs=1e-12)


def test_angular_similarity_errors():
    with pytest.raises(InputError):
        angular_similarity([1.0, 0.0], [0.0, 0.0, 1.0])
    with pytest.raises(InputError):
        angular_similarity([0.0, 0.0], [1.0, 0.0])


def test_angular_similarity_properties():
    rng = random.Random(42)
    for _ in range(300):
        dim = rng.randint(2, 6)
        u = np.array([rng.uniform(-1, 1) for _ in range(dim)]) + 1e-6
        v = np.array([rng.uniform(-1, 1) for _ in range(dim)]) + 1e-6
        sim = angular_similarity(u, v)
        assert 0.0 <= sim <= 1.0
        assert sim == pytest.approx(angular_similarity(v, u), abs=1e-12)
        scale = rng.uniform(0.01, 50)
        assert sim == pytest.approx(angular_similarity(u, scale * v), abs=1e-9)


def test_angular_similarity_clamps_float_overshoot():
    u = np.array([0.1, 0.1, 0.1])
    assert angular_similarity(u, 3.0 * u) == pytest.approx(1.0, abs=1e-12)


def test_builtin_embed_deterministic():
    corpus = make_corpus(["alpha beta gamma", "beta gamma delta", "epsilon zeta"])
    a = builtin_embed(corpus, dim=16, seed=7)
    b = builtin_embed(corpus, dim=16, seed=7)
    for event_id in a.vectors:
        assert np.array_equal(a.vectors[event_id], b.vectors[event_id])
    c = builtin_embed(corpus, dim=16, seed=8)
    assert any(not np.array_equal(a.vectors[i], c.vectors[i]) for i in a.vectors)


def test_builtin_embed_identical_headlines_identical_vectors():
    corpus = make_corpus(["same words here", "same words here", "other text"])
    matrix = builtin_embed(corpus, dim=8, seed=0)
    ids = corpus.ids()
    assert np.array_equal(matrix.vectors[ids[0]], matrix.vectors[ids[1]])


def test_builtin_embed_shared_tokens_raise_similarity():
    # half-overlapping headlines vs token-disjoint ones, at a generous dim
    corpus = make_corpus([
        "alpha beta gamma delta",
        "alpha beta epsilon zeta",
        "omicron sigma tau upsilon",
    ])
    matrix = builtin_embed(corpus, dim=256, seed=3)
    ids = corpus.ids()
    shared = angular_similarity(matrix.get(ids[0]), matrix.get(ids[1]))
    disjoint = angular_similarity(matrix.get(ids[0]), matrix.get(ids[2]))
    assert disjoint < shared


def test_builtin_embed_tokenless_headline_warns():
    corpus = make_corpus(["!!! ...", "regular headline text"])
    with pytest.warns(UserWarning, match="no usable tokens"):
        matrix = builtin_embed(corpus, dim=8, seed=0)
    assert np.linalg.norm(matrix.get(corpus.ids()[0])) > 0


def test_tokenize_drops_short_tokens():
    assert tokenize("A big-bad Wolf, 7 it is!") == ["big", "bad", "wolf", "it", "is"]


def write_sidecar(tmp_path, records):
    path = tmp_path / "vectors.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n",
                    encoding="utf-8")
    return path


def test_load_embeddings(tmp_path):
    corpus = make_corpus(["one", "two", "three"])
    path = write_sidecar(tmp_path, [
        {"id": event_id, "vector": [float(k), 1.0, 0.5, -0.25]}
        for k, event_id in enumerate(corpus.ids(), start=1)])
    matrix = load_embeddings(corpus, path)
    assert matrix.dim == 4
    assert matrix.get(corpus.ids()[0])[0] == 1.0


def test_load_embeddings_missing_id(tmp_path):
    corpus = make_corpus(["one", "two"])
    path = write_sidecar(tmp_path, [{"id": corpus.ids()[0], "vector": [1.0, 2.0]}])
    with pytest.raises(InputError, match=corpus.ids()[1]):
        load_embeddings(corpus, path)


def test_load_embeddings_rejects_nan_and_zero(tmp_path):
    corpus = make_corpus(["one", "two"])
    ids = corpus.ids()
    path = write_sidecar(tmp_path, [
        {"id": ids[0], "vector": [1.0, math.nan]},
        {"id": ids[1], "vector": [1.0, 0.0]}])
    with pytest.raises(InputError, match="non-finite"):
        load_embeddings(corpus, path)
    path = write_sidecar(tmp_path, [
        {"id": ids[0], "vector": [1.0, 1.0]},
        {"id": ids[1], "vector": [0.0, 0.0]}])
    with pytest.raises(InputError, match="zero vector"):
        load_embeddings(corpus, path)


def test_load_embeddings_dimension_mismatch(tmp_path):
    corpus = make_corpus(["one", "two"])
    ids = corpus.ids()
    path = write_sidecar(tmp_path, [
        {"id": ids[0], "vector": [1.0, 2.0]},
        {"id": ids[1], "vector": [1.0, 2.0, 3.0]}])
    with pytest.raises(InputError, match="dimension"):
        load_embeddings(corpus, path)
