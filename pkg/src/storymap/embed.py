"""Per-event embedding vectors and angular event similarity."""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import InputError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense real vector per event id; all vectors share one dimension."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        for event_id, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise InputError(
                    f"embedding for {event_id!r} has dim {vec.shape}, expected {self.dim}")
            if not np.all(np.isfinite(vec)):
                raise InputError(f"embedding for {event_id!r} has non-finite entries")
            if float(np.linalg.norm(vec)) <= 0.0:
                raise InputError(f"embedding for {event_id!r} is the zero vector")

    def get(self, event_id: str) -> np.ndarray:
        try:
            return self.vectors[event_id]
        except KeyError:
            raise InputError(f"no embedding for event id {event_id!r}") from None


def load_embeddings(corpus: Corpus, path: str | Path) -> EmbeddingMatrix:
    """Read a JSON-lines sidecar ({"id": ..., "vector": [...]}) aligned to the corpus."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"embedding sidecar not found: {path}")
    raw: dict[str, np.ndarray] = {}
    dim: int | None = None
    with path.open("r", encoding="utf-8") as handle:
        for line_num, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise InputError(f"{path}:{line_num}: bad JSON line") from None
            if "id" not in record or "vector" not in record:
                raise InputError(f"{path}:{line_num}: need keys 'id' and 'vector'")
            vec = np.asarray(record["vector"], dtype=float)
            if vec.ndim != 1:
                raise InputError(f"{path}:{line_num}: vector must be flat")
            if dim is None:
                dim = int(vec.shape[0])
            elif vec.shape[0] != dim:
                raise InputError(
                    f"{path}:{line_num}: dimension {vec.shape[0]} != {dim}")
            raw[str(record["id"])] = vec
    if dim is None:
        raise InputError(f"{path}: empty sidecar")
    vectors = {}
    for event in corpus:
        if event.id not in raw:
            raise InputError(f"embedding sidecar is missing event id {event.id!r}")
        vectors[event.id] = raw[event.id]
    return EmbeddingMatrix(dim=dim, vectors=vectors)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens of length >= 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) > 1]


def builtin_embed(corpus: Corpus, dim: int = 64, seed: int = 0) -> EmbeddingMatrix:
    """Deterministic fallback embedder: TF-IDF vectors pushed through a seeded
    random projection and unit-normalized.

    Headlines with no usable tokens get a reserved unknown-token vector.
    """
    if dim < 2:
        raise InputError(f"embedding dim must be >= 2, got {dim}")
    docs = {e.id: tokenize(e.headline) for e in corpus}
    vocab = sorted({t for tokens in docs.values() for t in tokens})
    index = {t: i + 1 for i, t in enumerate(vocab)}  # row 0 is the unknown token
    doc_freq = {t: 0 for t in vocab}
    for tokens in docs.values():
        for t in set(tokens):
            doc_freq[t] += 1
    n_docs = len(docs)

    rng = np.random.default_rng(seed)
    projection = rng.standard_normal((len(vocab) + 1, dim))

    vectors: dict[str, np.ndarray] = {}
    for event in corpus:
        tokens = docs[event.id]
        if not tokens:
            warnings.warn(f"event {event.id!r}: headline has no usable tokens; "
                          "using the unknown-token vector")
            vec = projection[0].copy()
        else:
            counts: dict[str, int] = {}
            for t in tokens:
                counts[t] = counts.get(t, 0) + 1
            vec = np.zeros(dim)
            for t, count in counts.items():
                idf = math.log((1 + n_docs) / (1 + doc_freq[t])) + 1.0
                vec += count * idf * projection[index[t]]
        norm = float(np.linalg.norm(vec))
        if norm <= 0.0:
            vec = projection[0].copy()
            norm = float(np.linalg.norm(vec))
        vectors[event.id] = vec / norm
    return EmbeddingMatrix(dim=dim, vectors=vectors)


def angular_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """1 - arccos(cosine(u, v)) / pi, clamped into [0, 1].

    Equal directions give 1, orthogonal 0.5, opposite 0.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= 0.0 or nv <= 0.0:
        raise InputError("angular similarity is undefined for zero vectors")
    cosine = float(np.dot(u, v)) / (nu * nv)
    cosine = max(-1.0, min(1.0, cosine))
    return 1.0 - math.acos(cosine) / math.pi
