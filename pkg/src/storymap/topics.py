"""Soft topic clustering over reduced embeddings, plus topic similarity.

Clustering is density-based: single-linkage components under a data-scaled
distance cutoff, with components below min_cluster_size dissolving to noise.
Memberships are a softmax over distances to cluster centroids; every
distribution carries a trailing noise slot.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .embed import EmbeddingMatrix, tokenize
from .errors import InfeasibleError, InputError

NOISE_CUTOFF_PERCENTILE = 90.0
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class TopicModel:
    """Per-event probability over k clusters plus a trailing noise slot."""

    k: int
    distributions: dict[str, np.ndarray]
    labels: list[list[str]] = field(default_factory=list)

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"topic model needs k >= 1 real clusters, got {self.k}")
        for event_id, dist in self.distributions.items():
            if dist.shape != (self.k + 1,):
                raise InputError(
                    f"distribution for {event_id!r} has length {dist.shape}, "
                    f"expected {self.k + 1}")
            if np.any(dist < 0):
                raise InputError(f"distribution for {event_id!r} has negative entries")
            total = float(dist.sum())
            if abs(total - 1.0) > _SUM_TOL:
                raise InputError(
                    f"distribution for {event_id!r} sums to {total}, expected 1")

    def get(self, event_id: str) -> np.ndarray:
        try:
            return self.distributions[event_id]
        except KeyError:
            raise InputError(f"no topic distribution for event id {event_id!r}") from None

    def dominant(self, event_id: str) -> int:
        """Index of the largest slot; k means noise."""
        return int(np.argmax(self.get(event_id)))


def reduce(embeddings: EmbeddingMatrix, target_dim: int, seed: int = 0) -> EmbeddingMatrix:
    """Project onto the top principal directions of the centered matrix.

    Deterministic: component signs follow the largest-magnitude loading.
    A zero-variance matrix reduces to all-equal vectors (with a warning).
    """
    if target_dim < 2:
        raise InputError(f"target_dim must be >= 2, got {target_dim}")
    if target_dim >= embeddings.dim:
        raise InputError(
            f"target_dim {target_dim} must be < embedding dim {embeddings.dim}")
    ids = sorted(embeddings.vectors)
    matrix = np.stack([embeddings.vectors[i] for i in ids])
    centered = matrix - matrix.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    if float(singular[0]) <= 1e-12:
        warnings.warn("embedding matrix has zero variance; reduced vectors are all equal")
    components = vt[:target_dim]
    # Sign convention: the largest-|loading| coordinate of each component is positive.
    for row in range(components.shape[0]):
        pivot = int(np.argmax(np.abs(components[row])))
        if components[row, pivot] < 0:
            components[row] = -components[row]
    reduced = centered @ components.T
    vectors = {event_id: reduced[i].copy() for i, event_id in enumerate(ids)}
    # Shift off the origin so downstream norm checks stay valid even for
    # degenerate inputs; a constant offset changes no distances.
    offset = np.ones(target_dim)
    vectors = {event_id: vec + offset for event_id, vec in vectors.items()}
    return EmbeddingMatrix(dim=target_dim, vectors=vectors)


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def soft_cluster(reduced: EmbeddingMatrix, min_cluster_size: int = 3,
                 seed: int = 0) -> TopicModel:
    """Discover clusters and per-event soft memberships.

    The number of clusters is not prescribed: points merge when closer than
    the 90th percentile of nearest-neighbor distances, and components smaller
    than min_cluster_size dissolve to noise. Membership is a softmax over
    negative centroid distances with temperature equal to the median pairwise
    centroid distance; noise points put their residual mass in the noise slot.
    """
    if min_cluster_size < 2:
        raise InputError(f"min_cluster_size must be >= 2, got {min_cluster_size}")
    ids = sorted(reduced.vectors)
    n = len(ids)
    if n < 2:
        raise InputError(f"need at least 2 events to cluster, got {n}")
    points = np.stack([reduced.vectors[i] for i in ids])
    deltas = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((deltas ** 2).sum(axis=2))
    nn = np.partition(dist + np.diag([np.inf] * n), 0, axis=1)[:, 0]
    cutoff = float(np.percentile(nn, NOISE_CUTOFF_PERCENTILE))

    uf = _UnionFind(n)
    for a in range(n):
        for b in range(a + 1, n):
            if dist[a, b] <= cutoff:
                uf.union(a, b)
    members: dict[int, list[int]] = {}
    for i in range(n):
        members.setdefault(uf.find(i), []).append(i)

    clusters = [sorted(group) for group in members.values()
                if len(group) >= min_cluster_size]
    clusters.sort(key=lambda group: ids[group[0]])
    k = len(clusters)
    if k == 0:
        raise InfeasibleError(
            f"all {n} points classified as noise at min_cluster_size="
            f"{min_cluster_size}; try a smaller min_cluster_size",
            family="size")

    centroids = np.stack([points[group].mean(axis=0) for group in clusters])
    if k >= 2:
        pairwise = [float(np.linalg.norm(centroids[a] - centroids[b]))
                    for a in range(k) for b in range(a + 1, k)]
        temperature = float(np.median(pairwise))
    else:
        temperature = cutoff
    temperature = max(temperature, 1e-12)

    cluster_of = {i: q for q, group in enumerate(clusters) for i in group}
    distributions: dict[str, np.ndarray] = {}
    for i, event_id in enumerate(ids):
        to_centroid = np.linalg.norm(centroids - points[i], axis=1)
        dist_vec = np.zeros(k + 1)
        if i in cluster_of:
            dist_vec[:k] = _softmax(-to_centroid / temperature)
        else:
            scores = np.concatenate([-to_centroid, [-cutoff]]) / temperature
            dist_vec[:] = _softmax(scores)
        distributions[event_id] = dist_vec
    return TopicModel(k=k, distributions=distributions,
                      labels=[[] for _ in range(k)])


def label_topics(model: TopicModel, corpus: Corpus, top_n: int = 5) -> TopicModel:
    """Attach the most frequent member-headline tokens as cluster labels."""
    counts: list[dict[str, int]] = [{} for _ in range(model.k)]
    for event in corpus:
        slot = model.dominant(event.id)
        if slot >= model.k:
            continue
        for token in tokenize(event.headline):
            counts[slot][token] = counts[slot].get(token, 0) + 1
    labels = [[t for t, _ in sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]]
              for c in counts]
    return TopicModel(k=model.k, distributions=model.distributions, labels=labels)


def load_topics(corpus: Corpus, path: str | Path) -> TopicModel:
    """Read a JSON-lines topic sidecar ({"id": ..., "dist": [...]}).

    The last slot is noise. Rows are renormalized (with a warning) when their
    sum strays beyond 1e-6 from 1; negative entries are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"topic sidecar not found: {path}")
    raw: dict[str, np.ndarray] = {}
    length: int | None = None
    with path.open("r", encoding="utf-8") as handle:
        for line_num, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise InputError(f"{path}:{line_num}: bad JSON line") from None
            if "id" not in record or "dist" not in record:
                raise InputError(f"{path}:{line_num}: need keys 'id' and 'dist'")
            dist = np.asarray(record["dist"], dtype=float)
            if dist.ndim != 1:
                raise InputError(f"{path}:{line_num}: dist must be flat")
            if length is None:
                length = int(dist.shape[0])
                if length < 2:
                    raise InputError(
                        f"{path}:{line_num}: need at least one real cluster "
                        "plus the noise slot")
            elif dist.shape[0] != length:
                raise InputError(f"{path}:{line_num}: length {dist.shape[0]} != {length}")
            if np.any(dist < 0):
                raise InputError(f"{path}:{line_num}: negative probability")
            total = float(dist.sum())
            if abs(total - 1.0) > 1e-6:
                if total <= 0:
                    raise InputError(f"{path}:{line_num}: distribution sums to {total}")
                warnings.warn(f"{path}:{line_num}: distribution sums to {total:.6f}; "
                              "renormalizing")
                dist = dist / total
            elif total != 1.0:
                dist = dist / total
            raw[str(record["id"])] = dist
    if length is None:
        raise InputError(f"{path}: empty sidecar")
    distributions = {}
    for event in corpus:
        if event.id not in raw:
            raise InputError(f"topic sidecar is missing event id {event.id!r}")
        distributions[event.id] = raw[event.id]
    return TopicModel(k=length - 1, distributions=distributions,
                      labels=[[] for _ in range(length - 1)])


def js_similarity(p: np.ndarray, q: np.ndarray) -> float:
    """1 minus the base-2 Jensen-Shannon divergence; 1 for equal
    distributions, 0 for disjoint supports."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise InputError(f"length mismatch: {p.shape} vs {q.shape}")
    for name, vec in (("p", p), ("q", q)):
        if np.any(vec < 0):
            raise InputError(f"{name} has negative entries")
        if abs(float(vec.sum()) - 1.0) > 1e-6:
            raise InputError(f"{name} sums to {float(vec.sum())}, expected 1")
    mid = 0.5 * (p + q)

    def kl(a: np.ndarray, b: np.ndarray) -> float:
        total = 0.0
        for ai, bi in zip(a, b):
            if ai > 0.0:
                total += ai * math.log2(ai / bi)
        return total

    divergence = 0.5 * kl(p, mid) + 0.5 * kl(q, mid)
    return 1.0 - max(0.0, min(1.0, divergence))
