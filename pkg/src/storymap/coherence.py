"""Pairwise coherence: geometric mean of event and topic similarity.

The table holds every admissible forward-in-time pair; an optional per-node
candidate cap keeps only the strongest successors/predecessors to bound the
downstream linear program.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .corpus import Corpus
from .embed import EmbeddingMatrix, angular_similarity
from .errors import InputError
from .topics import TopicModel, js_similarity

if TYPE_CHECKING:
    from .extract import NarrativeMap


def coherence(sim_event: float, sim_topic: float) -> float:
    """Geometric mean of the two similarities; zero iff either input is zero."""
    for name, value in (("sim_event", sim_event), ("sim_topic", sim_topic)):
        if not 0.0 <= value <= 1.0:
            raise InputError(f"{name} must lie in [0, 1], got {value}")
    return math.sqrt(sim_event * sim_topic)


@dataclass(frozen=True)
class CoherenceEntry:
    i: str
    j: str
    sim_event: float
    sim_topic: float
    coherence: float


@dataclass(frozen=True)
class CoherenceTable:
    """Coherence per forward pair (i, j), keyed by event id pair.

    `ids` preserves the corpus (timestamp, id) order; only pairs with
    order(i) < order(j) appear.
    """

    ids: tuple[str, ...]
    entries: dict[tuple[str, str], CoherenceEntry] = field(default_factory=dict)
    cap: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def order(self, event_id: str) -> int:
        try:
            return self.ids.index(event_id)
        except ValueError:
            raise InputError(f"id {event_id!r} not in coherence table") from None

    def get(self, i: str, j: str) -> CoherenceEntry:
        try:
            return self.entries[(i, j)]
        except KeyError:
            raise InputError(f"no coherence entry for pair ({i!r}, {j!r})") from None


def build_table(corpus: Corpus,
                embeddings: EmbeddingMatrix,
                topics: TopicModel,
                cap: int | None = None,
                endpoints: tuple[str, str] | None = None) -> CoherenceTable:
    """Compute coherence for every forward pair.

    With a cap, a pair survives when it ranks among either endpoint's `cap`
    strongest successors/predecessors; the (start, end) pair always survives.
    """
    ids = [e.id for e in corpus]
    for event_id in ids:
        embeddings.get(event_id)
        topics.get(event_id)
    if cap is not None and cap < 1:
        raise InputError(f"candidate cap must be >= 1, got {cap}")
    if endpoints is None:
        endpoints = (ids[0], ids[-1])

    entries: dict[tuple[str, str], CoherenceEntry] = {}
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            i, j = ids[a], ids[b]
            sim_e = angular_similarity(embeddings.get(i), embeddings.get(j))
            sim_t = js_similarity(topics.get(i), topics.get(j))
            entries[(i, j)] = CoherenceEntry(i, j, sim_e, sim_t,
                                             coherence(sim_e, sim_t))

    if cap is not None:
        order = {event_id: pos for pos, event_id in enumerate(ids)}
        keep: set[tuple[str, str]] = {endpoints}
        forward: dict[str, list[CoherenceEntry]] = {i: [] for i in ids}
        backward: dict[str, list[CoherenceEntry]] = {i: [] for i in ids}
        for entry in entries.values():
            forward[entry.i].append(entry)
            backward[entry.j].append(entry)
        for event_id in ids:
            ranked = sorted(forward[event_id],
                            key=lambda e: (-e.coherence, order[e.j]))
            keep.update((e.i, e.j) for e in ranked[:cap])
            ranked = sorted(backward[event_id],
                            key=lambda e: (-e.coherence, order[e.i]))
            keep.update((e.i, e.j) for e in ranked[:cap])
        entries = {k: v for k, v in entries.items() if k in keep}

    return CoherenceTable(ids=tuple(ids), entries=entries, cap=cap)


def edge_membership(topics: TopicModel, i: str, j: str, k: int) -> float:
    """Geometric mean of both endpoints' membership in real cluster k."""
    if not 0 <= k < topics.k:
        raise InputError(f"cluster index {k} out of range (k={topics.k}; "
                         "the noise slot is excluded)")
    return math.sqrt(float(topics.get(i)[k]) * float(topics.get(j)[k]))


def normalize_outgoing(narrative_map: "NarrativeMap") -> "NarrativeMap":
    """Turn raw coherence weights into per-node outgoing probabilities."""
    from .extract import MapEdge, NarrativeMap

    totals: dict[str, float] = {}
    for edge in narrative_map.edges:
        totals[edge.i] = totals.get(edge.i, 0.0) + edge.coherence
    for tail, total in totals.items():
        if total <= 0.0:
            raise InputError(
                f"node {tail!r} has outgoing edges but zero total coherence; "
                "cannot normalize")
    edges = tuple(
        MapEdge(i=e.i, j=e.j, coherence=e.coherence,
                probability=e.coherence / totals[e.i])
        for e in narrative_map.edges)
    return NarrativeMap(nodes=narrative_map.nodes, edges=edges,
                        s=narrative_map.s, t=narrative_map.t)


def table_to_csv(table: CoherenceTable) -> str:
    """Debug dump: one `i,j,sim_event,sim_topic,coherence` row per entry."""
    out = io.StringIO()
    out.write("i,j,sim_event,sim_topic,coherence\n")
    order = {event_id: pos for pos, event_id in enumerate(table.ids)}
    for key in sorted(table.entries, key=lambda k: (order[k[0]], order[k[1]])):
        e = table.entries[key]
        out.write(f"{e.i},{e.j},{e.sim_event:.6f},{e.sim_topic:.6f},{e.coherence:.6f}\n")
    return out.getvalue()
