"""Derive the main storyline and representative landmarks from a map.

The main route is the maximum-likelihood s->t path under normalized edge
probabilities. Landmarks are the earliest maximum antichain: among all
antichains of maximum size, the one whose ascending timestamp tuple (then
ascending id tuple) is lexicographically smallest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InputError, InternalError
from .extract import NarrativeMap

# Exhaustive antichain enumeration below this node count; chain-cover-guided
# branch and bound above. Both are exact and must agree.
ENUMERATION_LIMIT = 25

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Analysis:
    """Main route, its likelihood and tie count, landmarks, and DAG width."""

    main_route: tuple[str, ...]
    route_likelihood: float
    route_ties: int
    landmarks: tuple[str, ...]
    width: int


class _Poset:
    """Reachability closure of a map as per-node bitmasks."""

    def __init__(self, narrative_map: NarrativeMap):
        self.ids = narrative_map.node_ids()
        self.n = len(self.ids)
        self.timestamps = [e.timestamp for e in narrative_map.nodes]
        index = {event_id: pos for pos, event_id in enumerate(self.ids)}
        succ: list[list[int]] = [[] for _ in range(self.n)]
        for edge in narrative_map.edges:
            succ[index[edge.i]].append(index[edge.j])
        self.descendants = [0] * self.n
        for i in range(self.n - 1, -1, -1):
            mask = 0
            for j in succ[i]:
                mask |= (1 << j) | self.descendants[j]
            self.descendants[i] = mask
        self.ancestors = [0] * self.n
        for i in range(self.n):
            mask = self.descendants[i]
            j = 0
            while mask:
                if mask & 1:
                    self.ancestors[j] |= 1 << i
                mask >>= 1
                j += 1
        full = (1 << self.n) - 1
        self.incomparable = [
            full & ~(self.descendants[i] | self.ancestors[i] | (1 << i))
            for i in range(self.n)
        ]

    def chain_cover_width(self, mask: int | None = None) -> int:
        """Antichain width of the sub-poset = nodes minus a maximum matching
        in the reachability bipartite graph (Dilworth via Koenig)."""
        members = [i for i in range(self.n)
                   if mask is None or (mask >> i) & 1]
        if not members:
            return 0
        allowed = sum(1 << i for i in members)
        match_right: dict[int, int] = {}

        def augment(left: int, seen: set[int]) -> bool:
            reach = self.descendants[left] & allowed
            j = 0
            while reach:
                if reach & 1 and j not in seen:
                    seen.add(j)
                    if j not in match_right or augment(match_right[j], seen):
                        match_right[j] = left
                        return True
                reach >>= 1
                j += 1
            return False

        matched = 0
        for left in members:
            if augment(left, set()):
                matched += 1
        return len(members) - matched

    def key_of(self, chosen: list[int]) -> tuple:
        stamps = tuple(sorted(self.timestamps[i] for i in chosen))
        names = tuple(sorted(self.ids[i] for i in chosen))
        return (stamps, names)


def _enumerate_earliest(poset: _Poset) -> list[int]:
    """Exhaustive antichain enumeration; returns the earliest maximum one."""
    best_size = 0
    best_key: tuple | None = None
    best: list[int] = []
    chosen: list[int] = []

    def visit(start: int, candidates: int) -> None:
        nonlocal best_size, best_key, best
        if chosen:
            size = len(chosen)
            key = poset.key_of(chosen)
            if size > best_size or (size == best_size
                                    and (best_key is None or key < best_key)):
                best_size = size
                best_key = key
                best = list(chosen)
        remaining = candidates >> start
        if len(chosen) + bin(remaining).count("1") < best_size:
            return
        for i in range(start, poset.n):
            if (candidates >> i) & 1:
                chosen.append(i)
                visit(i + 1, candidates & poset.incomparable[i])
                chosen.pop()

    visit(0, (1 << poset.n) - 1)
    return best


def _search_earliest(poset: _Poset) -> list[int]:
    """Chain-cover-guided branch and bound for the earliest maximum antichain.

    Exact: prunes on the matching width of the remaining candidates and on
    the sorted-timestamp prefix (sound because members are chosen in
    (timestamp, id) order, so the prefix is final).
    """
    target = poset.chain_cover_width()
    best: list[int] = []
    best_key: tuple | None = None
    chosen: list[int] = []

    def visit(start: int, candidates: int, tight: bool) -> None:
        nonlocal best, best_key
        if len(chosen) == target:
            key = poset.key_of(chosen)
            if best_key is None or key < best_key:
                best_key = key
                best = list(chosen)
            return
        remaining = candidates & ~((1 << start) - 1)
        need = target - len(chosen)
        if bin(remaining).count("1") < need:
            return
        if poset.chain_cover_width(remaining) < need:
            return
        position = len(chosen)
        for i in range(start, poset.n):
            if not (candidates >> i) & 1:
                continue
            now_tight = tight
            if best_key is not None and tight:
                stamp = poset.timestamps[i]
                anchor = best_key[0][position]
                if stamp > anchor:
                    return  # later candidates are no earlier; prefix cannot win
                now_tight = stamp == anchor
            chosen.append(i)
            visit(i + 1, candidates & poset.incomparable[i], now_tight)
            chosen.pop()

    visit(0, (1 << poset.n) - 1, True)
    if len(best) != target:
        raise InternalError("antichain search missed the chain-cover width")
    return best


def maximum_antichain(narrative_map: NarrativeMap) -> tuple[str, ...]:
    """Earliest maximum antichain of the map, as ids in map order."""
    poset = _Poset(narrative_map)
    if poset.n <= ENUMERATION_LIMIT:
        members = _enumerate_earliest(poset)
    else:
        members = _search_earliest(poset)
    return tuple(poset.ids[i] for i in sorted(members))


def width(narrative_map: NarrativeMap) -> int:
    """Size of a maximum antichain == minimum chain cover (Dilworth)."""
    return _Poset(narrative_map).chain_cover_width()


def _route_table(narrative_map: NarrativeMap):
    """Backward DP of best negative-log-probability cost to the sink."""
    ids = narrative_map.node_ids()
    index = {event_id: pos for pos, event_id in enumerate(ids)}
    succ: list[list[tuple[int, float]]] = [[] for _ in ids]
    for edge in narrative_map.edges:
        if edge.probability is None:
            raise InputError("main route needs a normalized map "
                             "(run normalize_outgoing first)")
        if edge.probability > 0.0:
            succ[index[edge.i]].append((index[edge.j], edge.probability))
    t_idx = index[narrative_map.t]
    cost = [math.inf] * len(ids)
    ways = [0] * len(ids)
    cost[t_idx] = 0.0
    ways[t_idx] = 1
    for i in range(len(ids) - 1, -1, -1):
        if i == t_idx:
            continue
        for j, prob in succ[i]:
            if math.isinf(cost[j]):
                continue
            candidate = -math.log(prob) + cost[j]
            if candidate < cost[i] - _TIE_TOL:
                cost[i] = candidate
                ways[i] = ways[j]
            elif abs(candidate - cost[i]) <= _TIE_TOL:
                ways[i] += ways[j]
    return ids, index, succ, cost, ways


def _best_route(narrative_map: NarrativeMap) -> tuple[list[str], float, int]:
    ids, index, succ, cost, ways = _route_table(narrative_map)
    s_idx = index[narrative_map.s]
    t_idx = index[narrative_map.t]
    if math.isinf(cost[s_idx]):
        raise InternalError("sink unreachable from source over positive-"
                            "probability edges; map invariant violated")
    path = [s_idx]
    likelihood = 1.0
    here = s_idx
    while here != t_idx:
        options = []
        for j, prob in succ[here]:
            if math.isinf(cost[j]):
                continue
            if abs(-math.log(prob) + cost[j] - cost[here]) <= _TIE_TOL:
                options.append((ids[j], j, prob))
        if not options:
            raise InternalError("route reconstruction lost the optimal path")
        _, here, prob = min(options)
        likelihood *= prob
        path.append(here)
    return [ids[i] for i in path], likelihood, ways[s_idx]


def main_route(narrative_map: NarrativeMap) -> tuple[list[str], float]:
    """Maximum-likelihood s->t path and its likelihood.

    Ties are broken toward the lexicographically smallest id sequence and
    reported via a warning.
    """
    path, likelihood, ties = _best_route(narrative_map)
    if ties > 1:
        warnings.warn(f"{ties} maximum-likelihood routes exist; returning the "
                      "lexicographically smallest")
    return path, likelihood


def analyze_map(narrative_map: NarrativeMap) -> Analysis:
    """Bundle route, landmarks, and width; cross-checks the width invariant."""
    path, likelihood, ties = _best_route(narrative_map)
    landmarks = maximum_antichain(narrative_map)
    dag_width = width(narrative_map)
    if len(landmarks) != dag_width:
        raise InternalError(f"antichain size {len(landmarks)} != width {dag_width}")
    if path[0] != narrative_map.s or path[-1] != narrative_map.t:
        raise InternalError("main route does not join the endpoints")
    return Analysis(main_route=tuple(path), route_likelihood=likelihood,
                    route_ties=ties, landmarks=landmarks, width=dag_width)
