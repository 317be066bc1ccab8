"""Build and solve the weakest-link linear program, then round the fractional
solution into a valid single-source/single-sink narrative map.

The LP maximizes the minimum coherence over activated edges subject to
structural (st-graph degree) constraints, a floor on the number of active
events, and an average topic-coverage constraint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .coherence import CoherenceTable, edge_membership
from .corpus import Corpus, Event
from .errors import InfeasibleError, InputError, InternalError
from .topics import TopicModel

_EPS = 1e-9
COVERAGE_SLACK = 0.05

EdgeKey = tuple[str, str]


@dataclass(frozen=True)
class ExtractionConfig:
    """Tunable extraction parameters.

    K is a floor on the number of active events; mincover is the required
    average normalized cluster coverage; rounding_threshold activates edges
    whose fractional value reaches it.
    """

    K: int = 6
    mincover: float = 0.8
    rounding_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.K < 2:
            raise InputError(f"K must be >= 2, got {self.K}")
        if not 0.0 < self.mincover <= 1.0:
            raise InputError(f"mincover must lie in (0, 1], got {self.mincover}")
        if not 0.0 < self.rounding_threshold < 1.0:
            raise InputError(
                f"rounding threshold must lie in (0, 1), got {self.rounding_threshold}")


@dataclass(frozen=True)
class MapEdge:
    i: str
    j: str
    coherence: float
    probability: float | None = None

    @property
    def key(self) -> EdgeKey:
        return (self.i, self.j)


@dataclass(frozen=True)
class NarrativeMap:
    """Weighted st-DAG over a subset of events; edges run strictly forward
    in (timestamp, id) order."""

    nodes: tuple[Event, ...]
    edges: tuple[MapEdge, ...]
    s: str
    t: str

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda e: e.order_key))
        order = {e.id: pos for pos, e in enumerate(nodes)}
        if len(order) != len(nodes):
            raise InternalError("duplicate node ids in narrative map")
        for endpoint in (self.s, self.t):
            if endpoint not in order:
                raise InternalError(f"endpoint {endpoint!r} missing from map nodes")
        for edge in self.edges:
            if edge.i not in order or edge.j not in order:
                raise InternalError(f"edge ({edge.i!r}, {edge.j!r}) references a "
                                    "node outside the map")
            if order[edge.i] >= order[edge.j]:
                raise InternalError(f"edge ({edge.i!r}, {edge.j!r}) is not forward "
                                    "in (timestamp, id) order")
        edges = tuple(sorted(self.edges, key=lambda e: (order[e.i], order[e.j])))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    def node_ids(self) -> list[str]:
        return [e.id for e in self.nodes]

    def order(self) -> dict[str, int]:
        return {e.id: pos for pos, e in enumerate(self.nodes)}

    def get_node(self, event_id: str) -> Event:
        for e in self.nodes:
            if e.id == event_id:
                return e
        raise InputError(f"node {event_id!r} not in map")

    def successors(self, event_id: str) -> list[MapEdge]:
        return [e for e in self.edges if e.i == event_id]

    def predecessors(self, event_id: str) -> list[MapEdge]:
        return [e for e in self.edges if e.j == event_id]

    def weakest_link(self) -> float | None:
        """Minimum raw coherence over map edges, or None for an edgeless map."""
        if not self.edges:
            return None
        return min(e.coherence for e in self.edges)


@dataclass(frozen=True)
class LinearProgram:
    """Relaxation with variables [minedge, node_1..node_n, x_1..x_m]."""

    ids: tuple[str, ...]
    edge_keys: tuple[EdgeKey, ...]
    s: str
    t: str
    config: ExtractionConfig
    objective: np.ndarray
    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    ub_families: tuple[str, ...]
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    coverage_gain: dict[EdgeKey, float]
    cluster_weights: tuple[dict[EdgeKey, float], ...]
    cmax: tuple[float, ...]
    active_clusters: tuple[int, ...]

    @property
    def n_variables(self) -> int:
        return 1 + len(self.ids) + len(self.edge_keys)


@dataclass(frozen=True)
class LpSolution:
    """Optimal fractional solution of the relaxation."""

    objective: float
    nodes: dict[str, float]
    edges: dict[EdgeKey, float]
    coverage: dict[int, float]

    def __post_init__(self):
        if not -_EPS <= self.objective <= 1.0 + _EPS:
            raise InternalError(f"LP objective {self.objective} outside [0, 1]")


def lp_candidates(table: CoherenceTable, s: str, t: str) -> list[EdgeKey]:
    """Table pairs eligible as LP edge variables: everything except edges
    into the start or out of the end, in (order_i, order_j) order."""
    order = {event_id: pos for pos, event_id in enumerate(table.ids)}
    keys = [k for k in table.entries if k[1] != s and k[0] != t]
    keys.sort(key=lambda k: (order[k[0]], order[k[1]]))
    return keys


def build_lp(table: CoherenceTable, topics: TopicModel, s: str, t: str,
             config: ExtractionConfig) -> LinearProgram:
    """Assemble the weakest-link LP over the table's candidate pairs."""
    if s not in table.ids or t not in table.ids:
        raise InputError(f"endpoints ({s!r}, {t!r}) must appear in the table")
    ids = table.ids
    edge_keys = lp_candidates(table, s, t)
    if not any(k[0] == s for k in edge_keys):
        raise InfeasibleError(f"start event {s!r} has no outgoing candidates",
                              family="connectivity")
    if not any(k[1] == t for k in edge_keys):
        raise InfeasibleError(f"end event {t!r} has no incoming candidates",
                              family="connectivity")

    node_col = {event_id: 1 + pos for pos, event_id in enumerate(ids)}
    edge_col = {key: 1 + len(ids) + pos for pos, key in enumerate(edge_keys)}
    n_vars = 1 + len(ids) + len(edge_keys)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    b_ub: list[float] = []
    families: list[str] = []

    def add_row(family: str, coeffs: list[tuple[int, float]], bound: float) -> None:
        row = len(b_ub)
        for col, val in coeffs:
            rows.append(row)
            cols.append(col)
            vals.append(val)
        b_ub.append(bound)
        families.append(family)

    # Weakest link: minedge <= c_ij * x_ij + (1 - x_ij) for every candidate.
    for key in edge_keys:
        c_e = table.entries[key].coherence
        add_row("weakest-link", [(0, 1.0), (edge_col[key], 1.0 - c_e)], 1.0)

    # Coupling: an edge activates only as far as both endpoints do.
    for key in edge_keys:
        add_row("coupling", [(edge_col[key], 1.0), (node_col[key[0]], -1.0)], 0.0)
        add_row("coupling", [(edge_col[key], 1.0), (node_col[key[1]], -1.0)], 0.0)

    # Connectivity: the start emits, the end absorbs, and every internal
    # active event needs both incoming and outgoing activation.
    incoming: dict[str, list[EdgeKey]] = {event_id: [] for event_id in ids}
    outgoing: dict[str, list[EdgeKey]] = {event_id: [] for event_id in ids}
    for key in edge_keys:
        outgoing[key[0]].append(key)
        incoming[key[1]].append(key)
    add_row("connectivity", [(edge_col[k], -1.0) for k in outgoing[s]], -1.0)
    add_row("connectivity", [(edge_col[k], -1.0) for k in incoming[t]], -1.0)
    for event_id in ids:
        if event_id in (s, t):
            continue
        add_row("connectivity",
                [(node_col[event_id], 1.0)] + [(edge_col[k], -1.0)
                                               for k in incoming[event_id]], 0.0)
        add_row("connectivity",
                [(node_col[event_id], 1.0)] + [(edge_col[k], -1.0)
                                               for k in outgoing[event_id]], 0.0)

    # Size floor: at least K active events.
    add_row("size", [(node_col[event_id], -1.0) for event_id in ids],
            -float(config.K))

    # Coverage: average normalized cluster coverage must reach mincover.
    cluster_weights: list[dict[EdgeKey, float]] = []
    cmax: list[float] = []
    for q in range(topics.k):
        weights = {}
        for key in edge_keys:
            mass = table.entries[key].coherence * edge_membership(topics, key[0],
                                                                  key[1], q)
            if mass > 0.0:
                weights[key] = mass
        cluster_weights.append(weights)
        cmax.append(sum(weights.values()))
    active_clusters = tuple(q for q in range(topics.k) if cmax[q] > 0.0)
    dropped = [q for q in range(topics.k) if cmax[q] <= 0.0]
    if dropped:
        warnings.warn(f"clusters {dropped} have no attainable coverage; "
                      "dropping them from the coverage average")
    if not active_clusters:
        raise InfeasibleError("all clusters are degenerate: no candidate edge "
                              "carries any cluster membership", family="coverage")
    coverage_gain: dict[EdgeKey, float] = {key: 0.0 for key in edge_keys}
    for q in active_clusters:
        for key, mass in cluster_weights[q].items():
            coverage_gain[key] += mass / (cmax[q] * len(active_clusters))
    add_row("coverage", [(edge_col[k], -gain) for k, gain in coverage_gain.items()
                         if gain > 0.0], -config.mincover)

    a_ub = sp.csr_matrix((vals, (rows, cols)), shape=(len(b_ub), n_vars))
    a_eq = sp.csr_matrix(
        ([1.0, 1.0], ([0, 1], [node_col[s], node_col[t]])), shape=(2, n_vars))
    objective = np.zeros(n_vars)
    objective[0] = -1.0  # maximize minedge

    return LinearProgram(
        ids=ids, edge_keys=tuple(edge_keys), s=s, t=t, config=config,
        objective=objective, a_ub=a_ub, b_ub=np.array(b_ub),
        ub_families=tuple(families), a_eq=a_eq, b_eq=np.array([1.0, 1.0]),
        coverage_gain=coverage_gain, cluster_weights=tuple(cluster_weights),
        cmax=tuple(cmax), active_clusters=active_clusters)


def _run_lp(lp: LinearProgram, drop_families: frozenset[str] = frozenset()):
    if drop_families:
        mask = np.array([fam not in drop_families for fam in lp.ub_families])
        a_ub = lp.a_ub[mask]
        b_ub = lp.b_ub[mask]
    else:
        a_ub, b_ub = lp.a_ub, lp.b_ub
    return linprog(lp.objective, A_ub=a_ub, b_ub=b_ub, A_eq=lp.a_eq,
                   b_eq=lp.b_eq, bounds=(0.0, 1.0), method="highs")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the relaxation; on infeasibility, name the failing constraint
    family by relaxation probing (coverage, then size, then connectivity)."""
    result = _run_lp(lp)
    if result.status == 2:
        if _run_lp(lp, frozenset({"coverage"})).status == 0:
            raise InfeasibleError(
                f"coverage constraint unsatisfiable at mincover="
                f"{lp.config.mincover}; lower mincover", family="coverage")
        if _run_lp(lp, frozenset({"coverage", "size"})).status == 0:
            raise InfeasibleError(
                f"size floor K={lp.config.K} unsatisfiable; lower K",
                family="size")
        raise InfeasibleError("structural constraints unsatisfiable: the start "
                              "cannot be joined to the end", family="connectivity")
    if result.status != 0:
        raise InternalError(f"LP solver returned status {result.status}: "
                            f"{result.message}")

    values = np.clip(result.x, 0.0, 1.0)
    nodes = {event_id: float(values[1 + pos]) for pos, event_id in enumerate(lp.ids)}
    offset = 1 + len(lp.ids)
    edges = {key: float(values[offset + pos])
             for pos, key in enumerate(lp.edge_keys)}
    coverage = {}
    for q in lp.active_clusters:
        cover = sum(mass * edges[key] for key, mass in lp.cluster_weights[q].items())
        coverage[q] = cover / lp.cmax[q]
    return LpSolution(objective=float(values[0]), nodes=nodes, edges=edges,
                      coverage=coverage)


class _Rounder:
    """Deterministic rounding state machine over the LP candidates."""

    def __init__(self, sol: LpSolution, table: CoherenceTable,
                 topics: TopicModel, s: str, t: str, config: ExtractionConfig):
        self.sol = sol
        self.table = table
        self.s = s
        self.t = t
        self.config = config
        self.order = {event_id: pos for pos, event_id in enumerate(table.ids)}
        self.candidates = lp_candidates(table, s, t)
        self.coh = {key: table.entries[key].coherence for key in self.candidates}
        # Per-edge contribution to the average normalized coverage.
        cluster_weights: list[dict[EdgeKey, float]] = []
        cmax: list[float] = []
        for q in range(topics.k):
            weights = {}
            for key in self.candidates:
                mass = self.coh[key] * edge_membership(topics, key[0], key[1], q)
                if mass > 0.0:
                    weights[key] = mass
            cluster_weights.append(weights)
            cmax.append(sum(weights.values()))
        active = [q for q in range(topics.k) if cmax[q] > 0.0]
        self.gain = {key: 0.0 for key in self.candidates}
        for q in active:
            for key, mass in cluster_weights[q].items():
                self.gain[key] += mass / (cmax[q] * len(active))
        self.active_edges: set[EdgeKey] = set()
        self.active_nodes: set[str] = {s, t}
        self.failed_edges: set[EdgeKey] = set()

    # -- graph helpers over the current active edge set --

    def _adjacency(self, forward: bool) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {}
        for i, j in self.active_edges:
            if forward:
                adj.setdefault(i, []).append(j)
            else:
                adj.setdefault(j, []).append(i)
        return adj

    def _reach(self, root: str, forward: bool,
               extra: EdgeKey | None = None) -> set[str]:
        adj = self._adjacency(forward)
        if extra is not None:
            a, b = extra if forward else (extra[1], extra[0])
            adj.setdefault(a, []).append(b)
        seen = {root}
        stack = [root]
        while stack:
            for nxt in adj.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def _violations(self, extra: EdgeKey | None = None) -> int:
        reach_s = self._reach(self.s, True, extra)
        reach_t = self._reach(self.t, False, extra)
        return sum((v not in reach_s) + (v not in reach_t)
                   for v in self.active_nodes)

    def _activate(self, key: EdgeKey) -> None:
        self.active_edges.add(key)
        self.active_nodes.add(key[0])
        self.active_nodes.add(key[1])

    def _drop_node(self, node: str) -> None:
        self.active_nodes.discard(node)
        self.active_edges = {e for e in self.active_edges if node not in e}

    # -- rounding passes --

    def threshold_pass(self) -> None:
        tau = self.config.rounding_threshold
        for key in self.candidates:
            if self.sol.edges.get(key, 0.0) >= tau - _EPS:
                self._activate(key)

    def repair_pass(self) -> None:
        """Connect every active node to an s->t path, or prune it."""
        while True:
            reach_s = self._reach(self.s, True)
            reach_t = self._reach(self.t, False)
            violated = sorted((v for v in self.active_nodes
                               if v not in reach_s or v not in reach_t),
                              key=lambda v: self.order[v])
            if not violated:
                return
            current = self._violations()
            best: tuple[float, float, int, int] | None = None
            best_key: EdgeKey | None = None
            for key in self.candidates:
                if key in self.active_edges or key in self.failed_edges:
                    continue
                i, j = key
                if i not in self.active_nodes or j not in self.active_nodes:
                    continue
                # Only edges that extend reachability can help.
                if not ((i in reach_s and j not in reach_s)
                        or (j in reach_t and i not in reach_t)):
                    continue
                if self._violations(extra=key) >= current:
                    continue
                weight = self.sol.edges.get(key, 0.0) * self.coh[key]
                rank = (-weight, -self.coh[key], self.order[i], self.order[j])
                if best is None or rank < best:
                    best = rank
                    best_key = key
            if best_key is not None:
                self._activate(best_key)
                continue
            prunable = [v for v in violated if v not in (self.s, self.t)]
            if not prunable:
                raise InfeasibleError(
                    "rounding repair cannot connect the start to the end; "
                    "lower mincover or K", family="connectivity")
            victim = min(prunable,
                         key=lambda v: (self.sol.nodes.get(v, 0.0), self.order[v]))
            self._drop_node(victim)

    def size_pass(self) -> None:
        """Grow the active set to the K-node floor along strong edges."""
        while len(self.active_nodes) < self.config.K:
            reach_s = self._reach(self.s, True)
            reach_t = self._reach(self.t, False)
            inactive = sorted((v for v in self.table.ids
                               if v not in self.active_nodes),
                              key=lambda v: (-self.sol.nodes.get(v, 0.0),
                                             self.order[v]))
            def rank(k: EdgeKey):
                return (-self.sol.edges.get(k, 0.0) * self.coh[k],
                        -self.coh[k], self.order[k[0]], self.order[k[1]])

            grown = False
            for node in inactive:
                into = [k for k in self.candidates if k[1] == node
                        and k[0] in self.active_nodes and k[0] in reach_s]
                out = [k for k in self.candidates if k[0] == node
                       and k[1] in self.active_nodes and k[1] in reach_t]
                if not into or not out:
                    continue
                self._activate(min(into, key=rank))
                self._activate(min(out, key=rank))
                grown = True
                break
            if not grown:
                raise InfeasibleError(
                    f"cannot grow the map to the K={self.config.K} event floor",
                    family="size")

    def realized_coverage(self) -> float:
        return sum(self.gain[key] for key in self.active_edges)

    def coverage_pass(self) -> None:
        """Add the most coverage-efficient inactive edges until the realized
        average coverage clears mincover minus the rounding slack."""
        target = self.config.mincover - COVERAGE_SLACK
        while self.realized_coverage() < target - _EPS:
            weakest = min((self.coh[k] for k in self.active_edges), default=1.0)
            best: tuple[float, int, int] | None = None
            best_key: EdgeKey | None = None
            for key in self.candidates:
                if key in self.active_edges or key in self.failed_edges:
                    continue
                if self.gain[key] <= 0.0:
                    continue
                loss = max(0.0, weakest - self.coh[key])
                score = self.gain[key] / (loss + _EPS)
                rank = (-score, self.order[key[0]], self.order[key[1]])
                if best is None or rank < best:
                    best = rank
                    best_key = key
            if best_key is None:
                raise InfeasibleError(
                    f"cannot raise coverage to {target:.3f} during rounding; "
                    "lower mincover", family="coverage")
            self._activate(best_key)
            self.repair_pass()
            if best_key not in self.active_edges:
                self.failed_edges.add(best_key)

    def prune_pass(self) -> None:
        while True:
            reach_s = self._reach(self.s, True)
            reach_t = self._reach(self.t, False)
            dead = [v for v in self.active_nodes
                    if v not in reach_s or v not in reach_t]
            dead = [v for v in dead if v not in (self.s, self.t)]
            if not dead:
                return
            for v in dead:
                self._drop_node(v)

    def satisfied(self) -> bool:
        if len(self.active_nodes) < self.config.K:
            return False
        if self.realized_coverage() < self.config.mincover - COVERAGE_SLACK - _EPS:
            return False
        reach_s = self._reach(self.s, True)
        reach_t = self._reach(self.t, False)
        return all(v in reach_s and v in reach_t for v in self.active_nodes)


def round_solution(sol: LpSolution, table: CoherenceTable, topics: TopicModel,
                   s: str, t: str, config: ExtractionConfig,
                   corpus: Corpus) -> NarrativeMap:
    """Deterministically round the fractional solution into a narrative map.

    Threshold activation, connectivity repair, size floor, then coverage
    additions; nodes that cannot be put on an s->t path are pruned.
    """
    events = {e.id: e for e in corpus}
    rounder = _Rounder(sol, table, topics, s, t, config)
    rounder.threshold_pass()
    for _ in range(4):
        rounder.repair_pass()
        rounder.size_pass()
        rounder.coverage_pass()
        rounder.prune_pass()
        if rounder.satisfied():
            break
    else:
        raise InfeasibleError(
            "rounding could not satisfy the size and coverage floors together; "
            "lower mincover or K", family="coverage")

    nodes = []
    for event_id in sorted(rounder.active_nodes, key=lambda v: rounder.order[v]):
        if event_id not in events:
            raise InputError(f"no event record for id {event_id!r}")
        nodes.append(events[event_id])
    edges = tuple(MapEdge(i=i, j=j, coherence=rounder.coh[(i, j)])
                  for i, j in sorted(rounder.active_edges,
                                     key=lambda k: (rounder.order[k[0]],
                                                    rounder.order[k[1]])))
    narrative_map = NarrativeMap(nodes=tuple(nodes), edges=edges, s=s, t=t)
    _assert_st_valid(narrative_map)
    return narrative_map


def _assert_st_valid(narrative_map: NarrativeMap) -> None:
    report = verify_structure(narrative_map)
    bad = [c.name for c in report if not c.passed]
    if bad:
        raise InternalError(f"rounded map violates invariants: {', '.join(bad)}")


@dataclass(frozen=True)
class ClusterCoverage:
    cluster: int
    cover: float
    cmax: float
    normalized: float | None  # None for degenerate (unattainable) clusters


@dataclass(frozen=True)
class CoverageReport:
    clusters: tuple[ClusterCoverage, ...]
    average: float

    def normalized(self) -> list[float]:
        return [c.normalized for c in self.clusters if c.normalized is not None]


def compute_coverage(narrative_map: NarrativeMap, table: CoherenceTable,
                     topics: TopicModel) -> CoverageReport:
    """Per-cluster normalized coverage of the map's edges, plus the average.

    Normalization is against the best attainable mass over all candidate
    pairs (excluding edges into the start and out of the end).
    """
    candidates = lp_candidates(table, narrative_map.s, narrative_map.t)
    active = set()
    for edge in narrative_map.edges:
        if edge.key not in table.entries:
            raise InputError(f"map edge ({edge.i!r}, {edge.j!r}) missing from table")
        active.add(edge.key)
    clusters = []
    total = 0.0
    n_active = 0
    for q in range(topics.k):
        cover = 0.0
        cmax = 0.0
        for key in candidates:
            mass = table.entries[key].coherence * edge_membership(topics, key[0],
                                                                  key[1], q)
            cmax += mass
            if key in active:
                cover += mass
        if cmax > 0.0:
            normalized = cover / cmax
            total += normalized
            n_active += 1
        else:
            normalized = None
        clusters.append(ClusterCoverage(cluster=q, cover=cover, cmax=cmax,
                                        normalized=normalized))
    average = total / n_active if n_active else 0.0
    return CoverageReport(clusters=tuple(clusters), average=average)


@dataclass(frozen=True)
class VerifyCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[VerifyCheck, ...]

    def __iter__(self):
        return iter(self.checks)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _reachable(narrative_map: NarrativeMap, root: str, forward: bool) -> set[str]:
    adj: dict[str, list[str]] = {}
    for e in narrative_map.edges:
        a, b = (e.i, e.j) if forward else (e.j, e.i)
        adj.setdefault(a, []).append(b)
    seen = {root}
    stack = [root]
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def verify_structure(narrative_map: NarrativeMap) -> VerifyReport:
    """Structural subset of verify(); usable without table/topics."""
    ids = narrative_map.node_ids()
    order = narrative_map.order()
    has_in = {e.j for e in narrative_map.edges}
    has_out = {e.i for e in narrative_map.edges}
    sources = [v for v in ids if v not in has_in]
    sinks = [v for v in ids if v not in has_out]
    reach_s = _reachable(narrative_map, narrative_map.s, True)
    reach_t = _reachable(narrative_map, narrative_map.t, False)
    off_path = [v for v in ids if v not in reach_s or v not in reach_t]
    forward = all(order[e.i] < order[e.j] for e in narrative_map.edges)
    checks = (
        VerifyCheck("single_source", sources == [narrative_map.s],
                    f"sources={sources}, expected [{narrative_map.s!r}]"),
        VerifyCheck("single_sink", sinks == [narrative_map.t],
                    f"sinks={sinks}, expected [{narrative_map.t!r}]"),
        VerifyCheck("forward_edges", forward, "all edges forward in (timestamp, id)"),
        VerifyCheck("nodes_on_path", not off_path,
                    f"nodes off every s->t path: {off_path}"),
    )
    return VerifyReport(checks=checks)


def verify(narrative_map: NarrativeMap, topics: TopicModel,
           table: CoherenceTable, config: ExtractionConfig) -> VerifyReport:
    """Report-only validation of a map against the extraction contract."""
    structural = verify_structure(narrative_map).checks
    coverage = compute_coverage(narrative_map, table, topics)
    floor = config.mincover - COVERAGE_SLACK
    checks = structural + (
        VerifyCheck("node_count", len(narrative_map.nodes) >= config.K,
                    f"{len(narrative_map.nodes)} nodes, floor K={config.K}"),
        VerifyCheck("coverage", coverage.average >= floor - _EPS,
                    f"average coverage {coverage.average:.4f}, floor {floor:.4f}"),
    )
    return VerifyReport(checks=checks)
