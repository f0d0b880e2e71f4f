"""Traceback engines driving a ProbeOracle.

Two strategies are implemented. The naive engine scans every AS in
fixed-size chunks and binary-searches reacting chunks down to single
on-path ASes; a variant terminates early once a confirmed on-path AS is a
stub. The graph engine walks the deployment's rooted flow graph instead,
keeping a shrinking candidate set, a logbook of probed ASes, and the most
recently confirmed on-path AS; probes are picked layer by layer outward
from that AS and ranked by how many candidates are reachable through them.

Both engines are written against a list of oracles (one per probing
prefix). A single oracle gives the sequential algorithm; with k oracles up
to k probes are issued per step, so reported ``steps`` counts batches while
``advertisements`` counts individual probes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from . import _kernels
from .flowgraph import RootedSubgraph
from .simworld import Effect, ProbeOutcome


class Algorithm(enum.Enum):
    NAIVE = "naive"
    NAIVE_PLUS = "naive_plus"
    GRAPH = "graph"
    GRAPH_INDUCED = "graph_induced"


class ProbeOracle(Protocol):
    def probe(self, poisoned) -> ProbeOutcome: ...

    def step_count(self) -> int: ...


@dataclass
class TracebackState:
    """Working state of the graph engine: candidates C, logbook of probed
    ASes, most recent on-path AS, and the probe size n."""

    candidates: set[int]
    logbook: set[int]
    last_onpath: int
    probe_size: int


@dataclass(frozen=True)
class TracebackReport:
    final_candidates: frozenset[int]
    confirmed_onpath: tuple[int, ...]
    steps: int
    advertisements: int
    terminated_early: bool = False


def split(probe: Sequence[int]) -> tuple[list[int], list[int]]:
    """First ⌈|probe|/2⌉ elements and the rest, preserving order."""
    if len(probe) < 2:
        raise ValueError("cannot split a probe of fewer than 2 ASes")
    mid = math.ceil(len(probe) / 2)
    return list(probe[:mid]), list(probe[mid:])


def _consistent(chunk: Sequence[int], out: ProbeOutcome) -> list[int]:
    """ASes whose active result matches the passive observation."""
    if out.passive is Effect.STOP:
        return [x for x in chunk if out.active[x] is Effect.STOP]
    return [x for x in chunk if out.active[x] is not Effect.STOP]


# ---------------------------------------------------------------------
# naive engine
# ---------------------------------------------------------------------


def _naive_engine(oracles, all_ases, n, early_stub_stop, stubs, observer=None) -> TracebackReport:
    if n < 1:
        raise ValueError("probe size must be >= 1")
    stubs = stubs or frozenset()
    order = sorted(set(int(a) for a in all_ases))
    chunks = [order[i : i + n] for i in range(0, len(order), n)]
    # LIFO with split halves pushed first-half-last reproduces the
    # recursive depth-first probe order at k=1
    stack = list(reversed(chunks))
    confirmed: list[int] = []
    steps = 0
    ads = 0
    k = len(oracles)
    while stack:
        batch = [stack.pop() for _ in range(min(k, len(stack)))]
        outs = [oracles[i].probe(frozenset(p)) for i, p in enumerate(batch)]
        steps += 1
        ads += len(batch)
        children: list[tuple[list[int], list[int]]] = []
        for p, out in zip(batch, outs):
            kept = p if out.passive is Effect.NO_EFFECT else _consistent(p, out)
            if observer is not None:
                observer(steps, p, out, [x for x in p if x not in kept], len(confirmed))
            if out.passive is Effect.NO_EFFECT:
                continue
            if len(kept) == 1:
                confirmed.append(kept[0])
                if early_stub_stop and kept[0] in stubs:
                    return TracebackReport(
                        frozenset([kept[0]]), tuple(confirmed), steps, ads, True
                    )
            elif len(kept) >= 2:
                children.append(split(kept))
        for first, second in reversed(children):
            stack.append(second)
            stack.append(first)
    return TracebackReport(frozenset(confirmed), tuple(confirmed), steps, ads, False)


def naive_traceback(
    oracle: ProbeOracle,
    all_ases: Sequence[int],
    n: int,
    early_stub_stop: bool = False,
    stubs: frozenset[int] | None = None,
) -> TracebackReport:
    """Chunked scan-and-bisect over every AS (optionally stopping at the
    first confirmed stub, which must be the origin)."""
    return _naive_engine([oracle], all_ases, n, early_stub_stop, stubs)


# ---------------------------------------------------------------------
# graph engine
# ---------------------------------------------------------------------


class _GraphRun:
    """Per-run scratch for the graph engine: candidate mask over the
    subgraph's ASes, node-level candidate flags for probe ranking, and a
    distance-layer cache keyed by the last on-path AS."""

    def __init__(self, g: RootedSubgraph):
        self.g = g
        self.n_as = len(g.sub_asns)
        self.cand = np.ones(self.n_as, dtype=bool)
        pos = g.sub_as_positions
        self.ul = g.u_local[pos]
        self.cl = g.c_local[pos]
        self.node_as = g._as_index_of_pos[g.global_ids // 2]
        self._dist_cache: dict[int, np.ndarray] = {}
        self._asq = np.empty(self.n_as, dtype=np.int64)

    def as_any(self, node_mask: np.ndarray) -> np.ndarray:
        """AS-index mask: ASes with at least one node in ``node_mask``."""
        m = np.zeros(self.n_as, dtype=bool)
        has_u = self.ul >= 0
        m[has_u] = node_mask[self.ul[has_u]] > 0
        has_c = self.cl >= 0
        m[has_c] |= node_mask[self.cl[has_c]] > 0
        return m

    def as_all(self, node_mask: np.ndarray) -> np.ndarray:
        """AS-index mask: ASes whose every present node is in ``node_mask``.

        Candidate elimination must use this projection: an AS stays a viable
        source as long as any of its nodes still hears the advertisement, so
        it may only be ruled out once the evidence covers all of them.
        """
        m = np.ones(self.n_as, dtype=bool)
        has_u = self.ul >= 0
        m[has_u] &= node_mask[self.ul[has_u]] > 0
        has_c = self.cl >= 0
        m[has_c] &= node_mask[self.cl[has_c]] > 0
        return m

    def node_ids(self, asns) -> np.ndarray:
        return self.g.node_ids_of_ases(asns)

    def layers_from(self, last_onpath: int) -> np.ndarray:
        """AS-hop distance from the successors of ``last_onpath``; -1 for
        ASes unreachable from there (they form the outermost layer)."""
        dist = self._dist_cache.get(last_onpath)
        if dist is None:
            g = self.g
            i = g.as_index(last_onpath)
            succ = g.as_indices[g.as_indptr[i] : g.as_indptr[i + 1]].astype(np.int64)
            dist = np.full(self.n_as, -1, dtype=np.int64)
            _kernels.bfs_layers(g.as_indptr, g.as_indices, succ, dist, self._asq)
            self._dist_cache[last_onpath] = dist
        return dist

    def pick(self, logged: np.ndarray, last_onpath: int, n: int) -> list[int]:
        g = self.g
        rem = np.flatnonzero(self.cand & ~logged)
        if len(rem) == 0:
            raise ValueError("no unprobed candidates left to pick from")
        dist = self.layers_from(last_onpath)
        d = dist[rem].copy()
        d[d < 0] = self.n_as  # unreached ASes form the outermost layer
        order = np.argsort(d, kind="stable")
        rem, d = rem[order], d[order]
        node_flag = self.cand[self.node_as].astype(np.uint8)
        picked: list[int] = []
        start = 0
        while start < len(rem) and len(picked) < n:
            stop = int(np.searchsorted(d, d[start], side="right"))
            layer = [int(g.sub_asns[i]) for i in rem[start:stop]]
            layer.sort(key=lambda a: (-g.reach_count_in(a, node_flag), a))
            picked.extend(layer)
            start = stop
        return picked[:n]

    def update(self, probe: Sequence[int], out: ProbeOutcome, handle_induced: bool) -> list[int]:
        """Apply the passive and active candidate reductions for one probe
        result; returns the probe with inconsistent ASes dropped."""
        g = self.g
        probe_nodes = self.node_ids(probe)
        ind_stop = ind_change = None
        if handle_induced:
            if out.passive is Effect.STOP:
                ind_stop = g.induced_stop_mask(probe_nodes)
            elif out.passive is Effect.TTL_CHANGE:
                ind_change = g.induced_change_mask(probe_nodes)

        if out.passive is Effect.STOP:
            keep = g.dominated_mask(probe_nodes)
            if ind_stop is not None:
                keep = (keep | ind_stop).astype(np.uint8)
            self.cand &= self.as_any(keep)
        elif out.passive is Effect.TTL_CHANGE:
            keep = g.reach_mask(probe_nodes)
            if ind_change is not None:
                keep = (keep | ind_change).astype(np.uint8)
            self.cand &= self.as_any(keep)

        if out.passive is Effect.STOP:
            inconsistent = [x for x in probe if out.active[x] is not Effect.STOP]
            if inconsistent:
                drop = g.reach_mask(self.node_ids(inconsistent))
                if handle_induced:
                    if ind_stop is None:
                        ind_stop = g.induced_stop_mask(probe_nodes)
                    drop = (drop & (ind_stop == 0)).astype(np.uint8)
                self.cand &= ~self.as_all(drop)
        else:
            inconsistent = [x for x in probe if out.active[x] is Effect.STOP]
            if inconsistent:
                drop = g.dominated_mask(self.node_ids(inconsistent))
                if handle_induced:
                    if ind_change is None:
                        ind_change = g.induced_change_mask(probe_nodes)
                    drop = (drop & (ind_change == 0)).astype(np.uint8)
                self.cand &= ~self.as_all(drop)
        dropped = set(inconsistent)
        return [x for x in probe if x not in dropped]


def pick_probe(g: RootedSubgraph, state: TracebackState) -> list[int]:
    """Next probe: unprobed candidates from the nearest distance layers
    around the last on-path AS, ranked by candidate reach (ties by ASN)."""
    run = _GraphRun(g)
    run.cand[:] = False
    for asn in state.candidates:
        if g.has_asn(asn):
            run.cand[g.as_index(asn)] = True
    logged = np.zeros(run.n_as, dtype=bool)
    for asn in state.logbook:
        if g.has_asn(asn):
            logged[g.as_index(asn)] = True
    return run.pick(logged, state.last_onpath, state.probe_size)


def _graph_engine(oracles, g: RootedSubgraph, n, handle_induced, observer=None) -> TracebackReport:
    if n < 1:
        raise ValueError("probe size must be >= 1")
    run = _GraphRun(g)
    # the deployment AS itself is never poisoned, so it starts pre-logged
    logged = np.zeros(run.n_as, dtype=bool)
    logged[g.as_index(g.root_asn)] = True
    last_onpath = g.root_asn
    confirmed: list[int] = []
    steps = 0
    ads = 0
    k = len(oracles)
    pending: list[list[int]] = []  # split halves awaiting re-probe (LIFO)
    while True:
        batch: list[list[int]] = []
        while len(batch) < k and pending:
            batch.append(pending.pop())
        while len(batch) < k:
            if not (run.cand & ~logged).any():
                break
            probe = run.pick(logged, last_onpath, n)
            for asn in probe:
                logged[g.as_index(asn)] = True
            batch.append(probe)
        if not batch:
            break
        outs = [oracles[i].probe(frozenset(p)) for i, p in enumerate(batch)]
        steps += 1
        ads += len(batch)
        children: list[tuple[list[int], list[int]]] = []
        for p, out in zip(batch, outs):
            kept = run.update(p, out, handle_induced)
            if observer is not None:
                observer(steps, p, out, [x for x in p if x not in kept], int(run.cand.sum()))
            if out.passive is Effect.NO_EFFECT:
                continue
            if len(kept) == 1:
                last_onpath = kept[0]
                confirmed.append(kept[0])
            elif len(kept) >= 2:
                children.append(split(kept))
        for first, second in reversed(children):
            pending.append(second)
            pending.append(first)
    final = frozenset(int(g.sub_asns[i]) for i in np.flatnonzero(run.cand))
    return TracebackReport(final, tuple(confirmed), steps, ads, False)


def graph_traceback(
    oracle: ProbeOracle, g: RootedSubgraph, n: int, handle_induced: bool = False
) -> TracebackReport:
    """Candidate-elimination traceback over the deployment's rooted flow
    graph, optionally retaining ASes explainable by induced route changes."""
    return _graph_engine([oracle], g, n, handle_induced)


def parallel_traceback(
    oracles: Sequence[ProbeOracle],
    algorithm: Algorithm,
    g: RootedSubgraph,
    n: int,
    all_ases: Sequence[int] | None = None,
    stubs: frozenset[int] | None = None,
    observer=None,
) -> TracebackReport:
    """Run one of the algorithms with up to ``len(oracles)`` probes in
    flight per step. One oracle degenerates to the sequential algorithm."""
    if not oracles:
        raise ValueError("need at least one probing prefix oracle")
    if algorithm in (Algorithm.NAIVE, Algorithm.NAIVE_PLUS):
        if all_ases is None:
            all_ases = [a for a in (int(x) for x in g.sub_asns) if a != g.root_asn]
        return _naive_engine(
            list(oracles), all_ases, n, algorithm is Algorithm.NAIVE_PLUS, stubs, observer
        )
    return _graph_engine(
        list(oracles), g, n, algorithm is Algorithm.GRAPH_INDUCED, observer
    )
