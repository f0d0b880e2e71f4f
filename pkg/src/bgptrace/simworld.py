"""Sampled routing worlds and the simulated probing primitive.

One :class:`SimWorld` is a fully sampled universe: per-edge local-preference
weights, default-route flags, alternate weights used by defaulting ASes
under poisoning, and a deterministic per-AS-triple hop-count model. Probing
an AS set answers with the passive effect on the origin's traffic
(NO_EFFECT, TTL_CHANGE, STOP) and per-probed-AS active ping results.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels
from .flowgraph import RootedSubgraph, UnknownASError

_SENTINEL_ASN = 0  # stands in for the missing neighbor at path boundaries


class Effect(enum.Enum):
    NO_EFFECT = "no_effect"
    TTL_CHANGE = "ttl_change"
    STOP = "stop"


@dataclass(frozen=True)
class SimConfig:
    default_route_probability: float = 0.4
    differing_default_probability: float = 0.3
    weight_min: int = 0
    weight_max: int = 100
    default_penalty: int = 10_000
    hop_k: int = 3
    hop_p: float = 0.62
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.default_route_probability <= 1.0:
            raise ValueError("default_route_probability must be in [0, 1]")
        if not 0.0 <= self.differing_default_probability <= 1.0:
            raise ValueError("differing_default_probability must be in [0, 1]")
        if self.weight_min < 0 or self.weight_max < self.weight_min:
            raise ValueError("invalid weight range")
        # a penalized edge must never beat an unpenalized one
        if self.default_penalty <= self.weight_max:
            raise ValueError("default_penalty must exceed weight_max")
        if self.hop_k < 1 or not 0.0 < self.hop_p <= 1.0:
            raise ValueError("invalid hop model parameters")


@dataclass(frozen=True)
class ProbeOutcome:
    passive: Effect
    active: dict[int, Effect] = field(default_factory=dict)


_U64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


class SimWorld:
    """Immutable sampled universe over a rooted subgraph.

    Construct via :func:`init_world`; identical (subgraph, config, origin)
    inputs always produce an identical world.
    """

    def __init__(self, subgraph: RootedSubgraph, cfg: SimConfig, origin: int):
        if not subgraph.has_asn(origin):
            raise UnknownASError(origin)
        self.subgraph = subgraph
        self.cfg = cfg
        self.origin = origin

        g = subgraph
        rng = np.random.default_rng(cfg.seed)
        lo, hi = cfg.weight_min, cfg.weight_max
        self.primary_weights = rng.integers(lo, hi + 1, size=g.n_edges).astype(np.int64)
        self.secondary_weights = rng.integers(lo, hi + 1, size=g.n_edges).astype(np.int64)
        intra = g.intra_edge.astype(bool)
        self.primary_weights[intra] = 0
        self.secondary_weights[intra] = 0
        n_as = len(g.sub_asns)
        self.has_default = rng.random(n_as) < cfg.default_route_probability
        self.uses_secondary_when_poisoned = rng.random(n_as) < cfg.differing_default_probability

        # negative-binomial quantile table for hop sampling
        dist = stats.nbinom(cfg.hop_k, cfg.hop_p)
        upper = int(dist.ppf(1.0 - 1e-12)) + 1
        self._hop_cdf = dist.cdf(np.arange(upper + 1))
        self._hop_key = _splitmix64((cfg.seed & _U64) ^ 0xA5A5A5A5A5A5A5A5)

        # scratch buffers for probe evaluation (reused, not part of state)
        self._dist = np.empty(g.n_nodes, dtype=np.int64)
        self._heap_node = np.empty(g.n_edges + g.n_nodes + 1, dtype=np.int64)
        self._heap_key = np.empty(g.n_edges + g.n_nodes + 1, dtype=np.int64)
        self._visited = np.empty(g.n_nodes, dtype=np.uint8)
        self._queue = np.empty(g.n_nodes, dtype=np.int64)
        self._path_buf = np.empty(g.n_nodes + 1, dtype=np.int64)
        self._no_mask = np.zeros(g.n_nodes, dtype=np.uint8)

        self._baseline_path = best_route(self, origin, frozenset())
        self._baseline_path_set = frozenset(self._baseline_path)
        self._baseline_hops = path_hops(self, self._baseline_path)

    # ---- hop model ---------------------------------------------------

    def hop_sample(self, prev: int, cur: int, nxt: int) -> int:
        """Deterministic per-triple hop count, negative-binomial distributed."""
        h = self._hop_key
        for part in (prev, cur, nxt):
            h = _splitmix64(h ^ (int(part) & _U64))
        u = float(h) / float(2**64)
        return int(np.searchsorted(self._hop_cdf, u, side="right"))

    # ---- masks -------------------------------------------------------

    def _poison_masks(self, poisoned):
        g = self.subgraph
        removed = np.zeros(g.n_nodes, dtype=np.uint8)
        penalized = np.zeros(g.n_nodes, dtype=np.uint8)
        secondary = np.zeros(g.n_nodes, dtype=np.uint8)
        for asn in poisoned:
            ai = g.as_index(int(asn))  # raises for ASes outside the subgraph
            pos = g.sub_as_positions[ai]
            locs = [l for l in (g.u_local[pos], g.c_local[pos]) if l >= 0]
            if self.has_default[ai]:
                for l in locs:
                    penalized[l] = 1
                    if self.uses_secondary_when_poisoned[ai]:
                        secondary[l] = 1
            else:
                for l in locs:
                    removed[l] = 1
        return removed, penalized, secondary


def init_world(g: RootedSubgraph, cfg: SimConfig, origin: int) -> SimWorld:
    return SimWorld(g, cfg, origin)


def best_route(w: SimWorld, src: int, poisoned=frozenset()):
    """Shortest-weight traffic path from ``src`` to the deployment AS.

    Poisoned ASes without default routes are removed; poisoned ASes with a
    default route keep their nodes but all routes they themselves use gain
    the default penalty (and come from the secondary weights when the AS
    switches upstreams). Returns the AS path ``[src, ..., root]`` or None.
    """
    g = w.subgraph
    src_ai = g.as_index(int(src))
    if g.root_asn in poisoned:
        raise ValueError("the deployment AS cannot be poisoned")
    removed, penalized, secondary = w._poison_masks(poisoned)
    _kernels.dijkstra_from_root(
        g.indptr, g.indices, w.primary_weights, w.secondary_weights,
        removed, penalized, secondary, np.int64(w.cfg.default_penalty),
        np.int64(g.root), w._dist, w._heap_node, w._heap_key,
    )
    pos = g.sub_as_positions[src_ai]
    start = -1
    best = _kernels.INF
    for loc in (g.u_local[pos], g.c_local[pos]):  # u first: lex-smaller path on ties
        if loc >= 0 and w._dist[loc] < best:
            best = w._dist[loc]
            start = int(loc)
    if start < 0:
        return None
    m = _kernels.extract_path(
        g.rev_indptr, g.rev_indices, g.rev_edge_fwd,
        w.primary_weights, w.secondary_weights,
        removed, penalized, secondary, np.int64(w.cfg.default_penalty),
        w._dist, np.int64(start), np.int64(g.root), w._path_buf,
    )
    if m < 0:
        raise RuntimeError("path extraction failed")
    as_path = []
    for i in range(m):
        asn = int(g.as_of_node[w._path_buf[i]])
        if not as_path or as_path[-1] != asn:
            as_path.append(asn)
    return as_path


def path_hops(w: SimWorld, path) -> int:
    """Deterministic IP hop count of an AS path: one triple-conditioned
    sample per AS plus one hop per AS transition."""
    if not path:
        raise ValueError("empty path")
    total = len(path) - 1
    for i, cur in enumerate(path):
        prev = path[i - 1] if i > 0 else _SENTINEL_ASN
        nxt = path[i + 1] if i < len(path) - 1 else _SENTINEL_ASN
        total += w.hop_sample(prev, cur, nxt)
    return total


def _active_effects(w: SimWorld, poisoned, removed):
    """Ping result per probed AS: STOP when the AS lost every route."""
    g = w.subgraph
    node_ok = (removed == 0).astype(np.uint8)
    w._visited[:] = 0
    _kernels.bfs_mask(
        g.indptr, g.indices, np.array([g.root], dtype=np.int64),
        node_ok, g._ones_e, w._visited, w._queue,
    )
    active = {}
    for asn in sorted(poisoned):
        pos = g.sub_as_positions[g.as_index(int(asn))]
        alive = False
        for loc in (g.u_local[pos], g.c_local[pos]):
            if loc >= 0 and w._visited[loc]:
                alive = True
        active[int(asn)] = Effect.NO_EFFECT if alive else Effect.STOP
    return active, w._visited


def probe(w: SimWorld, poisoned) -> ProbeOutcome:
    """One poisoning step: passive effect on the origin's traffic plus the
    active measurement vector for every probed AS."""
    poisoned = frozenset(int(a) for a in poisoned)
    g = w.subgraph
    if g.root_asn in poisoned:
        raise ValueError("the deployment AS cannot be poisoned")
    if not poisoned:
        return ProbeOutcome(Effect.NO_EFFECT, {})
    removed, penalized, secondary = w._poison_masks(poisoned)
    active, visited = _active_effects(w, poisoned, removed)

    origin_pos = g.sub_as_positions[g.as_index(w.origin)]
    origin_alive = any(
        loc >= 0 and visited[loc]
        for loc in (g.u_local[origin_pos], g.c_local[origin_pos])
    )
    if not origin_alive:
        return ProbeOutcome(Effect.STOP, active)
    if not (poisoned & w._baseline_path_set):
        # untouched baseline path stays optimal: all modified edges only got
        # heavier (penalty exceeds any weight), so nothing can beat it
        return ProbeOutcome(Effect.NO_EFFECT, active)
    path = best_route(w, w.origin, poisoned)
    if path is None:
        return ProbeOutcome(Effect.STOP, active)
    if path_hops(w, path) != w._baseline_hops:
        return ProbeOutcome(Effect.TTL_CHANGE, active)
    return ProbeOutcome(Effect.NO_EFFECT, active)


def probe_no_ttl(w: SimWorld, poisoned) -> ProbeOutcome:
    """As :func:`probe` but blind to TTL shifts: only full stops register."""
    out = probe(w, poisoned)
    if out.passive is Effect.TTL_CHANGE:
        return ProbeOutcome(Effect.NO_EFFECT, out.active)
    return out


class SimProbeOracle:
    """ProbeOracle backed by a SimWorld; counts every probe call."""

    def __init__(self, world: SimWorld, use_ttl: bool = True):
        self.world = world
        self.use_ttl = use_ttl
        self._steps = 0

    def probe(self, poisoned) -> ProbeOutcome:
        self._steps += 1
        fn = probe if self.use_ttl else probe_no_ttl
        return fn(self.world, poisoned)

    def step_count(self) -> int:
        return self._steps
