"""Two-node-per-AS flow graph of valley-free advertisement propagation.

Each AS contributes an unconstrained node (``u``, advertisement received
from a customer) and a constrained node (``c``, received from a peer or
provider). Edges encode where an advertisement may travel next; reversing
all edges yields the possible traffic flows. Rooted subgraphs, reachability
and joint domination queries drive both the route simulator and the
graph-based traceback.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from .relationships import RelationshipSet, RelKind

U = "u"
C = "c"


class FlowNode(NamedTuple):
    asn: int
    state: str  # U or C

    def __repr__(self):
        return f"{self.state}|{self.asn}"


class UnknownASError(KeyError):
    pass


def _build_csr(n_nodes: int, edges: np.ndarray):
    """Sorted CSR from an (m, 2) edge array. Neighbor lists sorted ascending."""
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, edges[:, 0] + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, np.ascontiguousarray(edges[:, 1].astype(np.int32)), order


class FlowGraph:
    """Immutable flow graph over all ASes of a RelationshipSet.

    Node ids are dense: AS list sorted ascending, AS at position ``i`` owns
    node ``2*i`` (unconstrained) and ``2*i + 1`` (constrained).
    """

    def __init__(self, rels: RelationshipSet):
        self.asns = np.array(sorted(rels.as_index), dtype=np.int64)
        self._asn_pos = {int(a): i for i, a in enumerate(self.asns)}
        self.n_nodes = 2 * len(self.asns)

        pairs = []
        for rel in rels.relationships:
            ia = self._asn_pos[rel.a]
            ib = self._asn_pos[rel.b]
            if rel.kind is RelKind.PROVIDER_CUSTOMER:
                # advertisements travel uphill customer->provider and
                # downhill provider->customer
                pairs.append((2 * ib, 2 * ia))          # u_B -> u_A
                pairs.append((2 * ia + 1, 2 * ib + 1))  # c_A -> c_B
            else:
                pairs.append((2 * ia, 2 * ib + 1))      # u_A -> c_B
                pairs.append((2 * ib, 2 * ia + 1))      # u_B -> c_A
        for i in range(len(self.asns)):
            pairs.append((2 * i, 2 * i + 1))            # u_A -> c_A
        edge_arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        self.indptr, self.indices, _ = _build_csr(self.n_nodes, edge_arr)

    @property
    def n_edges(self) -> int:
        return len(self.indices)

    def has_asn(self, asn: int) -> bool:
        return asn in self._asn_pos

    def node_id(self, node: FlowNode) -> int:
        try:
            pos = self._asn_pos[node.asn]
        except KeyError:
            raise UnknownASError(node.asn) from None
        return 2 * pos + (0 if node.state == U else 1)

    def node_at(self, node_id: int) -> FlowNode:
        return FlowNode(int(self.asns[node_id // 2]), U if node_id % 2 == 0 else C)

    def nodes(self) -> frozenset[FlowNode]:
        return frozenset(self.node_at(i) for i in range(self.n_nodes))

    def edges(self) -> frozenset[tuple[FlowNode, FlowNode]]:
        out = []
        for v in range(self.n_nodes):
            for e in range(self.indptr[v], self.indptr[v + 1]):
                out.append((self.node_at(v), self.node_at(int(self.indices[e]))))
        return frozenset(out)

    def export_edges(self) -> str:
        """Debug dump, one edge per line: ``u|42 -> c|7``."""
        lines = []
        for tail, head in sorted(self.edges()):
            lines.append(f"{tail.state}|{tail.asn} -> {head.state}|{head.asn}")
        return "\n".join(lines) + ("\n" if lines else "")


def build_flow_graph(rels: RelationshipSet) -> FlowGraph:
    return FlowGraph(rels)


class RootedSubgraph:
    """Restriction of a FlowGraph to nodes reachable from one AS's u node.

    Local node ids are dense over the retained nodes (global order kept, so
    lexicographic comparisons on local ids match the parent graph). Holds
    forward (advertisement-direction) and reverse (traffic-direction) CSR
    plus an AS-level successor CSR used for probe layering.
    """

    def __init__(self, parent: FlowGraph, root_asn: int):
        if not parent.has_asn(root_asn):
            raise UnknownASError(root_asn)
        self.parent = parent
        self.root_asn = root_asn

        root_global = parent.node_id(FlowNode(root_asn, U))
        visited = np.zeros(parent.n_nodes, dtype=np.uint8)
        queue = np.empty(parent.n_nodes, dtype=np.int64)
        ones_n = np.ones(parent.n_nodes, dtype=np.uint8)
        ones_e = np.ones(parent.n_edges, dtype=np.uint8)
        _kernels.bfs_mask(
            parent.indptr, parent.indices,
            np.array([root_global], dtype=np.int64),
            ones_n, ones_e, visited, queue,
        )
        self.global_ids = np.flatnonzero(visited).astype(np.int64)
        self.n_nodes = len(self.global_ids)
        g2l = np.full(parent.n_nodes, -1, dtype=np.int64)
        g2l[self.global_ids] = np.arange(self.n_nodes)
        self._g2l = g2l
        self.root = int(g2l[root_global])

        # forward CSR restricted to retained nodes
        g_tails = np.repeat(np.arange(parent.n_nodes), np.diff(parent.indptr))
        g_heads = parent.indices.astype(np.int64)
        keep = (g2l[g_tails] >= 0) & (g2l[g_heads] >= 0)
        edge_arr = np.column_stack([g2l[g_tails[keep]], g2l[g_heads[keep]]])
        self.indptr, self.indices, _ = _build_csr(self.n_nodes, edge_arr)
        self.n_edges = len(self.indices)

        # reverse CSR with back-map into forward edge ids
        rev = np.column_stack([edge_arr[:, 1], edge_arr[:, 0]]) if len(edge_arr) else edge_arr
        self.rev_indptr, self.rev_indices, rev_order = _build_csr(self.n_nodes, rev)
        fwd_order = np.lexsort((edge_arr[:, 1], edge_arr[:, 0])) if len(edge_arr) else np.empty(0, dtype=np.int64)
        fwd_rank = np.empty(len(edge_arr), dtype=np.int64)
        fwd_rank[fwd_order] = np.arange(len(edge_arr))
        self.rev_edge_fwd = fwd_rank[rev_order].astype(np.int64) if len(edge_arr) else np.empty(0, dtype=np.int64)

        # AS bookkeeping: which ASes have nodes here, and their local node ids
        as_pos = self.global_ids // 2
        self.sub_as_positions = np.unique(as_pos)            # positions into parent.asns
        self.sub_asns = parent.asns[self.sub_as_positions]   # sorted ASNs present
        npos = len(parent.asns)
        self.u_local = np.full(npos, -1, dtype=np.int64)
        self.c_local = np.full(npos, -1, dtype=np.int64)
        u_mask = self.global_ids % 2 == 0
        self.u_local[self.global_ids[u_mask] // 2] = np.flatnonzero(u_mask)
        self.c_local[self.global_ids[~u_mask] // 2] = np.flatnonzero(~u_mask)
        self.as_of_node = parent.asns[as_pos]                # ASN per local node
        l_tails = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        l_heads = self.indices.astype(np.int64)
        self.intra_edge = (self.as_of_node[l_tails] == self.as_of_node[l_heads]).astype(np.uint8)

        # AS-level successor adjacency (for probe layering)
        as_index_of_pos = np.full(npos, -1, dtype=np.int64)
        as_index_of_pos[self.sub_as_positions] = np.arange(len(self.sub_as_positions))
        self._as_index_of_pos = as_index_of_pos
        n_as = len(self.sub_asns)
        av = as_index_of_pos[as_pos[l_tails]]
        aw = as_index_of_pos[as_pos[l_heads]]
        cross = av != aw
        as_arr = np.unique(np.column_stack([av[cross], aw[cross]]), axis=0) if cross.any() else np.empty((0, 2), dtype=np.int64)
        self.as_indptr, self.as_indices, _ = _build_csr(n_as, as_arr)

        # reusable work arrays
        self._wq = np.empty(self.n_nodes, dtype=np.int64)
        self._ones_n = np.ones(self.n_nodes, dtype=np.uint8)
        self._ones_e = np.ones(self.n_edges, dtype=np.uint8)
        self._visit_token = np.zeros(self.n_nodes, dtype=np.int64)
        self._token = 0
        self._ambiguous: np.ndarray | None = None

    # ---- id helpers -------------------------------------------------

    def has_asn(self, asn: int) -> bool:
        i = np.searchsorted(self.sub_asns, asn)
        return i < len(self.sub_asns) and self.sub_asns[i] == asn

    def as_index(self, asn: int) -> int:
        i = int(np.searchsorted(self.sub_asns, asn))
        if i >= len(self.sub_asns) or self.sub_asns[i] != asn:
            raise UnknownASError(asn)
        return i

    def local_id(self, node: FlowNode) -> int:
        gid = self.parent.node_id(node)
        lid = int(self._g2l[gid])
        if lid < 0:
            raise UnknownASError(node)
        return lid

    def node_at(self, local_id: int) -> FlowNode:
        return self.parent.node_at(int(self.global_ids[local_id]))

    def nodes(self) -> frozenset[FlowNode]:
        return frozenset(self.node_at(i) for i in range(self.n_nodes))

    def node_ids_of_ases(self, asns: Iterable[int]) -> np.ndarray:
        """Local node ids (u and c where present) of the given ASes."""
        out = []
        for asn in asns:
            pos = self.parent._asn_pos.get(int(asn))
            if pos is None:
                continue
            if self.u_local[pos] >= 0:
                out.append(self.u_local[pos])
            if self.c_local[pos] >= 0:
                out.append(self.c_local[pos])
        return np.array(sorted(out), dtype=np.int64)

    # ---- array-level queries ----------------------------------------

    def reach_mask(self, sources: np.ndarray, node_ok=None, edge_ok=None) -> np.ndarray:
        visited = np.zeros(self.n_nodes, dtype=np.uint8)
        _kernels.bfs_mask(
            self.indptr, self.indices, sources,
            self._ones_n if node_ok is None else node_ok,
            self._ones_e if edge_ok is None else edge_ok,
            visited, self._wq,
        )
        return visited

    def dominated_mask(self, cut: np.ndarray) -> np.ndarray:
        """Nodes unreachable from the root once ``cut`` is removed (cut included)."""
        node_ok = np.ones(self.n_nodes, dtype=np.uint8)
        node_ok[cut] = 0
        visited = self.reach_mask(np.array([self.root], dtype=np.int64), node_ok=node_ok)
        return (visited == 0).astype(np.uint8)

    def reach_count_in(self, asn: int, flag: np.ndarray) -> int:
        """|reachable({u_X, c_X}) ∩ flagged nodes| for ranking probes."""
        pos = self.parent._asn_pos[int(asn)]
        self._token += 1
        return int(_kernels.bfs_count_flagged(
            self.indptr, self.indices,
            self.u_local[pos], self.c_local[pos],
            flag, self._visit_token, self._token, self._wq,
        ))

    # ---- ambiguous ASes and induced effects -------------------------

    def ambiguous_as_array(self) -> np.ndarray:
        """ASNs able to hear the root's advertisement both via a customer
        (u node present) and via a peer or provider independently of their
        own customer-learned route (c reachable with the intra edge cut).

        The root itself is excluded: it originates the advertisement rather
        than receiving it.
        """
        if self._ambiguous is None:
            found = []
            candidates = np.flatnonzero(self.u_local >= 0)
            for pos in candidates:
                asn = int(self.parent.asns[pos])
                if asn == self.root_asn:
                    continue
                c_loc = self.c_local[pos]
                if c_loc < 0:
                    continue
                u_loc = self.u_local[pos]
                edge_ok = self._ones_e.copy()
                for e in range(self.indptr[u_loc], self.indptr[u_loc + 1]):
                    if self.indices[e] == c_loc:
                        edge_ok[e] = 0
                visited = self.reach_mask(np.array([self.root], dtype=np.int64), edge_ok=edge_ok)
                if visited[c_loc]:
                    found.append(asn)
            self._ambiguous = np.array(sorted(found), dtype=np.int64)
        return self._ambiguous

    def affected_ambiguous(self, poison: np.ndarray) -> np.ndarray:
        """Ambiguous ASes whose route choice the poison may flip, closed
        transitively: an ambiguous AS touched by the changes of another
        affected ambiguous AS is affected as well."""
        amb = self.ambiguous_as_array()
        if len(amb) == 0 or len(poison) == 0:
            return np.empty(0, dtype=np.int64)
        affected: set[int] = set()
        sources = list(poison)
        while True:
            visited = self.reach_mask(np.array(sorted(set(sources)), dtype=np.int64))
            new = []
            for asn in amb:
                if int(asn) in affected:
                    continue
                pos = self.parent._asn_pos[int(asn)]
                u_loc, c_loc = self.u_local[pos], self.c_local[pos]
                if (u_loc >= 0 and visited[u_loc]) or (c_loc >= 0 and visited[c_loc]):
                    new.append(int(asn))
            if not new:
                return np.array(sorted(affected), dtype=np.int64)
            for asn in new:
                affected.add(asn)
                pos = self.parent._asn_pos[asn]
                if self.u_local[pos] >= 0:
                    sources.append(int(self.u_local[pos]))
                if self.c_local[pos] >= 0:
                    sources.append(int(self.c_local[pos]))

    def induced_change_mask(self, poison: np.ndarray) -> np.ndarray:
        """Over-approximate nodes that may see a route change without being
        reachable through the poison: everything reachable through an
        affected ambiguous AS (in either of its states)."""
        affected = self.affected_ambiguous(poison)
        if len(affected) == 0:
            return np.zeros(self.n_nodes, dtype=np.uint8)
        sources = self.node_ids_of_ases(affected)
        return self.reach_mask(sources)

    def induced_stop_mask(self, poison: np.ndarray) -> np.ndarray:
        """Subset of the induced-change set that may lose connectivity
        entirely: nodes only reachable via peer- or provider-facing exports
        of affected ambiguous ASes (their u-node edges other than the
        intra-AS edge)."""
        change = self.induced_change_mask(poison)
        if not change.any():
            return change
        affected = self.affected_ambiguous(poison)
        edge_ok = self._ones_e.copy()
        for asn in affected:
            u_loc = self.u_local[self.parent._asn_pos[int(asn)]]
            if u_loc < 0:
                continue
            for e in range(self.indptr[u_loc], self.indptr[u_loc + 1]):
                if not self.intra_edge[e]:
                    edge_ok[e] = 0
        still = self.reach_mask(np.array([self.root], dtype=np.int64), edge_ok=edge_ok)
        return (change & (still == 0)).astype(np.uint8)

    # ---- set-based API ----------------------------------------------

    def _mask_to_nodes(self, mask: np.ndarray) -> frozenset[FlowNode]:
        return frozenset(self.node_at(int(i)) for i in np.flatnonzero(mask))

    def _nodes_to_ids(self, nodes: Iterable[FlowNode]) -> np.ndarray:
        return np.array(sorted(self.local_id(n) for n in nodes), dtype=np.int64)


def rooted_subgraph(g: FlowGraph, asn: int) -> RootedSubgraph:
    return RootedSubgraph(g, asn)


def reachable(g: RootedSubgraph, from_nodes: Iterable[FlowNode]) -> frozenset[FlowNode]:
    """All nodes with a (possibly empty) path from ``from_nodes``."""
    ids = g._nodes_to_ids(from_nodes)
    if len(ids) == 0:
        return frozenset()
    return g._mask_to_nodes(g.reach_mask(ids))


def dominated(g: RootedSubgraph, cut: Iterable[FlowNode]) -> frozenset[FlowNode]:
    """Nodes cut off from the root when ``cut`` is removed (cut included)."""
    ids = g._nodes_to_ids(cut)
    if len(ids) == 0:
        return frozenset()
    if g.root in ids:
        raise ValueError("cannot cut the deployment AS's root node")
    return g._mask_to_nodes(g.dominated_mask(ids))


def ambiguous_ases(g: RootedSubgraph) -> frozenset[int]:
    return frozenset(int(a) for a in g.ambiguous_as_array())


def induced_change_set(g: RootedSubgraph, poison: Iterable[FlowNode]) -> frozenset[FlowNode]:
    ids = g._nodes_to_ids(poison)
    if len(ids) == 0:
        return frozenset()
    return g._mask_to_nodes(g.induced_change_mask(ids))


def induced_stop_set(g: RootedSubgraph, poison: Iterable[FlowNode]) -> frozenset[FlowNode]:
    ids = g._nodes_to_ids(poison)
    if len(ids) == 0:
        return frozenset()
    return g._mask_to_nodes(g.induced_stop_mask(ids))


def valley_free_paths(rels: RelationshipSet, src: int, dst: int, max_len: int) -> frozenset[tuple[int, ...]]:
    """Brute-force enumeration of loop-free valley-free AS paths.

    A valid path climbs zero or more customer->provider edges, crosses at
    most one peer-to-peer edge, then descends zero or more
    provider->customer edges. Used as the independent oracle for the flow
    graph construction.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    up: dict[int, set[int]] = {}
    down: dict[int, set[int]] = {}
    peer: dict[int, set[int]] = {}
    for rel in rels.relationships:
        if rel.kind is RelKind.PROVIDER_CUSTOMER:
            up.setdefault(rel.b, set()).add(rel.a)
            down.setdefault(rel.a, set()).add(rel.b)
        else:
            peer.setdefault(rel.a, set()).add(rel.b)
            peer.setdefault(rel.b, set()).add(rel.a)

    results: set[tuple[int, ...]] = set()
    DOWNHILL = 1
    UPHILL = 0

    def walk(path: list[int], phase: int):
        cur = path[-1]
        if cur == dst:
            results.add(tuple(path))
        if len(path) >= max_len:
            return
        seen = set(path)
        if phase == UPHILL:
            for nxt in sorted(up.get(cur, ())):
                if nxt not in seen:
                    walk(path + [nxt], UPHILL)
            for nxt in sorted(peer.get(cur, ())):
                if nxt not in seen:
                    walk(path + [nxt], DOWNHILL)
        for nxt in sorted(down.get(cur, ())):
            if nxt not in seen:
                walk(path + [nxt], DOWNHILL)

    walk([src], UPHILL)
    return frozenset(results)
