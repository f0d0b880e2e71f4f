"""Numba kernels for graph queries on CSR adjacency arrays.

All graph algorithms in the hot path (reachability sweeps, removal-based
domination checks, weighted route computation) run over int32 CSR arrays.
Callers pass preallocated work arrays so repeated queries do not allocate.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.iinfo(np.int64).max


@njit(cache=True)
def bfs_mask(indptr, indices, sources, node_ok, edge_ok, visited, queue):
    """Forward BFS from ``sources`` honoring node and edge masks.

    ``visited`` (uint8) must be zeroed by the caller; it is filled in place.
    ``node_ok``/``edge_ok`` may be all-ones arrays when no mask applies.
    Returns the number of visited nodes.
    """
    head = 0
    tail = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        if node_ok[s] and not visited[s]:
            visited[s] = 1
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            if not edge_ok[e]:
                continue
            w = indices[e]
            if node_ok[w] and not visited[w]:
                visited[w] = 1
                queue[tail] = w
                tail += 1
    return tail


@njit(cache=True)
def bfs_count_flagged(indptr, indices, src_a, src_b, flag, visit_token, token, queue):
    """BFS from up to two source nodes, counting visited nodes with ``flag`` set.

    Uses token stamping in ``visit_token`` (int64) so the array never needs
    clearing between calls; the caller increments ``token`` per query.
    """
    head = 0
    tail = 0
    count = 0
    if src_a >= 0:
        visit_token[src_a] = token
        queue[tail] = src_a
        tail += 1
        if flag[src_a]:
            count += 1
    if src_b >= 0 and visit_token[src_b] != token:
        visit_token[src_b] = token
        queue[tail] = src_b
        tail += 1
        if flag[src_b]:
            count += 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if visit_token[w] != token:
                visit_token[w] = token
                queue[tail] = w
                tail += 1
                if flag[w]:
                    count += 1
    return count


@njit(cache=True)
def bfs_layers(indptr, indices, sources, dist, queue):
    """Multi-source BFS distances; unreached entries stay at -1.

    ``dist`` (int64) must be filled with -1 by the caller; sources get
    distance 0.
    """
    head = 0
    tail = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v] + 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = d
                queue[tail] = w
                tail += 1


@njit(cache=True)
def dijkstra_from_root(
    indptr,
    indices,
    w_primary,
    w_secondary,
    node_removed,
    node_penalized,
    node_secondary,
    penalty,
    root,
    dist,
    heap_node,
    heap_key,
):
    """Single-source shortest paths from ``root`` along advertisement edges.

    Edge weights are resolved per edge head: if the head node belongs to a
    poisoned AS with a default route, the edge weight comes from
    ``w_secondary`` when flagged and gains ``penalty`` either way. Nodes of
    poisoned ASes without default routes are removed via ``node_removed``.

    ``dist`` is filled with INF for unreachable/removed nodes. The heap
    arrays must have at least ``len(indices) + 1`` slots.
    """
    n = dist.shape[0]
    for i in range(n):
        dist[i] = INF
    if node_removed[root]:
        return
    dist[root] = 0
    # binary min-heap of (key, node); lazy deletion
    size = 0
    heap_key[0] = 0
    heap_node[0] = root
    size = 1
    while size > 0:
        key = heap_key[0]
        v = heap_node[0]
        size -= 1
        heap_key[0] = heap_key[size]
        heap_node[0] = heap_node[size]
        # sift down
        pos = 0
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            if child + 1 < size and heap_key[child + 1] < heap_key[child]:
                child += 1
            if heap_key[child] < heap_key[pos]:
                heap_key[pos], heap_key[child] = heap_key[child], heap_key[pos]
                heap_node[pos], heap_node[child] = heap_node[child], heap_node[pos]
                pos = child
            else:
                break
        if key != dist[v]:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if node_removed[w]:
                continue
            if node_penalized[w]:
                step = (w_secondary[e] if node_secondary[w] else w_primary[e]) + penalty
            else:
                step = w_primary[e]
            nd = key + step
            if nd < dist[w]:
                dist[w] = nd
                # sift up
                heap_key[size] = nd
                heap_node[size] = w
                pos = size
                size += 1
                while pos > 0:
                    parent = (pos - 1) // 2
                    if heap_key[pos] < heap_key[parent]:
                        heap_key[pos], heap_key[parent] = heap_key[parent], heap_key[pos]
                        heap_node[pos], heap_node[parent] = heap_node[parent], heap_node[pos]
                        pos = parent
                    else:
                        break


@njit(cache=True)
def extract_path(
    rev_indptr,
    rev_indices,
    rev_edge_fwd,
    w_primary,
    w_secondary,
    node_removed,
    node_penalized,
    node_secondary,
    penalty,
    dist,
    start,
    root,
    out,
):
    """Walk the lexicographically smallest shortest path from ``start`` to root.

    ``dist`` comes from :func:`dijkstra_from_root`. Traffic-direction
    neighbors are the reverse-CSR successors; neighbor lists are sorted by
    node id, so the first neighbor on a shortest path is the smallest.
    Returns the path length written into ``out`` (node ids, start first),
    or -1 if no progress could be made (inconsistent inputs).
    """
    x = start
    m = 0
    out[m] = x
    m += 1
    while x != root:
        found = False
        for e in range(rev_indptr[x], rev_indptr[x + 1]):
            y = rev_indices[e]
            if node_removed[y]:
                continue
            fe = rev_edge_fwd[e]
            if node_penalized[x]:
                step = (w_secondary[fe] if node_secondary[x] else w_primary[fe]) + penalty
            else:
                step = w_primary[fe]
            if dist[y] != INF and dist[y] + step == dist[x]:
                x = y
                out[m] = x
                m += 1
                found = True
                break
        if not found:
            return -1
    return m
