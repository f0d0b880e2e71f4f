import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bgptrace.flowgraph import (
    FlowNode,
    UnknownASError,
    ambiguous_ases,
    build_flow_graph,
    dominated,
    induced_change_set,
    induced_stop_set,
    reachable,
    rooted_subgraph,
    valley_free_paths,
)

from conftest import random_rels


def n(asn, flag):
    return FlowNode(asn, flag)


def names(nodes):
    return sorted(str(x) for x in nodes)


# ---------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------


def test_diamond_node_and_edge_counts(diamond_rels):
    fg = build_flow_graph(diamond_rels)
    assert fg.n_nodes == 8
    assert fg.n_edges == 10


def test_diamond_edge_set(diamond_rels):
    fg = build_flow_graph(diamond_rels)
    got = sorted(f"{a}->{b}" for a, b in ((str(x), str(y)) for x, y in fg.edges()))
    assert got == [
        "c|1->c|2",
        "c|3->c|4",
        "u|1->c|1",
        "u|2->c|2",
        "u|2->c|3",
        "u|2->u|1",
        "u|3->c|2",
        "u|3->c|3",
        "u|4->c|4",
        "u|4->u|3",
    ]


def test_rooted_subgraph_nodes(diamond_rels):
    fg = build_flow_graph(diamond_rels)
    g4 = rooted_subgraph(fg, 4)
    assert names(g4.nodes()) == ["c|2", "c|3", "c|4", "u|3", "u|4"]
    g1 = rooted_subgraph(fg, 1)
    assert names(g1.nodes()) == ["c|1", "c|2", "u|1"]


def test_rooted_subgraph_unknown_root(diamond_rels):
    fg = build_flow_graph(diamond_rels)
    with pytest.raises(UnknownASError):
        rooted_subgraph(fg, 99)


# ---------------------------------------------------------------------
# reachability and domination
# ---------------------------------------------------------------------


def test_reachable_examples(diamond_rels):
    g4 = rooted_subgraph(build_flow_graph(diamond_rels), 4)
    # reachability is reflexive; the cut's own nodes are always included
    assert names(reachable(g4, [n(3, "u")])) == ["c|2", "c|3", "c|4", "u|3"]
    assert names(reachable(g4, [n(2, "c")])) == ["c|2"]
    assert reachable(g4, []) == frozenset()


def test_dominated_examples(diamond_rels):
    g4 = rooted_subgraph(build_flow_graph(diamond_rels), 4)
    # removing AS 3 cuts everything below the root except the root itself
    assert names(dominated(g4, [n(3, "u"), n(3, "c")])) == ["c|2", "c|3", "u|3"]
    assert names(dominated(g4, [n(2, "c")])) == ["c|2"]
    assert dominated(g4, []) == frozenset()


def test_dominated_subtree(induced_example_rels):
    g = rooted_subgraph(build_flow_graph(induced_example_rels), 1)
    assert names(dominated(g, [n(5, "u"), n(5, "c")])) == ["c|5", "c|6", "u|5", "u|6"]


def test_reachable_rejects_foreign_node(diamond_rels):
    g1 = rooted_subgraph(build_flow_graph(diamond_rels), 1)
    with pytest.raises(UnknownASError):
        reachable(g1, [n(4, "u")])


# ---------------------------------------------------------------------
# export-policy path oracle
# ---------------------------------------------------------------------


def test_valley_free_paths_examples(diamond_rels):
    # peer-to-peer link only carries customer routes: 2's own route
    # crosses to 3 and on to 4, but 1's route (learned from a provider)
    # may not cross the 2-3 peering.
    assert sorted(valley_free_paths(diamond_rels, 2, 4, 6)) == [(2, 3, 4)]
    assert valley_free_paths(diamond_rels, 1, 4, 6) == frozenset()
    assert valley_free_paths(diamond_rels, 4, 1, 6) == frozenset()


def test_valley_free_paths_max_len(diamond_rels):
    assert valley_free_paths(diamond_rels, 2, 4, 2) == frozenset()
    with pytest.raises(ValueError):
        valley_free_paths(diamond_rels, 2, 4, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8))
def test_path_existence_matches_node_reachability(seed, n_ases):
    """An advertisement can propagate from X to Y exactly when u_X
    reaches c_Y in the two-node-per-AS graph."""
    rels = random_rels(np.random.default_rng(seed), n_ases)
    if not rels.as_index:
        return
    fg = build_flow_graph(rels)
    ases = sorted(rels.as_index)
    for src in ases:
        # the subgraph rooted at src holds exactly the nodes u_src reaches
        reach = rooted_subgraph(fg, src).nodes()
        for dst in ases:
            if dst == src:
                continue
            has_path = bool(valley_free_paths(rels, src, dst, n_ases))
            assert (n(dst, "c") in reach) == has_path, (src, dst)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7))
def test_dominated_is_unreachable_complement(seed, n_ases):
    rels = random_rels(np.random.default_rng(seed), n_ases)
    ases = sorted(rels.as_index)
    if not ases:
        return
    fg = build_flow_graph(rels)
    g = rooted_subgraph(fg, ases[0])
    cut_asn = ases[-1]
    if not g.has_asn(cut_asn) or cut_asn == g.root_asn:
        return
    cut = _present(g, cut_asn)
    dom = dominated(g, cut)
    survivors = {
        node
        for node in g.nodes()
        if node not in dom
    }
    # every survivor is still reachable from the root with the cut removed
    live_reach = _reach_avoiding(g, cut)
    assert survivors == live_reach
    assert all(c in dom for c in cut)


def _present(g, asn):
    out = []
    for flag in ("u", "c"):
        try:
            g.local_id(n(asn, flag))
        except UnknownASError:
            continue
        out.append(n(asn, flag))
    return out


def _reach_avoiding(g, cut):
    banned = {g.local_id(x) for x in cut}
    seen = {g.local_id(n(g.root_asn, "u"))}
    stack = list(seen)
    while stack:
        x = stack.pop()
        for e in range(g.indptr[x], g.indptr[x + 1]):
            y = int(g.indices[e])
            if y not in banned and y not in seen:
                seen.add(y)
                stack.append(y)
    return {g.node_at(i) for i in seen}


# ---------------------------------------------------------------------
# ambiguity and induced effects
# ---------------------------------------------------------------------


def test_ambiguous_ases(induced_example_rels):
    g = rooted_subgraph(build_flow_graph(induced_example_rels), 1)
    # multihomed ASes whose route choice the observer cannot pin down
    assert sorted(ambiguous_ases(g)) == [2, 3, 5]


def test_ambiguous_excludes_root(diamond_rels):
    g = rooted_subgraph(build_flow_graph(diamond_rels), 4)
    assert ambiguous_ases(g) == frozenset()


def test_induced_sets(induced_example_rels):
    g = rooted_subgraph(build_flow_graph(induced_example_rels), 1)
    poison = [n(2, "u"), n(2, "c")]
    change = induced_change_set(g, poison)
    stop = induced_stop_set(g, poison)
    # a multihomed AS two hops away may reroute, so nearly everything
    # can see a changed path ...
    assert n(5, "c") in change
    assert n(3, "c") in change
    # ... but only the single-homed subtree above the cut can lose
    # connectivity outright
    assert names(stop) == ["c|4", "c|6", "u|4", "u|6"]
    assert n(5, "c") not in stop
    assert stop < change


def test_induced_sets_empty_cut(induced_example_rels):
    g = rooted_subgraph(build_flow_graph(induced_example_rels), 1)
    assert induced_change_set(g, []) == frozenset()
    assert induced_stop_set(g, []) == frozenset()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 7))
def test_induced_stop_within_change(seed, n_ases):
    rels = random_rels(np.random.default_rng(seed), n_ases)
    ases = sorted(rels.as_index)
    if len(ases) < 2:
        return
    g = rooted_subgraph(build_flow_graph(rels), ases[0])
    for asn in ases[1:]:
        if not g.has_asn(asn):
            continue
        cut = _present(g, asn)
        stop = induced_stop_set(g, cut)
        change = induced_change_set(g, cut)
        assert stop <= change
