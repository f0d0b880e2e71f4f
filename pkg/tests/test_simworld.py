import numpy as np
import pytest

from bgptrace.flowgraph import UnknownASError, build_flow_graph, rooted_subgraph
from bgptrace.simworld import (
    Effect,
    SimConfig,
    SimProbeOracle,
    best_route,
    init_world,
    path_hops,
    probe,
    probe_no_ttl,
)


@pytest.fixture
def subgraph(induced_example_rels):
    return rooted_subgraph(build_flow_graph(induced_example_rels), 1)


@pytest.fixture
def world(subgraph):
    # no default routes: every poisoned AS drops out of the graph entirely
    return init_world(subgraph, SimConfig(default_route_probability=0.0, seed=7), 4)


# ---------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"default_route_probability": 1.5},
        {"differing_default_probability": -0.1},
        {"weight_min": -1},
        {"weight_max": -1, "weight_min": 0},
        {"default_penalty": 100},  # must exceed weight_max
        {"hop_k": 0},
        {"hop_p": 0.0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimConfig(**kwargs)


def test_world_rejects_unknown_origin(subgraph):
    with pytest.raises(UnknownASError):
        init_world(subgraph, SimConfig(), 99)


# ---------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------


def test_world_is_deterministic(subgraph):
    cfg = SimConfig(seed=123)
    a = init_world(subgraph, cfg, 4)
    b = init_world(subgraph, cfg, 4)
    np.testing.assert_array_equal(a.primary_weights, b.primary_weights)
    np.testing.assert_array_equal(a.secondary_weights, b.secondary_weights)
    np.testing.assert_array_equal(a.has_default, b.has_default)
    assert probe(a, {2, 3}) == probe(b, {2, 3})


def test_different_seeds_differ(subgraph):
    a = init_world(subgraph, SimConfig(seed=1), 4)
    b = init_world(subgraph, SimConfig(seed=2), 4)
    assert not np.array_equal(a.primary_weights, b.primary_weights)


def test_intra_edges_are_free(world):
    g = world.subgraph
    assert np.all(world.primary_weights[g.intra_edge.astype(bool)] == 0)


# ---------------------------------------------------------------------
# hop model
# ---------------------------------------------------------------------


def test_hop_sample_is_deterministic(world):
    assert world.hop_sample(1, 2, 3) == world.hop_sample(1, 2, 3)


def test_hop_sample_mean(world):
    k, p = world.cfg.hop_k, world.cfg.hop_p
    expected = k * (1.0 - p) / p
    samples = [world.hop_sample(0, asn, asn + 1) for asn in range(1, 20_001)]
    assert np.mean(samples) == pytest.approx(expected, rel=0.05)


def test_path_hops_counts_transitions(world):
    one = path_hops(world, [4])
    two = path_hops(world, [4, 3])
    assert one >= 0
    # adding an AS adds at least the transition hop
    assert two >= 1
    with pytest.raises(ValueError):
        path_hops(world, [])


# ---------------------------------------------------------------------
# routing
# ---------------------------------------------------------------------


def test_baseline_route(world):
    assert best_route(world, 4) == [4, 3, 1]
    assert best_route(world, 4, poisoned={3}) == [4, 2, 1]
    assert best_route(world, 4, poisoned={2, 3}) is None


def test_root_cannot_be_poisoned(world):
    with pytest.raises(ValueError):
        best_route(world, 4, poisoned={1})
    with pytest.raises(ValueError):
        probe(world, {1})


# ---------------------------------------------------------------------
# probing: no-default world (poisoned ASes vanish)
# ---------------------------------------------------------------------


def test_probe_empty_set(world):
    out = probe(world, set())
    assert out.passive is Effect.NO_EFFECT
    assert out.active == {}


def test_probe_off_path_as(world):
    out = probe(world, {6})
    assert out.passive is Effect.NO_EFFECT
    assert out.active == {6: Effect.STOP}  # 6 itself still lost all routes


def test_probe_on_path_reroute(world):
    # 3 carries the baseline route; cutting it forces the detour via 2,
    # whose hop count differs
    out = probe(world, {3})
    assert out.passive is Effect.TTL_CHANGE
    assert out.active == {3: Effect.STOP}


def test_probe_alternate_path_untouched(world):
    out = probe(world, {2})
    assert out.passive is Effect.NO_EFFECT


def test_probe_cuts_origin(world):
    out = probe(world, {2, 3})
    assert out.passive is Effect.STOP
    assert out.active == {2: Effect.STOP, 3: Effect.STOP}
    assert probe(world, {4}).passive is Effect.STOP


def test_stop_is_monotone_under_removal(world):
    # in a default-free world a superset of a cutting set still cuts
    assert probe(world, {2, 3}).passive is Effect.STOP
    assert probe(world, {2, 3, 6}).passive is Effect.STOP


# ---------------------------------------------------------------------
# probing: default-route world (poisoned ASes deprioritize, stay up)
# ---------------------------------------------------------------------


@pytest.fixture
def default_world(subgraph):
    cfg = SimConfig(default_route_probability=1.0, differing_default_probability=0.0, seed=7)
    return init_world(subgraph, cfg, 4)


def test_defaulting_as_survives_poisoning(default_world):
    out = probe(default_world, {2})
    assert out.active == {2: Effect.NO_EFFECT}
    assert out.passive is Effect.NO_EFFECT


def test_defaulting_reroute_still_shifts_ttl(default_world):
    assert probe(default_world, {3}).passive is Effect.TTL_CHANGE


def test_uniform_penalty_cancels_out(default_world):
    # every route from the origin crosses a penalized AS, so the relative
    # order is unchanged and the original path (and TTL) survives
    out = probe(default_world, {2, 3})
    assert out.passive is Effect.NO_EFFECT
    assert best_route(default_world, 4, poisoned={2, 3}) == [4, 3, 1]


# ---------------------------------------------------------------------
# oracle wrapper
# ---------------------------------------------------------------------


def test_probe_no_ttl_masks_reroutes(world):
    assert probe(world, {3}).passive is Effect.TTL_CHANGE
    out = probe_no_ttl(world, {3})
    assert out.passive is Effect.NO_EFFECT
    assert out.active == {3: Effect.STOP}
    assert probe_no_ttl(world, {2, 3}).passive is Effect.STOP


def test_oracle_counts_probes(world):
    oracle = SimProbeOracle(world, use_ttl=True)
    assert oracle.step_count() == 0
    oracle.probe({3})
    oracle.probe({2})
    assert oracle.step_count() == 2
    blind = SimProbeOracle(world, use_ttl=False)
    assert blind.probe({3}).passive is Effect.NO_EFFECT
