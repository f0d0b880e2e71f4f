import numpy as np
import pytest

from bgptrace.relationships import Relationship, RelationshipSet, RelKind

PC = RelKind.PROVIDER_CUSTOMER
PP = RelKind.PEER_TO_PEER


def rel(a, b, kind):
    return Relationship(a, b, kind)


@pytest.fixture
def diamond_rels():
    """Four ASes: 1 provides transit to 2, 3 provides transit to 4,
    and 2/3 are peers. Small enough to check everything by hand."""
    return RelationshipSet([
        rel(1, 2, PC),
        rel(3, 4, PC),
        rel(2, 3, PP),
    ])


@pytest.fixture
def induced_example_rels():
    """Six ASes: 1 is a customer of 2, 3 and 5; 4 provides transit to
    2 and 3; 6 provides transit to 5; 3 and 5 peer. The smallest
    topology where poisoning can flip a distant AS's route choice."""
    return RelationshipSet([
        rel(2, 1, PC),
        rel(3, 1, PC),
        rel(5, 1, PC),
        rel(4, 2, PC),
        rel(4, 3, PC),
        rel(6, 5, PC),
        rel(3, 5, PP),
    ])


def random_rels(rng: np.random.Generator, n_ases: int) -> RelationshipSet:
    """Random relationship set over ASes 1..n_ases (possibly disconnected)."""
    rels = []
    for a in range(1, n_ases + 1):
        for b in range(a + 1, n_ases + 1):
            r = rng.random()
            if r < 0.18:
                rels.append(rel(a, b, PC))
            elif r < 0.36:
                rels.append(rel(b, a, PC))
            elif r < 0.48:
                rels.append(rel(a, b, PP))
    return RelationshipSet(rels)
