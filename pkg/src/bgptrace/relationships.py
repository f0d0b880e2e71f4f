"""AS relationship ingestion.

Reads the CAIDA serial-1 as-rel text format (``<asn>|<asn>|<code>`` with
``-1`` = provider-to-customer and ``0`` = peer-to-peer) into an immutable
:class:`RelationshipSet`. Supplemental peering lists in the same format can
be merged on top, with the supplemental data winning on conflicts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping


class RelKind(enum.Enum):
    PROVIDER_CUSTOMER = "pc"  # a provides transit to b
    PEER_TO_PEER = "pp"


class RelationshipError(ValueError):
    pass


class ParseError(RelationshipError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConflictError(RelationshipError):
    def __init__(self, line_no: int, a: int, b: int):
        super().__init__(f"line {line_no}: conflicting duplicate relationship for pair ({a}, {b})")
        self.line_no = line_no
        self.pair = (a, b)


_MAX_ASN = 2**32 - 1


def _check_asn(value: int) -> int:
    if not 0 < value <= _MAX_ASN:
        raise RelationshipError(f"ASN out of range: {value}")
    return value


@dataclass(frozen=True)
class Relationship:
    """One AS-pair relation. For PROVIDER_CUSTOMER, ``a`` is the provider."""

    a: int
    b: int
    kind: RelKind

    def __post_init__(self):
        _check_asn(self.a)
        _check_asn(self.b)
        if self.a == self.b:
            raise RelationshipError(f"self relationship for AS {self.a}")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


class RelationshipSet:
    """Immutable collection of relationships, at most one per unordered pair."""

    def __init__(self, relationships: Iterable[Relationship]):
        by_pair: dict[tuple[int, int], Relationship] = {}
        for rel in relationships:
            prev = by_pair.get(rel.pair)
            if prev is not None and prev != rel:
                raise RelationshipError(f"conflicting duplicate for pair {rel.pair}")
            by_pair[rel.pair] = rel
        self._by_pair = by_pair
        asns: set[int] = set()
        for rel in by_pair.values():
            asns.add(rel.a)
            asns.add(rel.b)
        self.as_index = frozenset(asns)

    @property
    def relationships(self) -> tuple[Relationship, ...]:
        return tuple(self._by_pair[p] for p in sorted(self._by_pair))

    def by_pair(self) -> Mapping[tuple[int, int], Relationship]:
        return dict(self._by_pair)

    def __len__(self) -> int:
        return len(self._by_pair)

    def __contains__(self, rel: Relationship) -> bool:
        return self._by_pair.get(rel.pair) == rel

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelationshipSet):
            return NotImplemented
        return self._by_pair == other._by_pair

    def __hash__(self):
        return hash(frozenset(self._by_pair.values()))


def parse_as_rel(text: str) -> RelationshipSet:
    """Parse serial-1 as-rel text into a RelationshipSet.

    Comment lines start with ``#``; blank lines are skipped. Data lines must
    have exactly three ``|``-separated fields; trailing fields are rejected.
    A duplicate unordered pair with a different code raises ConflictError.
    """
    by_pair: dict[tuple[int, int], Relationship] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|")
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(fields)}")
        try:
            a, b, code = (int(f) for f in fields)
        except ValueError:
            raise ParseError(line_no, f"non-integer field in {line!r}") from None
        if code == -1:
            kind = RelKind.PROVIDER_CUSTOMER
        elif code == 0:
            kind = RelKind.PEER_TO_PEER
        else:
            raise ParseError(line_no, f"unknown relationship code {code}")
        try:
            rel = Relationship(a, b, kind)
        except RelationshipError as exc:
            raise ParseError(line_no, str(exc)) from None
        prev = by_pair.get(rel.pair)
        if prev is not None and prev != rel:
            raise ConflictError(line_no, *rel.pair)
        by_pair[rel.pair] = rel
    return RelationshipSet(by_pair.values())


def serialize_as_rel(rels: RelationshipSet) -> str:
    """Inverse of parse_as_rel (modulo comments and line order)."""
    lines = []
    for rel in rels.relationships:
        code = -1 if rel.kind is RelKind.PROVIDER_CUSTOMER else 0
        lines.append(f"{rel.a}|{rel.b}|{code}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_as_rel(path) -> RelationshipSet:
    with open(path) as fh:
        return parse_as_rel(fh.read())


def merge_supplemental(base: RelationshipSet, extra: RelationshipSet) -> RelationshipSet:
    """Union of two sets; on a pair conflict the supplemental entry wins."""
    merged = base.by_pair()
    merged.update(extra.by_pair())
    return RelationshipSet(merged.values())


def stub_ases(rels: RelationshipSet) -> frozenset[int]:
    """ASes that provide transit to nobody.

    An AS that appears only in peer-to-peer relations has no customers and
    therefore counts as a stub under this definition.
    """
    providers = {rel.a for rel in rels.relationships if rel.kind is RelKind.PROVIDER_CUSTOMER}
    return frozenset(rels.as_index - providers)
