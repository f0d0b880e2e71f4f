#!/usr/bin/env python3
"""Generate a synthetic AS-level topology in serial-1 as-rel format.

Produces a three-tier transit hierarchy with a fully meshed top clique,
regional transits, and a large stub majority, plus lateral peering. Sizes
and attachment probabilities are tuned so that weighted best routes average
about 5.5 AS hops and roughly 85% of ASes are stubs, matching the shape of
a real-world relationship snapshot at ~66k ASes.

Also picks three deployment ASes (a multihomed edge customer, a top-clique
member, and a mid-tier transit) and writes them to a JSON metadata file.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

TIER1 = 20
TIER2 = 600
TIER3 = 9000


def _choose(rng, pool, k):
    return rng.choice(pool, size=k, replace=False)


def generate(n_total: int, seed: int, edge_providers: int = 3,
             edge_peers_t2: int = 200, edge_peers_t3: int = 100,
             stub_dualhome: float = 0.35):
    rng = np.random.default_rng(seed)
    if n_total < TIER1 + TIER2 + TIER3 + 1000:
        raise SystemExit("n_total too small for the fixed tier sizes")
    asns = np.arange(1, n_total + 1)
    tier1 = asns[:TIER1]
    tier2 = asns[TIER1 : TIER1 + TIER2]
    tier3 = asns[TIER1 + TIER2 : TIER1 + TIER2 + TIER3]
    stubs = asns[TIER1 + TIER2 + TIER3 :]

    pc: list[tuple[int, int]] = []  # (provider, customer)
    pp: list[tuple[int, int]] = []

    for i in range(TIER1):
        for j in range(i + 1, TIER1):
            pp.append((int(tier1[i]), int(tier1[j])))

    for c in tier2:
        for p in _choose(rng, tier1, rng.integers(2, 5)):
            pc.append((int(p), int(c)))
    # lateral peering inside tier 2
    for c in tier2:
        for p in _choose(rng, tier2, 4):
            if p != c:
                pp.append((int(min(c, p)), int(max(c, p))))

    for c in tier3:
        n_prov = int(rng.integers(1, 4))
        pool = tier1 if rng.random() < 0.05 else tier2
        for p in _choose(rng, pool, min(n_prov, len(pool))):
            pc.append((int(p), int(c)))
        if rng.random() < 0.3:
            q = int(rng.choice(tier3))
            if q != c:
                pp.append((int(min(c, q)), int(max(c, q))))

    # deployments: multihomed edge customer, clique member, mid transit.
    # The edge customer models an IXP-attached measurement network: a few
    # transit providers plus a large open peering surface.
    edge = int(stubs[0])
    for p in _choose(rng, tier2, edge_providers):
        pc.append((int(p), edge))
    edge_peers = set(_choose(rng, tier2, edge_peers_t2)) | set(_choose(rng, tier3, edge_peers_t3))
    for q in sorted(int(x) for x in edge_peers):
        if q != edge:
            pp.append((min(edge, q), max(edge, q)))

    for c in stubs[1:]:
        n_prov = 2 if rng.random() < stub_dualhome else 1
        for _ in range(n_prov):
            r = rng.random()
            if r < 0.50:
                p = int(rng.choice(tier3))
            elif r < 0.95:
                p = int(rng.choice(tier2))
            else:
                p = int(rng.choice(tier1))
            pc.append((p, int(c)))

    deployments = {
        "customer": edge,
        "tier1": int(tier1[0]),
        "transit": int(tier2[0]),
    }

    # dedupe (a customer may have drawn the same provider twice)
    pc = sorted(set(pc))
    seen = set(tuple(sorted(e)) for e in pc)
    pp = sorted(e for e in set(pp) if tuple(sorted(e)) not in seen)
    return pc, pp, deployments, {"tier1": tier1, "tier2": tier2, "tier3": tier3, "stubs": stubs}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=66000)
    ap.add_argument("--seed", type=int, default=20260824)
    ap.add_argument("--out", default="data/topology.asrel")
    ap.add_argument("--edge-providers", type=int, default=3)
    ap.add_argument("--edge-peers-t2", type=int, default=200)
    ap.add_argument("--edge-peers-t3", type=int, default=100)
    ap.add_argument("--stub-dualhome", type=float, default=0.35)
    args = ap.parse_args()

    pc, pp, deployments, tiers = generate(
        args.n, args.seed, args.edge_providers, args.edge_peers_t2, args.edge_peers_t3,
        args.stub_dualhome,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        fh.write(f"# synthetic topology: n={args.n} seed={args.seed}\n")
        fh.write(f"# tiers: {TIER1}/{TIER2}/{TIER3}, stubs: {len(tiers['stubs'])}\n")
        for p, c in pc:
            fh.write(f"{p}|{c}|-1\n")
        for a, b in pp:
            fh.write(f"{a}|{b}|0\n")
    meta = {
        "n_ases": args.n,
        "seed": args.seed,
        "provider_customer": len(pc),
        "peer_to_peer": len(pp),
        "stub_count": len(tiers["stubs"]),
        "deployments": deployments,
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(json.dumps(meta, indent=2))


if __name__ == "__main__":
    main()
