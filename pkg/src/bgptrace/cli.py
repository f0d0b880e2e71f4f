"""Command line entry points.

Subcommands:
  graph-stats  -- dataset and flow-graph metrics for a deployment AS
  trace        -- one traceback run with a verbose per-step log
  experiment   -- full Monte Carlo grid -> runs.csv + summary.json
  summarize    -- recompute summary.json from an existing runs.csv
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import harness
from .flowgraph import ambiguous_ases, build_flow_graph, rooted_subgraph
from .relationships import load_as_rel, merge_supplemental, stub_ases
from .simworld import SimConfig, SimProbeOracle, init_world
from .traceback import Algorithm, parallel_traceback

log = logging.getLogger("bgptrace")


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--as-rel", required=True, help="serial-1 AS relationship file")
    p.add_argument("--extra-rel", help="supplemental relationship file (wins on conflicts)")
    p.add_argument("--deployment-asn", type=int, required=True)


def _load(args):
    rels = load_as_rel(args.as_rel)
    if args.extra_rel:
        rels = merge_supplemental(rels, load_as_rel(args.extra_rel))
    return rels


def cmd_graph_stats(args) -> int:
    rels = _load(args)
    fg = build_flow_graph(rels)
    g = rooted_subgraph(fg, args.deployment_asn)
    stats = {
        "ases": len(rels.as_index),
        "relationships": len(rels),
        "stub_ases": len(stub_ases(rels)),
        "flow_nodes": fg.n_nodes,
        "flow_edges": fg.n_edges,
        "rooted_nodes": g.n_nodes,
        "rooted_edges": g.n_edges,
        "rooted_ases": len(g.sub_asns),
        "ambiguous_ases": len(ambiguous_ases(g)),
    }
    print(json.dumps(stats, indent=2))
    return 0


def cmd_trace(args) -> int:
    rels = _load(args)
    g = rooted_subgraph(build_flow_graph(rels), args.deployment_asn)
    stubs = stub_ases(rels)
    sim = SimConfig(seed=args.seed, default_route_probability=args.default_rate)
    rng = np.random.default_rng(args.seed)
    origins = g.sub_asns[g.sub_asns != args.deployment_asn]
    origin = args.origin if args.origin is not None else int(rng.choice(origins))
    world = init_world(g, sim, origin)
    oracles = [SimProbeOracle(world, use_ttl=not args.no_ttl) for _ in range(args.prefixes)]

    def observer(step, probe, out, inconsistent, csize):
        print(
            f"step={step} probe={','.join(str(a) for a in probe)} "
            f"passive={out.passive.value} "
            f"inconsistent={','.join(str(a) for a in inconsistent) or '-'} "
            f"|C|={csize}"
        )

    report = parallel_traceback(
        oracles, Algorithm(args.algorithm), g, args.probe_size,
        stubs=stubs, observer=observer,
    )
    print(f"origin={origin}")
    print(f"final_candidates={sorted(report.final_candidates)}")
    print(f"confirmed_onpath={list(report.confirmed_onpath)}")
    print(f"steps={report.steps} advertisements={report.advertisements}")
    print(f"success={origin in report.final_candidates}")
    return 0


def cmd_experiment(args) -> int:
    cfg = harness.ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.as_rel:
        overrides["as_rel_path"] = args.as_rel
    if args.extra_rel:
        overrides["extra_rel_path"] = args.extra_rel
    if args.deployment_asn is not None:
        overrides["deployment_asn"] = args.deployment_asn
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        if done % 16 == 0 or done == total:
            log.info("worlds %d/%d", done, total)

    reports = harness.run_experiment(cfg, workers=args.workers, progress=progress)
    harness.write_runs_csv(reports, out_dir / "runs.csv")
    harness.write_summary_json(harness.summarize(reports), out_dir / "summary.json")
    log.info("wrote %s and %s", out_dir / "runs.csv", out_dir / "summary.json")
    return 0


def cmd_summarize(args) -> int:
    frame = pd.read_csv(args.runs_csv)
    summary = harness.summarize_frame(frame)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        harness.write_summary_json(summary, out_dir / "summary.json")
    else:
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bgptrace")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-stats", help="flow-graph metrics for a deployment")
    _add_dataset_args(p)
    p.set_defaults(fn=cmd_graph_stats)

    p = sub.add_parser("trace", help="single traceback run with step log")
    _add_dataset_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--origin", type=int, help="origin AS (random when omitted)")
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm], default="graph")
    p.add_argument("--probe-size", type=int, default=128)
    p.add_argument("--prefixes", type=int, default=1)
    p.add_argument("--no-ttl", action="store_true", help="ignore TTL changes")
    p.add_argument("--default-rate", type=float, default=0.4)
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("experiment", help="run a full experiment grid")
    p.add_argument("--config", required=True, help="JSON ExperimentConfig")
    p.add_argument("--as-rel")
    p.add_argument("--extra-rel")
    p.add_argument("--deployment-asn", type=int)
    p.add_argument("--runs", type=int, help="override run count")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("summarize", help="stats from an existing runs.csv")
    p.add_argument("runs_csv")
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
