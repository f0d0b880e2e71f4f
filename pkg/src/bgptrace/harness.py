"""Monte Carlo experiment harness.

Runs traceback algorithms over a grid of simulation and algorithm
parameters, many times each with a fresh sampled world and a uniformly
chosen origin AS. Seeds are content-addressed (master seed + cell
descriptor + run index) so any single run can be reproduced in isolation
and results do not depend on execution order or worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .flowgraph import RootedSubgraph, build_flow_graph, rooted_subgraph
from .relationships import load_as_rel, merge_supplemental, stub_ases
from .simworld import SimConfig, SimProbeOracle, init_world
from .traceback import Algorithm, TracebackReport, parallel_traceback

_SIM_FIELDS = {f.name for f in dataclasses.fields(SimConfig)} - {"seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    as_rel_path: str
    deployment_asn: int
    extra_rel_path: str | None = None
    runs: int = 1024
    algorithms: tuple[str, ...] = ("naive", "graph")
    sim: dict = field(default_factory=dict)  # SimConfig field -> list of values
    probe_size: tuple[int, ...] = (128,)
    prefixes: tuple[int, ...] = (1,)
    use_ttl: tuple[bool, ...] = (True,)
    success_threshold: tuple[int, ...] = (1, 8)
    master_seed: int = 0
    step_minutes: float = 10.0

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for name in ("algorithms", "probe_size", "prefixes", "use_ttl", "success_threshold"):
            if not getattr(self, name):
                raise ValueError(f"{name} grid must be nonempty")
        for alg in self.algorithms:
            Algorithm(alg)  # raises on unknown names
        unknown = set(self.sim) - _SIM_FIELDS
        if unknown:
            raise ValueError(f"unknown sim fields: {sorted(unknown)}")
        for key, values in self.sim.items():
            if not isinstance(values, (list, tuple)) or not values:
                raise ValueError(f"sim grid for {key!r} must be a nonempty list")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        for name in ("algorithms", "probe_size", "prefixes", "use_ttl", "success_threshold"):
            if name in raw:
                value = raw[name]
                raw[name] = tuple(value) if isinstance(value, list) else (value,)
        return cls(**raw)


@dataclass(frozen=True)
class RunReport:
    cell: dict
    run_index: int
    origin: int
    report: TracebackReport
    success_at: dict[int, bool]
    estimated_hours: float

    @property
    def origin_in_candidates(self) -> bool:
        return self.origin in self.report.final_candidates


def derive_seed(master_seed: int, cell_desc: str, run_index: int) -> int:
    """Stable 64-bit seed from (master seed, cell descriptor, run index)."""
    payload = f"{master_seed}|{cell_desc}|{run_index}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def _cell_desc(cell: dict) -> str:
    return ",".join(f"{k}={cell[k]}" for k in sorted(cell))


def _sim_cells(cfg: ExperimentConfig):
    keys = sorted(cfg.sim)
    for combo in itertools.product(*(cfg.sim[k] for k in keys)):
        yield dict(zip(keys, combo))


def _alg_cells(cfg: ExperimentConfig):
    for alg, n, k, ttl in itertools.product(
        cfg.algorithms, cfg.probe_size, cfg.prefixes, cfg.use_ttl
    ):
        yield {"algorithm": alg, "probe_size": n, "prefixes": k, "use_ttl": ttl}


def _run_one(g: RootedSubgraph, stubs, cfg: ExperimentConfig, sim_cell: dict, run_index: int):
    """One world (per sim cell and run index), all algorithm cells on it."""
    world_desc = _cell_desc({"deployment_asn": cfg.deployment_asn, **sim_cell})
    seed = derive_seed(cfg.master_seed, world_desc, run_index)
    rng = np.random.default_rng(seed)
    origins = g.sub_asns[g.sub_asns != cfg.deployment_asn]
    origin = int(rng.choice(origins))
    world = init_world(g, SimConfig(seed=seed, **sim_cell), origin)
    all_ases = [int(a) for a in origins]
    out = []
    for alg_cell in _alg_cells(cfg):
        oracles = [
            SimProbeOracle(world, use_ttl=alg_cell["use_ttl"])
            for _ in range(alg_cell["prefixes"])
        ]
        report = parallel_traceback(
            oracles,
            Algorithm(alg_cell["algorithm"]),
            g,
            alg_cell["probe_size"],
            all_ases=all_ases,
            stubs=stubs,
        )
        success = {
            t: origin in report.final_candidates and len(report.final_candidates) <= t
            for t in cfg.success_threshold
        }
        cell = {"deployment_asn": cfg.deployment_asn, **sim_cell, **alg_cell}
        out.append(
            RunReport(
                cell=cell,
                run_index=run_index,
                origin=origin,
                report=report,
                success_at=success,
                # rounded so the value survives a CSV round trip bit-exactly
                estimated_hours=round(report.steps * cfg.step_minutes / 60.0, 6),
            )
        )
    return out


def load_deployment_graph(cfg: ExperimentConfig) -> tuple[RootedSubgraph, frozenset[int]]:
    rels = load_as_rel(cfg.as_rel_path)
    if cfg.extra_rel_path:
        rels = merge_supplemental(rels, load_as_rel(cfg.extra_rel_path))
    g = rooted_subgraph(build_flow_graph(rels), cfg.deployment_asn)
    return g, stub_ases(rels)


def run_experiment(cfg: ExperimentConfig, workers: int = 1, progress=None) -> list[RunReport]:
    g, stubs = load_deployment_graph(cfg)
    items = [(sim_cell, i) for sim_cell in _sim_cells(cfg) for i in range(cfg.runs)]
    reports: list[RunReport] = []
    if workers <= 1:
        for idx, (sim_cell, i) in enumerate(items):
            reports.extend(_run_one(g, stubs, cfg, sim_cell, i))
            if progress is not None:
                progress(idx + 1, len(items))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, g, stubs, cfg, sc, i) for sc, i in items]
            for idx, fut in enumerate(futures):
                reports.extend(fut.result())
                if progress is not None:
                    progress(idx + 1, len(items))
    reports.sort(key=lambda r: (_cell_desc(r.cell), r.run_index))
    return reports


# ---------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------


def agresti_coull(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Binomial interval: p̃ ± z·sqrt(p̃(1−p̃)/ñ) with ñ = n + z²,
    p̃ = (x + z²/2)/ñ, clipped to [0, 1]."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    from scipy import stats

    z = stats.norm.ppf(0.5 + confidence / 2.0)
    n_tilde = trials + z * z
    p_tilde = (successes + z * z / 2.0) / n_tilde
    half = z * math.sqrt(p_tilde * (1.0 - p_tilde) / n_tilde)
    return max(0.0, p_tilde - half), min(1.0, p_tilde + half)


def _steps_stats(steps: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(steps)),
        "median": float(np.quantile(steps, 0.5)),
        "q1": float(np.quantile(steps, 0.25)),
        "q3": float(np.quantile(steps, 0.75)),
        "min": float(np.min(steps)),
        "max": float(np.max(steps)),
    }


def summarize_frame(frame: pd.DataFrame, confidence: float = 0.95) -> dict:
    """Per-cell statistics from a runs table (as written by write_runs_csv)."""
    if frame.empty:
        raise ValueError("no runs to summarize")
    fixed = {
        "run_index", "origin", "steps", "advertisements", "candidate_count",
        "origin_in_candidates", "estimated_hours",
    }
    thresholds = sorted(
        int(c.removeprefix("success_at_")) for c in frame.columns if c.startswith("success_at_")
    )
    cell_cols = [c for c in frame.columns if c not in fixed and not c.startswith("success_at_")]
    cells = {}
    for key, group in frame.groupby(cell_cols, sort=True):
        if not isinstance(key, tuple):
            key = (key,)
        desc = ",".join(f"{c}={v}" for c, v in zip(cell_cols, key))
        trials = len(group)
        success = {}
        for t in thresholds:
            x = int(group[f"success_at_{t}"].sum())
            lo, hi = agresti_coull(x, trials, confidence)
            success[str(t)] = {
                "successes": x, "trials": trials, "rate": x / trials, "lo": lo, "hi": hi,
            }
        cells[desc] = {
            "cell": {c: _json_scalar(v) for c, v in zip(cell_cols, key)},
            "runs": trials,
            "success": success,
            "origin_in_candidates_rate": float(group["origin_in_candidates"].mean()),
            "steps": _steps_stats(group["steps"].to_numpy()),
            "advertisements": _steps_stats(group["advertisements"].to_numpy()),
            "estimated_hours": _steps_stats(group["estimated_hours"].to_numpy()),
            "candidate_count": _steps_stats(group["candidate_count"].to_numpy()),
        }
    return {"confidence": confidence, "cells": cells}


def _json_scalar(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return str(v)


def reports_to_frame(reports: list[RunReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        row = dict(r.cell)
        row.update(
            run_index=r.run_index,
            origin=r.origin,
            steps=r.report.steps,
            advertisements=r.report.advertisements,
            candidate_count=len(r.report.final_candidates),
            origin_in_candidates=r.origin_in_candidates,
        )
        for t, ok in sorted(r.success_at.items()):
            row[f"success_at_{t}"] = ok
        row["estimated_hours"] = r.estimated_hours
        rows.append(row)
    return pd.DataFrame(rows)


def summarize(reports: list[RunReport], confidence: float = 0.95) -> dict:
    return summarize_frame(reports_to_frame(reports), confidence)


def write_runs_csv(reports: list[RunReport], path) -> None:
    reports_to_frame(reports).to_csv(path, index=False)


def write_summary_json(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
