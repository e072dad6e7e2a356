"""Batch experiment harness: bound fuzzing and the degeneracy conjecture probe.

Instances are drawn from a seeded generator, one independent random stream
per row keyed by (seed, index), so any row can be reproduced in isolation.
Rows run concurrently up to a worker cap; results are assembled in index
order regardless of completion order.  A row that fails is recorded and the
run continues.

Each row runs both heuristics and the oracle, evaluates every applicable
performance-difference bound, and (optionally) probes whether some
degeneracy of the SMT's own topology already achieves the oracle-best bead
count when its added points are re-optimized — the hit rate for that probe
is reported in the summary.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, SteinerBeadError
from .geometry import Point
from .mspt_oracle import (
    _contract_mask,
    bound_report,
    minimize_beads_fixed_topology,
    smt_heuristic,
)
from .norms import norm_from_dict
from .seeding import DEFAULT_SEED, splitmix64, stream
from .serial import ExperimentConfig, Instance, load_json, norm_to_dict, parse_instance
from .smt_solver import _steiner_prefix
from .tree_core import bead_count, canonical_topology_key

CSV_COLUMNS = (
    "index",
    "label",
    "n",
    "norm",
    "smtBeads",
    "mstBeads",
    "oracleBeads",
    "oracleStatus",
    "gap",
    "j",
    "c",
    "bound2n4",
    "boundC",
    "eqCorollary",
    "paraBound",
    "ratioBound",
    "fullSmt",
    "conjecture1Hit",
)

_MIN_SEPARATION = 1e-6
_FULL_EDGE_TOL = 1e-7


def _norm_tag(norm_spec: dict) -> str:
    if norm_spec.get("kind") == "euclidean":
        return "euclidean"
    return f"polygon-{len(norm_spec.get('vertices', []))}"


def _min_pairwise(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(d[..., 0], d[..., 1])
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def _draw_points(cfg: ExperimentConfig, rng: np.random.Generator, n: int) -> list[list[float]]:
    gen = cfg.generator
    for _ in range(100):
        if gen["kind"] == "uniformSquare":
            pts = rng.uniform(0.0, gen["side"], size=(n, 2))
        else:  # clustered
            centers = rng.uniform(0.0, gen["side"], size=(gen["clusters"], 2))
            which = rng.integers(0, gen["clusters"], size=n)
            pts = centers[which] + rng.normal(0.0, gen["spread"], size=(n, 2))
        if n < 2 or _min_pairwise(pts) > _MIN_SEPARATION:
            return [[float(x), float(y)] for x, y in pts]
    raise SteinerBeadError("could not draw well-separated terminals in 100 attempts")


def _file_instances(cfg: ExperimentConfig) -> list[Instance]:
    doc = load_json(cfg.generator["path"])
    if not isinstance(doc, list):
        raise SchemaError("fromFile generator expects a JSON array of instances")
    instances = [parse_instance(d) for d in doc]
    if cfg.count > len(instances):
        raise SchemaError(
            f"config count {cfg.count} exceeds the {len(instances)} instances in the file"
        )
    return instances


def _build_payloads(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Draw every row's input up front (cheap) so workers only solve."""
    payloads = []
    file_instances = _file_instances(cfg) if cfg.generator["kind"] == "fromFile" else None
    lo, hi = cfg.n_range
    for index in range(cfg.count):
        if file_instances is not None:
            inst = file_instances[index]
            if not (lo <= len(inst.terminals) <= hi):
                raise SchemaError(
                    f"fromFile instance {index} has n={len(inst.terminals)} outside nRange {cfg.n_range}"
                )
            terminals = [[p.x, p.y] for p in inst.terminals]
            norm_spec = norm_to_dict(inst.norm)
            label = inst.label or f"row-{index:04d}"
        else:
            rng = stream(seed, index)
            n = int(rng.integers(lo, hi + 1))
            terminals = _draw_points(cfg, rng, n)
            norm_spec = norm_to_dict(cfg.norm)
            prefix = cfg.label or "row"
            label = f"{prefix}-{index:04d}"
        payloads.append(
            {
                "index": index,
                "label": label,
                "terminals": terminals,
                "norm": norm_spec,
                "budget": cfg.oracle_budget,
                "seed": splitmix64(seed, index),
                "probe": cfg.conjecture_probe,
            }
        )
    return payloads


def _smt_degeneracies(topology):
    """The topology itself plus every contraction of its edges."""
    prefix = _steiner_prefix(sorted(topology.terminals))
    edges = topology.edges
    seen = {}
    for mask in range(1 << len(edges)):
        contracted = _contract_mask(topology, edges, mask, prefix)
        if contracted is None:
            continue
        key = canonical_topology_key(contracted)
        if key not in seen:
            seen[key] = contracted
    return list(seen.values())


def _probe_conjecture(smt_tree, oracle_beads: int, norm, budget: int, seed: int):
    """(fullSmt, hit): does some degeneracy of the SMT topology match the oracle?"""
    top = smt_tree.topology
    n = len(top.terminals)
    if n < 3 or len(top.steiners) != n - 2:
        return False, None
    if min(smt_tree.edge_lengths()) <= _FULL_EDGE_TOL:
        return False, None
    pts = [smt_tree.positions[lab] for lab in sorted(top.terminals)]
    best = None
    for deg in _smt_degeneracies(top):
        tree = minimize_beads_fixed_topology(deg, pts, norm, budget=budget, seed=seed)
        beads = bead_count(tree).bead_count
        if best is None or beads < best:
            best = beads
    return True, (best is not None and best <= oracle_beads)


def _solve_row(payload: dict) -> dict:
    """One experiment row; module-level so process pools can pickle it."""
    index = payload["index"]
    label = payload["label"]
    try:
        norm = norm_from_dict(payload["norm"])
        terminals = [Point(p[0], p[1]) for p in payload["terminals"]]
        report = bound_report(terminals, norm, budget=payload["budget"], seed=payload["seed"])
        full_smt, hit = False, None
        if payload["probe"]:
            smt = smt_heuristic(terminals, norm)
            full_smt, hit = _probe_conjecture(
                smt.tree, report.oracle_beads, norm, payload["budget"], payload["seed"]
            )
        return {
            "index": index,
            "label": label,
            "n": report.n,
            "norm": _norm_tag(payload["norm"]),
            "smtBeads": report.smt_beads,
            "mstBeads": report.mst_beads,
            "oracleBeads": report.oracle_beads,
            "oracleStatus": report.oracle_status,
            "gap": report.gap,
            "j": report.j,
            "c": report.c,
            "bound2n4": report.bound_2n4,
            "boundC": report.bound_c,
            "eqCorollary": report.eq_corollary,
            "paraBound": report.para_bound,
            "ratioBound": report.ratio_bound,
            "fullSmt": full_smt,
            "conjecture1Hit": hit,
        }
    except SteinerBeadError as exc:
        return {"index": index, "label": label, "error": f"{type(exc).__name__}: {exc}"}


def summarize_rows(rows: list[dict]) -> dict:
    """Aggregates recomputable from the row data alone."""
    gaps = [r["gap"] for r in rows]
    ratios = [r["gap"] / r["oracleBeads"] for r in rows if r["oracleBeads"] > 0]
    violations = 0
    for r in rows:
        for flag in ("bound2n4", "boundC", "eqCorollary", "paraBound"):
            if r[flag] is False:
                violations += 1
    status_counts: dict[str, int] = {}
    for r in rows:
        status_counts[r["oracleStatus"]] = status_counts.get(r["oracleStatus"], 0) + 1
    full_rows = [r for r in rows if r["fullSmt"]]
    hits = sum(1 for r in full_rows if r["conjecture1Hit"])
    return {
        "rowCount": len(rows),
        "meanGap": float(np.mean(gaps)) if gaps else None,
        "meanGapRatio": float(np.mean(ratios)) if ratios else None,
        "boundViolationCount": violations,
        "oracleStatusCounts": dict(sorted(status_counts.items())),
        "conjecture1": {
            "fullSmtRows": len(full_rows),
            "hits": hits,
            "rate": hits / len(full_rows) if full_rows else None,
        },
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ExperimentResult:
    rows: list[dict]
    failures: list[dict]
    summary: dict
    csv_path: str
    summary_path: str


def run_experiment(
    cfg: ExperimentConfig,
    *,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
) -> ExperimentResult:
    """Run every row, write rows.csv and summary.json under the output dir."""
    import csv

    payloads = _build_payloads(cfg, seed)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_row, payloads))
    else:
        results = [_solve_row(p) for p in payloads]

    results.sort(key=lambda r: r["index"])
    rows = [r for r in results if "error" not in r]
    failures = [r for r in results if "error" in r]

    scale = cfg.generator.get("side")
    summary = {
        "schemaVersion": 1,
        "label": cfg.label,
        "generator": dict(cfg.generator),
        "seed": seed,
        "count": cfg.count,
        "scale": scale,
        "failureCount": len(failures),
        "failures": failures,
        **summarize_rows(rows),
    }

    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, "rows.csv")
    summary_path = os.path.join(cfg.output_dir, "summary.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_csv_cell(r[col]) for col in CSV_COLUMNS])
    from .serial import write_json

    write_json(summary_path, summary)
    return ExperimentResult(rows, failures, summary, csv_path, summary_path)
