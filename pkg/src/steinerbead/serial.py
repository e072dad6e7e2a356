"""Strict JSON (de)serialization for instances, trees, and experiment configs.

Every document carries ``"schemaVersion": 1`` and is parsed in strict mode:
unknown fields are rejected so a typo in an experiment config fails loudly
instead of silently running with defaults.  Instance coordinates are
canonicalized on ingestion — divided by the edge bound R, after which R is 1
— so the rest of the package never sees a bound other than one.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import CapacityError, SchemaError, StructuralError
from .geometry import Point
from .mspt_oracle import DEFAULT_BUDGET, EUCLIDEAN_SMT_CAP
from .norms import EUCLIDEAN, PARALLELOGRAM, Norm, classify, norm_from_dict
from .seeding import DEFAULT_SEED
from .tree_core import EmbeddedTree, Topology

SCHEMA_VERSION = 1

_SEED_MAX = (1 << 64) - 1

GENERATOR_KINDS = ("uniformSquare", "clustered", "fromFile")


def _require_object(doc, where: str) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be a JSON object, got {type(doc).__name__}")
    return doc


def _check_fields(doc: dict, required: set[str], optional: set[str], where: str) -> None:
    missing = required - set(doc)
    if missing:
        raise SchemaError(f"{where} missing required fields: {sorted(missing)}")
    unknown = set(doc) - required - optional
    if unknown:
        raise SchemaError(f"{where} has unknown fields: {sorted(unknown)}")


def _check_version(doc: dict, where: str) -> None:
    v = doc.get("schemaVersion")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"{where} schemaVersion must be {SCHEMA_VERSION}, got {v!r}")


def _as_finite(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {type(value).__name__}")
    x = float(value)
    if not math.isfinite(x):
        raise SchemaError(f"{where} must be finite, got {value!r}")
    return x


def _as_point(value, where: str) -> Point:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaError(f"{where} must be a [x, y] pair")
    return Point(_as_finite(value[0], f"{where}[0]"), _as_finite(value[1], f"{where}[1]"))


def _as_int(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where} must be an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise SchemaError(f"{where} must be >= {minimum}, got {value}")
    return value


def norm_to_dict(norm: Norm) -> dict:
    if norm.is_euclidean:
        return {"kind": "euclidean"}
    return {"kind": "polygon", "vertices": [[v.x, v.y] for v in norm.vertices]}


@dataclass(frozen=True)
class Instance:
    """A solver input: labeled terminals under a norm, with a seed.

    Coordinates are stored in canonical units (edge bound one); ``seed``
    feeds the per-instance random streams.
    """

    terminals: tuple[Point, ...]
    norm: Norm = EUCLIDEAN
    edge_bound: float = 1.0
    seed: int = DEFAULT_SEED
    label: str = ""

    def __post_init__(self):
        if len(self.terminals) < 2:
            raise SchemaError(f"instance needs at least 2 terminals, got {len(self.terminals)}")
        if not (self.edge_bound > 0):
            raise SchemaError(f"edgeBound must be positive, got {self.edge_bound}")
        if not (0 <= self.seed <= _SEED_MAX):
            raise SchemaError(f"seed must fit in 64 bits, got {self.seed}")
        object.__setattr__(self, "terminals", tuple(Point(p[0], p[1]) for p in self.terminals))


def parse_instance(doc) -> Instance:
    doc = _require_object(doc, "instance")
    _check_fields(
        doc,
        required={"schemaVersion", "terminals"},
        optional={"norm", "edgeBound", "seed", "label"},
        where="instance",
    )
    _check_version(doc, "instance")
    raw = doc["terminals"]
    if not isinstance(raw, list):
        raise SchemaError("instance terminals must be a list of [x, y] pairs")
    pts = [_as_point(p, f"terminals[{i}]") for i, p in enumerate(raw)]
    norm = norm_from_dict(doc["norm"]) if "norm" in doc else EUCLIDEAN
    r = _as_finite(doc.get("edgeBound", 1.0), "edgeBound")
    if not r > 0:
        raise SchemaError(f"edgeBound must be positive, got {r}")
    seed = _as_int(doc.get("seed", DEFAULT_SEED), "seed", minimum=0)
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("label must be a string")
    # Canonicalize: rescale so the edge bound becomes one.
    pts = [Point(p.x / r, p.y / r) for p in pts]
    return Instance(terminals=tuple(pts), norm=norm, edge_bound=1.0, seed=seed, label=label)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "label": inst.label,
        "terminals": [[p.x, p.y] for p in inst.terminals],
        "norm": norm_to_dict(inst.norm),
        "edgeBound": inst.edge_bound,
        "seed": inst.seed,
    }


def parse_topology(doc) -> Topology:
    doc = _require_object(doc, "topology")
    _check_fields(doc, required={"terminals", "edges"}, optional={"steiners"}, where="topology")
    terms = doc["terminals"]
    steiners = doc.get("steiners", [])
    edges = doc["edges"]
    for name, val in (("terminals", terms), ("steiners", steiners), ("edges", edges)):
        if not isinstance(val, list):
            raise SchemaError(f"topology {name} must be a list")
    for lab in list(terms) + list(steiners):
        if not isinstance(lab, str) or not lab:
            raise SchemaError(f"topology node labels must be non-empty strings, got {lab!r}")
    pairs = []
    for i, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise SchemaError(f"edges[{i}] must be a [a, b] label pair")
        pairs.append((e[0], e[1]))
    try:
        return Topology(list(terms), list(steiners), pairs)
    except StructuralError as exc:
        raise SchemaError(f"invalid topology: {exc}") from exc


def tree_to_dict(tree: EmbeddedTree) -> dict:
    top = tree.topology
    return {
        "schemaVersion": SCHEMA_VERSION,
        "norm": norm_to_dict(tree.norm),
        "terminals": {lab: [tree.positions[lab].x, tree.positions[lab].y] for lab in sorted(top.terminals)},
        "steiners": {lab: [tree.positions[lab].x, tree.positions[lab].y] for lab in sorted(top.steiners)},
        "edges": sorted([sorted(e)[0], sorted(e)[1]] for e in top.edges),
    }


def parse_tree(doc) -> EmbeddedTree:
    doc = _require_object(doc, "tree")
    _check_fields(
        doc,
        required={"schemaVersion", "terminals", "edges"},
        optional={"norm", "steiners"},
        where="tree",
    )
    _check_version(doc, "tree")
    terms = _require_object(doc["terminals"], "tree terminals")
    steiners = _require_object(doc.get("steiners", {}), "tree steiners")
    overlap = set(terms) & set(steiners)
    if overlap:
        raise SchemaError(f"labels appear as both terminal and Steiner point: {sorted(overlap)}")
    positions = {}
    for group, name in ((terms, "terminals"), (steiners, "steiners")):
        for lab, xy in group.items():
            positions[lab] = _as_point(xy, f"{name}[{lab!r}]")
    top = parse_topology(
        {"terminals": sorted(terms), "steiners": sorted(steiners), "edges": doc["edges"]}
    )
    norm = norm_from_dict(doc["norm"]) if "norm" in doc else EUCLIDEAN
    try:
        return EmbeddedTree(top, positions, norm)
    except StructuralError as exc:
        raise SchemaError(f"invalid tree: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """A batch run: how to draw instances and where to put the results."""

    generator: dict
    count: int
    n_range: tuple[int, int]
    norm: Norm = EUCLIDEAN
    oracle_budget: int = DEFAULT_BUDGET
    output_dir: str = "experiment-out"
    label: str = ""
    conjecture_probe: bool = True

    def __post_init__(self):
        if self.count < 1:
            raise SchemaError(f"count must be >= 1, got {self.count}")
        lo, hi = self.n_range
        if not (2 <= lo <= hi):
            raise SchemaError(f"nRange must satisfy 2 <= min <= max, got {self.n_range}")
        cap = _norm_capacity(self.norm)
        if hi > cap:
            raise CapacityError(
                f"nRange max {hi} exceeds the SMT-heuristic capacity {cap} for this norm"
            )


def _norm_capacity(norm: Norm) -> int:
    if norm.is_euclidean:
        return EUCLIDEAN_SMT_CAP
    if classify(norm).tag == PARALLELOGRAM:
        return 3
    return 2


def _parse_generator(doc, where: str) -> dict:
    doc = _require_object(doc, where)
    kind = doc.get("kind")
    if kind == "uniformSquare":
        _check_fields(doc, required={"kind"}, optional={"side"}, where=where)
        side = _as_finite(doc.get("side", 1.0), f"{where}.side")
        if not side > 0:
            raise SchemaError(f"{where}.side must be positive, got {side}")
        return {"kind": kind, "side": side}
    if kind == "clustered":
        _check_fields(doc, required={"kind"}, optional={"side", "clusters", "spread"}, where=where)
        side = _as_finite(doc.get("side", 1.0), f"{where}.side")
        spread = _as_finite(doc.get("spread", side / 10.0), f"{where}.spread")
        clusters = _as_int(doc.get("clusters", 2), f"{where}.clusters", minimum=1)
        if not side > 0 or not spread > 0:
            raise SchemaError(f"{where} side and spread must be positive")
        return {"kind": kind, "side": side, "clusters": clusters, "spread": spread}
    if kind == "fromFile":
        _check_fields(doc, required={"kind", "path"}, optional=set(), where=where)
        path = doc["path"]
        if not isinstance(path, str) or not path:
            raise SchemaError(f"{where}.path must be a non-empty string")
        return {"kind": kind, "path": path}
    raise SchemaError(f"{where}.kind must be one of {GENERATOR_KINDS}, got {kind!r}")


def parse_config(doc) -> ExperimentConfig:
    doc = _require_object(doc, "config")
    _check_fields(
        doc,
        required={"schemaVersion", "generator", "count", "nRange", "outputDir"},
        optional={"norm", "oracleBudget", "label", "conjectureProbe"},
        where="config",
    )
    _check_version(doc, "config")
    generator = _parse_generator(doc["generator"], "config.generator")
    count = _as_int(doc["count"], "config.count", minimum=1)
    nr = doc["nRange"]
    if not isinstance(nr, list) or len(nr) != 2:
        raise SchemaError("config.nRange must be a [min, max] pair")
    n_range = (_as_int(nr[0], "config.nRange[0]"), _as_int(nr[1], "config.nRange[1]"))
    norm = norm_from_dict(doc["norm"]) if "norm" in doc else EUCLIDEAN
    budget = _as_int(doc.get("oracleBudget", DEFAULT_BUDGET), "config.oracleBudget", minimum=1)
    out_dir = doc["outputDir"]
    if not isinstance(out_dir, str) or not out_dir:
        raise SchemaError("config.outputDir must be a non-empty string")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("config.label must be a string")
    probe = doc.get("conjectureProbe", True)
    if not isinstance(probe, bool):
        raise SchemaError("config.conjectureProbe must be a boolean")
    return ExperimentConfig(
        generator=generator,
        count=count,
        n_range=n_range,
        norm=norm,
        oracle_budget=budget,
        output_dir=out_dir,
        label=label,
        conjecture_probe=probe,
    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "label": cfg.label,
        "generator": dict(cfg.generator),
        "count": cfg.count,
        "nRange": list(cfg.n_range),
        "norm": norm_to_dict(cfg.norm),
        "oracleBudget": cfg.oracle_budget,
        "outputDir": cfg.output_dir,
        "conjectureProbe": cfg.conjecture_probe,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(path: str):
    """Read a UTF-8 JSON document; JSONDecodeError propagates with position."""
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
