"""Command-line front end.

Subcommands wrap the library: heuristics, the oracle, bound checks, the
worst-case generators, the canonical re-embedding, batch experiments, and
SVG rendering.  Exit codes: 0 success; 1 malformed input (JSON syntax with
line/column, schema violations, bad command lines); 2 capacity exceeded;
3 bound violation reported by `bounds` (never expected — it would signal a
bug or a counterexample); 4 a generator could not realize its guarantee.

The seed used for solving is resolved as: --seed flag, then the
STEINERBEAD_SEED environment variable, then the instance file's seed,
then the package default.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .constructions import canonicalize_zpacked, critical_smt3, tight_instance
from .errors import (
    CapacityError,
    ConstructionError,
    InvalidNormError,
    SchemaError,
    StructuralError,
    UsageError,
)
from .experiment import run_experiment
from .mspt_oracle import DEFAULT_BUDGET, bound_report, mspt_search, mst_heuristic, smt_heuristic
from .norms import norm_from_dict
from .render import render_svg
from .seeding import DEFAULT_SEED
from .serial import (
    SCHEMA_VERSION,
    Instance,
    dumps,
    instance_to_dict,
    load_json,
    parse_config,
    parse_instance,
    parse_topology,
    parse_tree,
    tree_to_dict,
)
from .smt_solver import enumerate_full_topologies
from .tree_core import bead_count

ENV_SEED = "STEINERBEAD_SEED"

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_CAPACITY = 2
EXIT_BOUND_VIOLATION = 3
EXIT_CONSTRUCTION = 4


class _Parser(argparse.ArgumentParser):
    """argparse, but command-line mistakes exit 1 (2 is reserved for capacity)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_MALFORMED)


def _load(path: str):
    try:
        return load_json(path)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _effective_seed(args, inst: Instance | None = None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env, 0)
        except ValueError as exc:
            raise SchemaError(f"{ENV_SEED} must be an integer, got {env!r}") from exc
    if inst is not None:
        return inst.seed
    return DEFAULT_SEED


def _maybe_svg(tree, args) -> None:
    if getattr(args, "svg", None):
        _emit(render_svg(tree), args.svg)


def _report(command: str, body: dict) -> dict:
    return {"schemaVersion": SCHEMA_VERSION, "command": command, **body}


def cmd_heuristic(args) -> int:
    inst = parse_instance(_load(args.instance))
    fn = smt_heuristic if args.kind == "smt" else mst_heuristic
    result = fn(inst.terminals, inst.norm)
    doc = _report(
        "heuristic",
        {
            "kind": args.kind,
            "label": inst.label,
            "n": len(inst.terminals),
            "seed": _effective_seed(args, inst),
            "lengthTotal": result.tree.total_length(),
            **result.to_dict(),
            "tree": tree_to_dict(result.tree),
        },
    )
    _emit(dumps(doc), args.out)
    _maybe_svg(result.tree, args)
    return EXIT_OK


def cmd_smt(args) -> int:
    args.kind = "smt"
    return cmd_heuristic(args)


def cmd_oracle(args) -> int:
    inst = parse_instance(_load(args.instance))
    seed = _effective_seed(args, inst)
    result = mspt_search(inst.terminals, inst.norm, budget=args.budget, seed=seed)
    doc = _report(
        "oracle",
        {
            "label": inst.label,
            "n": len(inst.terminals),
            "seed": seed,
            **result.to_dict(),
            "tree": tree_to_dict(result.best_tree),
        },
    )
    _emit(dumps(doc), args.out)
    _maybe_svg(result.best_tree, args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    inst = parse_instance(_load(args.instance))
    seed = _effective_seed(args, inst)
    report = bound_report(inst.terminals, inst.norm, budget=args.budget, seed=seed)
    doc = _report("bounds", {"label": inst.label, "seed": seed, **report.to_dict()})
    _emit(dumps(doc), args.out)
    if report.violations:
        sys.stderr.write(f"bound violation: {', '.join(report.violations)}\n")
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_make_tight(args) -> int:
    if args.topology is not None:
        top = parse_topology(_load(args.topology))
    else:
        labels = [f"t{i}" for i in range(args.n)]
        top = enumerate_full_topologies(labels)[0]
    built = tight_instance(top)
    doc = _report(
        "make-tight",
        {
            "n": len(built.terminals),
            "expectedGap": built.expected_gap,
            "instance": instance_to_dict(
                Instance(terminals=built.terminals, label=f"tight-n{len(built.terminals)}")
            ),
            "smtBeads": bead_count(built.smt_tree).bead_count,
            "displacedBeads": bead_count(built.displaced_tree).bead_count,
            "smtTree": tree_to_dict(built.smt_tree),
            "displacedTree": tree_to_dict(built.displaced_tree),
        },
    )
    _emit(dumps(doc), args.out)
    _maybe_svg(built.displaced_tree, args)
    return EXIT_OK


def cmd_make_critical(args) -> int:
    norm = norm_from_dict(_load(args.norm))
    epsilons = tuple(float(x) for x in args.epsilons.split(","))
    terminals, star = critical_smt3(norm, epsilons)
    doc = _report(
        "make-critical",
        {
            "epsilons": list(epsilons),
            "gap": 2,
            "instance": instance_to_dict(
                Instance(terminals=tuple(terminals), norm=norm, label="critical-3")
            ),
            "starBeads": bead_count(star).bead_count,
            "tree": tree_to_dict(star),
        },
    )
    _emit(dumps(doc), args.out)
    _maybe_svg(star, args)
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    tree = parse_tree(_load(args.tree))
    free_edge = tuple(args.free_edge.split(",")) if args.free_edge else None
    if free_edge is not None and len(free_edge) != 2:
        raise SchemaError("--free-edge expects two comma-separated labels")
    packed = canonicalize_zpacked(tree, free_edge=free_edge)
    doc = _report(
        "canonicalize",
        {
            "beadCount": bead_count(packed.tree).bead_count,
            "integerEdges": sorted(sorted(e) for e in packed.integer_edges),
            "nonIntegerEdge": sorted(packed.non_integer_edge) if packed.non_integer_edge else None,
            "trace": list(packed.trace),
            "tree": tree_to_dict(packed.tree),
        },
    )
    _emit(dumps(doc), args.out)
    _maybe_svg(packed.tree, args)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = parse_config(_load(args.config))
    seed = _effective_seed(args)
    result = run_experiment(cfg, seed=seed, workers=args.workers)
    sys.stdout.write(
        f"wrote {len(result.rows)} rows ({len(result.failures)} failures) "
        f"to {result.csv_path}; summary in {result.summary_path}\n"
    )
    return EXIT_OK


def cmd_render(args) -> int:
    tree = parse_tree(_load(args.tree))
    _emit(render_svg(tree, show_beads=not args.no_beads), args.out)
    return EXIT_OK


def _add_common(sub, *, seed=True, out=True, svg=True):
    if seed:
        sub.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="override the random seed")
    if out:
        sub.add_argument("--out", default=None, help="write the report here instead of stdout")
    if svg:
        sub.add_argument("--svg", default=None, help="also render the resulting tree to this SVG file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steinerbead", description=__doc__.strip().splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("smt", help="Steiner-tree heuristic: build, bead, report")
    p.add_argument("instance", help="instance JSON file")
    _add_common(p)
    p.set_defaults(fn=cmd_smt)

    p = subs.add_parser("heuristic", help="run a named heuristic")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--kind", choices=("smt", "mst"), required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_heuristic)

    p = subs.add_parser("oracle", help="search for a minimum-bead tree")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="placement-evaluation budget")
    _add_common(p)
    p.set_defaults(fn=cmd_oracle)

    p = subs.add_parser("bounds", help="check every applicable performance bound")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_common(p, svg=False)
    p.set_defaults(fn=cmd_bounds)

    p = subs.add_parser("make-tight", help="generate an instance meeting the 2n-4 gap")
    p.add_argument("--n", type=int, required=True, help="terminal count")
    p.add_argument("--topology", default=None, help="full topology JSON file (default: first enumerated)")
    _add_common(p, seed=False)
    p.set_defaults(fn=cmd_make_tight)

    p = subs.add_parser("make-critical", help="generate a 3-terminal gap-2 star for a polygon norm")
    p.add_argument("--norm", required=True, help="norm JSON file")
    p.add_argument("--epsilons", default="0.2,0.2,0.2", help="comma-separated fractional parts")
    _add_common(p, seed=False)
    p.set_defaults(fn=cmd_make_critical)

    p = subs.add_parser("canonicalize", help="re-embed a minimum-bead tree with integer edges")
    p.add_argument("tree", help="tree JSON file")
    p.add_argument("--free-edge", default=None, help="labels 'a,b' of the edge allowed to stay fractional")
    _add_common(p, seed=False)
    p.set_defaults(fn=cmd_canonicalize)

    p = subs.add_parser("experiment", help="run a batch experiment from a config file")
    p.add_argument("--config", required=True, help="experiment config JSON file")
    p.add_argument("--workers", type=int, default=None, help="worker cap (default: available parallelism)")
    _add_common(p, out=False, svg=False)
    p.set_defaults(fn=cmd_experiment)

    p = subs.add_parser("render", help="render a tree JSON file to SVG")
    p.add_argument("tree", help="tree JSON file")
    p.add_argument("--no-beads", action="store_true", help="omit the bead dots")
    _add_common(p, seed=False, svg=False)
    p.set_defaults(fn=cmd_render)

    return parser


def entry(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return EXIT_CAPACITY
    except (SchemaError, StructuralError, UsageError, InvalidNormError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_MALFORMED
    except ConstructionError as exc:
        sys.stderr.write(f"construction failed: {exc}\n")
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(entry())
