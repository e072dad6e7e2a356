"""Minimum Steiner point trees in Minkowski planes.

Given terminals in the plane and a unit-distance cap on edge lengths, a
Steiner point tree interconnects the terminals using added points of two
kinds: proper Steiner points (junctions) and beads (degree-2 subdivision
points that split long edges into unit-length pieces).  This package counts
beads, builds SMT- and MST-based heuristic trees, searches for minimum-bead
trees, checks the performance-difference bounds relating them, generates
the worst-case families that make those bounds tight, and re-embeds
minimum-bead trees into a canonical almost-integer form.
"""
from __future__ import annotations

from .constructions import (
    SproutPlan,
    TightInstance,
    ZPackedTree,
    build_smt_with_topology,
    canonicalize_zpacked,
    critical_smt3,
    non_tessellation_witness,
    sprout,
    tight_instance,
)
from .errors import (
    BondEncounteredError,
    CapacityError,
    ConstructionError,
    InvalidNormError,
    SchemaError,
    SteinerBeadError,
    StructuralError,
    UsageError,
)
from .geometry import Point
from .mspt_oracle import (
    BoundReport,
    HeuristicResult,
    OracleResult,
    bound_report,
    minimize_beads_fixed_topology,
    mspt_exact3,
    mspt_search,
    mst_heuristic,
    smt_heuristic,
)
from .norms import EUCLIDEAN, Norm, classify, distance, gauge, norm_from_dict, polygon_norm
from .render import render_svg
from .serial import (
    ExperimentConfig,
    Instance,
    instance_to_dict,
    parse_config,
    parse_instance,
    parse_tree,
    tree_to_dict,
)
from .experiment import run_experiment
from .smt_solver import (
    SmtResult,
    enclosing_diagonalized_parallelogram,
    enumerate_full_topologies,
    euclidean_smt,
    fermat_point,
    norm_fermat_point,
    parallelogram_smt3,
)
from .tree_core import (
    BeadReport,
    EmbeddedTree,
    Topology,
    bead_count,
    bead_positions,
    canonical_topology_key,
    ceil_eps,
    contract_zero_edges,
    is_integer_length,
    steiner_bonds,
    to_full_form,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
