"""Worst-case instance builders and the integer-edge canonical form.

Four construction families live here:

* ``sprout`` and ``build_smt_with_topology`` grow a Euclidean Steiner tree
  with any prescribed full topology out of a three-legged base, keeping every
  junction at exact 120-degree angles.  The returned tree is checked against
  the topology-enumerating solver: it must win with a strictly positive
  runner-up margin.
* ``tight_instance`` preselects edge lengths just below/above integers and
  then walks each Steiner point outward along its parent ray so that every
  edge's ceiling drops by one except the first.  The two returned trees share
  a topology and differ by exactly ``2n - 4`` beads.
* ``critical_smt3`` searches a (non-parallelogram) polygon norm for a
  three-terminal star whose unit balls do not fit together seamlessly around
  the Steiner point; the bead count of that star then exceeds the optimum by
  exactly 2, which the three-terminal oracle verifies.
* ``canonicalize_zpacked`` re-embeds a Euclidean minimum-bead tree so that
  all edges except (at most) one chosen internal edge have integer length,
  without ever changing the bead count.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    BondEncounteredError,
    CapacityError,
    ConstructionError,
    StructuralError,
    UsageError,
)
from .geometry import Point, add, circle_circle, dist, dot, rotate, scale, sub, unit, wrap_angle
from .mspt_oracle import mspt_exact3
from .norms import EUCLIDEAN, PARALLELOGRAM, Norm, classify, distance_to_many, gauge
from .smt_solver import euclidean_smt, norm_fermat_point
from .tree_core import (
    EmbeddedTree,
    Topology,
    bead_count,
    canonical_topology_key,
    ceil_eps,
    is_integer_length,
    steiner_bonds,
)

Edge = tuple[str, str]

#: Runner-up margin of the canonical four-terminal instance with unit legs.
F4 = 3.0 * math.sqrt(3.0) - 5.0

TIGHT_EPSILON = 0.5
TIGHT_BASE_FACTOR = 7
TIGHT_MAX_N = 10

CRITICAL_INTEGER_PARTS = (2, 2, 2)
CRITICAL_TRIAL_BUDGET = 10_000
_JITTER_ANGLES = (0.0, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2, 0.4, -0.4)

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def _edge(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


def f_constants(n: int) -> tuple[float, ...]:
    """The geometric margin sequence F4 / 4^(i-4) for i = 4..n."""
    return tuple(F4 / 4.0 ** (i - 4) for i in range(4, n + 1))


class EdgeLengthSpec(NamedTuple):
    """One preselected edge length: integer part plus a signed fraction."""

    integer_part: int
    epsilon_sign: str
    epsilon_value: float

    @property
    def length(self) -> float:
        return self.integer_part + (self.epsilon_value if self.epsilon_sign == "+" else -self.epsilon_value)


@dataclass(frozen=True)
class SproutPlan:
    """A full topology with a preselected near-integer length for every edge."""

    target_topology: Topology
    edge_specs: Mapping[Edge, EdgeLengthSpec]
    f_constants: tuple[float, ...]

    def __post_init__(self):
        top = self.target_topology
        top.require_full()
        if set(self.edge_specs) != set(top.edges):
            raise UsageError("edge specs must cover exactly the topology's edges")
        for e, spec in self.edge_specs.items():
            if not (isinstance(spec.integer_part, int) and spec.integer_part >= 2):
                raise UsageError(f"integer part of edge {e} must be an integer >= 2")
            if spec.epsilon_sign not in ("+", "-"):
                raise UsageError(f"epsilon sign of edge {e} must be '+' or '-'")
            if not (1e-6 < spec.epsilon_value < 1.0 - 1e-6):
                raise UsageError(f"epsilon of edge {e} must lie strictly inside (1e-6, 1 - 1e-6)")
        fc = self.f_constants
        if any(f <= 0.0 for f in fc):
            raise UsageError("margin constants must be strictly positive")
        for a, b in zip(fc, fc[1:]):
            if abs(a / b - 4.0) > 1e-9:
                raise UsageError("margin constants must decrease by a factor of 4")

    def length_of(self, edge: Sequence[str]) -> float:
        return self.edge_specs[_edge(edge[0], edge[1])].length


@dataclass(frozen=True)
class TightInstance:
    """An SMT and a same-topology re-embedding that is 2n-4 beads cheaper."""

    terminals: tuple[Point, ...]
    smt_tree: EmbeddedTree
    displaced_tree: EmbeddedTree
    expected_gap: int
    plan: SproutPlan | None = None


@dataclass(frozen=True)
class ZPackedTree:
    """A full tree in which all edges but at most one have integer length."""

    tree: EmbeddedTree
    integer_edges: tuple[Edge, ...]
    non_integer_edge: Edge | None
    trace: tuple[dict, ...] = ()


# ---------------------------------------------------------------------------
# Sprouting


def sprout(
    tree: EmbeddedTree,
    terminal: str,
    new_edge_length: float,
    *,
    new_labels: tuple[str, str] | None = None,
) -> EmbeddedTree:
    """Replace a degree-1 terminal by a Steiner point with two new terminals.

    The two new edges have the requested length and meet each other and the
    old incident edge at 120 degrees, so a locally minimal tree stays locally
    minimal.  ``new_labels`` optionally names the two new terminals (smaller
    label on the counterclockwise side).
    """
    if tree.norm.kind != "euclidean":
        raise UsageError("sprouting is defined for Euclidean trees only")
    top = tree.topology
    if terminal not in top.terminals:
        raise StructuralError(f"{terminal!r} is not a terminal of the tree")
    if top.degree(terminal) != 1:
        raise StructuralError(
            f"can only sprout a degree-1 terminal; {terminal!r} has degree {top.degree(terminal)}"
        )
    length = float(new_edge_length)
    if not length > 0.0:
        raise UsageError("new edge length must be positive")

    taken = set(top.terminals) | set(top.steiners)
    if new_labels is None:
        la, lb = f"{terminal}a", f"{terminal}b"
        while la in taken or lb in taken:
            la += "'"
            lb += "'"
    else:
        la, lb = sorted(str(x) for x in new_labels)
        if la == lb or la in taken or lb in taken:
            raise StructuralError(f"new terminal labels {new_labels!r} collide with existing nodes")

    (nbr,) = top.adjacency[terminal]
    spos = tree.positions[terminal]
    w = unit(sub(tree.positions[nbr], spos))
    pa = add(spos, scale(rotate(w, _TWO_THIRDS_PI), length))
    pb = add(spos, scale(rotate(w, -_TWO_THIRDS_PI), length))

    terminals = [t for t in top.terminals if t != terminal] + [la, lb]
    steiners = list(top.steiners) + [terminal]
    edges = list(top.edges) + [(terminal, la), (terminal, lb)]
    positions = dict(tree.positions)
    positions[la] = pa
    positions[lb] = pb
    return EmbeddedTree(Topology(terminals, steiners, edges), positions, EUCLIDEAN)


def _reduction_steps(top: Topology, protect: str | None = None) -> tuple[Topology, list[tuple[str, Edge]]]:
    """Shrink a full topology to a 3-terminal star by removing terminal pairs.

    Each step removes the two terminal neighbours of some Steiner node, which
    then becomes a terminal itself.  ``protect`` names a terminal that must
    survive every step.  Returns the base star and the step list (in removal
    order); replaying the steps in reverse with ``sprout`` rebuilds the
    topology.
    """
    cur = top
    steps: list[tuple[str, Edge]] = []
    while cur.n > 3:
        adj = cur.adjacency
        terms = set(cur.terminals)
        best: tuple[Edge, str] | None = None
        for s in sorted(cur.steiners):
            t_nbrs = sorted(v for v in adj[s] if v in terms)
            if len(t_nbrs) < 2:
                continue
            pair = (t_nbrs[0], t_nbrs[1])
            if protect is not None and protect in pair:
                continue
            if best is None or (pair, s) < best:
                best = (pair, s)
        if best is None:
            raise StructuralError("no reducible terminal pair found")
        pair, s = best
        new_terms = [v for v in cur.terminals if v not in pair] + [s]
        new_steiners = [v for v in cur.steiners if v != s]
        new_edges = [e for e in cur.edges if pair[0] not in e and pair[1] not in e]
        cur = Topology(new_terms, new_steiners, new_edges)
        steps.append((s, pair))
    return cur, steps


def _embed_base(base: Topology, leg_lengths: Mapping[str, float]) -> EmbeddedTree:
    """Embed a 3-terminal star: legs at mutual 120 degrees around the origin."""
    (center,) = base.steiners
    positions: dict[str, Point] = {center: Point(0.0, 0.0)}
    for k, lab in enumerate(sorted(base.terminals)):
        ang = math.pi / 2.0 + k * _TWO_THIRDS_PI
        positions[lab] = Point(leg_lengths[lab] * math.cos(ang), leg_lengths[lab] * math.sin(ang))
    return EmbeddedTree(base, positions, EUCLIDEAN)


def _replay(base_tree: EmbeddedTree, steps: list[tuple[str, Edge]], lengths: Sequence[float]) -> EmbeddedTree:
    tree = base_tree
    for (bead, pair), length in zip(reversed(steps), lengths):
        tree = sprout(tree, bead, length, new_labels=pair)
    return tree


def _verify_unique_smt(tree: EmbeddedTree) -> None:
    """Check that the built tree is the solver's unique winner, or raise."""
    labels = sorted(tree.topology.terminals)
    res = euclidean_smt([tree.positions[lab] for lab in labels])

    prefix = "#s"
    while any(lab.startswith(prefix) for lab in labels):
        prefix += "#"
    rename = {f"t{i}": lab for i, lab in enumerate(labels)}
    sol_top = res.tree.topology
    rename.update({s: f"{prefix}{i}" for i, s in enumerate(sorted(sol_top.steiners))})
    solved = Topology(
        [rename[t] for t in sol_top.terminals],
        [rename[s] for s in sol_top.steiners],
        [(rename[a], rename[b]) for a, b in sol_top.edges],
    )

    built_len = tree.total_length()
    diagnostics = {
        "builtLength": built_len,
        "solverLength": res.length,
        "runnerUpGap": res.runner_up_gap,
        "degenerateEdges": [list(e) for e in res.degenerate_edges],
    }
    if res.degenerate_edges:
        raise ConstructionError("solver's best tree has degenerate edges", diagnostics)
    if canonical_topology_key(solved) != canonical_topology_key(tree.topology):
        raise ConstructionError("solver found a different topology than the one built", diagnostics)
    if not res.runner_up_gap > 0.0:
        raise ConstructionError("built topology is not the strict winner", diagnostics)
    if abs(res.length - built_len) > 1e-6 * max(1.0, built_len):
        raise ConstructionError("solver length disagrees with the built tree", diagnostics)


def build_smt_with_topology(target_topology: Topology, scale_: float) -> EmbeddedTree:
    """Embed terminals so their unique shortest Steiner tree has this topology.

    Starts from an equilateral 3-leg base of the given leg length and sprouts
    terminal pairs with geometrically shrinking edge lengths; each new pair is
    short enough that no rival topology can catch up.  The result is verified
    with the topology-enumerating solver (strict winner, no degenerate edges).
    """
    target_topology.require_full()
    if target_topology.n < 3:
        raise UsageError("need at least 3 terminals")
    s = float(scale_)
    if not s > 0.0:
        raise UsageError("scale must be positive")

    base, steps = _reduction_steps(target_topology)
    tree = _embed_base(base, {t: s for t in base.terminals})
    margin = (2.0 * math.sqrt(3.0) - 3.0) * s  # runner-up margin of the equilateral base
    lengths = []
    for _ in steps:
        margin /= 4.0
        lengths.append(margin)
    tree = _replay(tree, steps, lengths)
    if target_topology.n >= 4:
        _verify_unique_smt(tree)
    return tree


# ---------------------------------------------------------------------------
# Tight-gap instances


def _rooted_beads(top: Topology, root: str) -> tuple[list[str], dict[str, str], dict[str, int]]:
    """Breadth-first Steiner order, parents, and depths, rooted at a terminal."""
    adj = top.adjacency
    (s0,) = adj[root]
    parent = {s0: root}
    depth = {s0: 0}
    order = [s0]
    queue = deque([s0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in top.steiners and w not in depth:
                parent[w] = v
                depth[w] = depth[v] + 1
                order.append(w)
                queue.append(w)
    return order, parent, depth


def _tight_plan(
    top: Topology,
    root: str,
    depth: Mapping[str, int],
    base: Topology,
    steps: list[tuple[str, Edge]],
) -> SproutPlan:
    """Preselect near-integer edge lengths that keep the sprouted tree an SMT.

    The margin a Steiner tree with the built topology holds over every rival
    topology starts at (2*sqrt(3)-3) times the base leg length and loses
    three times the sprouted edge length at each sprout; keeping each sprout
    under a quarter of the current margin preserves positivity.  Integer
    parts therefore shrink by a factor of 4 per sprout step (deepest sprout
    gets 2), and the base legs get 7 * 4^steps, which starts the margin above
    4 * (first sprout length).  Fractional parts follow the 1/8-per-level
    chain that the displacement sequence needs.
    """
    n_steps = len(steps)
    big = TIGHT_BASE_FACTOR * 4**n_steps
    eps = [TIGHT_EPSILON / 8.0**k for k in range(max(depth.values()) + 2)]

    (center,) = base.steiners
    specs: dict[Edge, EdgeLengthSpec] = {}
    for t in base.terminals:
        e = _edge(center, t)
        if t == root:
            specs[e] = EdgeLengthSpec(big, "-", TIGHT_EPSILON)
        else:
            specs[e] = EdgeLengthSpec(big, "+", eps[1])
    for j, (bead, pair) in enumerate(reversed(steps)):
        part = 3 * 4 ** (n_steps - 1 - j) - 1
        for child in pair:
            specs[_edge(bead, child)] = EdgeLengthSpec(part, "+", eps[depth[bead] + 1])
    if set(specs) != set(top.edges):
        raise ConstructionError(
            "sprout replay does not cover the topology's edges",
            {"missing": [list(e) for e in set(top.edges) - set(specs)]},
        )
    return SproutPlan(top, specs, f_constants(top.n))


def _ray_bisect(origin: Point, d: Point, fn, target: float, hi: float, diagnostics: dict) -> Point:
    """Find delta in [0, hi] with fn(origin + delta*d) == target by bisection."""
    g0 = fn(origin) - target
    g1 = fn(add(origin, scale(d, hi))) - target
    if g0 == 0.0:
        return origin
    if (g0 < 0.0) == (g1 < 0.0):
        raise ConstructionError("displacement target is not bracketed along the ray", diagnostics)
    lo_, hi_ = 0.0, hi
    for _ in range(200):
        mid = 0.5 * (lo_ + hi_)
        gm = fn(add(origin, scale(d, mid))) - target
        if gm == 0.0:
            lo_ = hi_ = mid
            break
        if (gm < 0.0) == (g0 < 0.0):
            lo_ = mid
        else:
            hi_ = mid
        if hi_ - lo_ <= 1e-12:
            break
    return add(origin, scale(d, 0.5 * (lo_ + hi_)))


def _displace_tight(
    smt_tree: EmbeddedTree,
    plan: SproutPlan,
    root: str,
    order: list[str],
    parent: Mapping[str, str],
    depth: Mapping[str, int],
) -> EmbeddedTree:
    top = smt_tree.topology
    adj = top.adjacency
    pos = dict(smt_tree.positions)
    orig = dict(smt_tree.positions)

    for s in order:
        p = parent[s]
        d = unit(sub(orig[s], orig[p]))
        children = [w for w in adj[s] if w != p]
        info = {"bead": s, "parent": p, "depth": depth[s]}
        if s == order[0]:
            spec = plan.edge_specs[_edge(root, s)]
            target = spec.integer_part - spec.epsilon_value / 2.0
            tpos = pos[root]
            fn = lambda x: dist(tpos, x)  # noqa: E731 - tiny local closure
            hi = spec.epsilon_value
        else:
            spec = plan.edge_specs[_edge(s, children[0])]
            target = spec.integer_part - spec.epsilon_value / 2.0
            cpos = [pos[c] for c in children]
            fn = lambda x: max(dist(x, c) for c in cpos)  # noqa: E731
            hi = min(dot(sub(c, pos[s]), d) for c in cpos)
        pos[s] = _ray_bisect(pos[s], d, fn, target, hi, info)
    return EmbeddedTree(top, pos, EUCLIDEAN)


def tight_instance(target_topology: Topology) -> TightInstance:
    """Build an instance whose SMT beats its own re-embedding by 2n-4 beads.

    Every edge of the constructed SMT sits just above an integer except the
    one terminal edge that sits just below; walking each Steiner point
    outward along its parent ray pulls every other edge below its integer
    while the first edge's ceiling survives.  Per-edge bands and the exact
    bead gap are asserted.
    """
    target_topology.require_full()
    n = target_topology.n
    if n < 3:
        raise UsageError("a tight instance needs at least 3 terminals")
    if n > TIGHT_MAX_N:
        raise CapacityError(
            f"tight_instance supports n <= {TIGHT_MAX_N}, got {n}: "
            f"the epsilon chain 0.5/8^k would fall below the 1e-9 length tolerance"
        )

    root = min(target_topology.terminals)
    order, parent, depth = _rooted_beads(target_topology, root)
    base, steps = _reduction_steps(target_topology, protect=root)
    plan = _tight_plan(target_topology, root, depth, base, steps)
    (center,) = base.steiners
    if center != order[0]:
        raise ConstructionError(
            "root's Steiner neighbour did not survive the reduction",
            {"center": center, "rootBead": order[0]},
        )
    legs = {t: plan.length_of((center, t)) for t in base.terminals}
    tree = _embed_base(base, legs)
    lengths = [plan.length_of((bead, pair[0])) for bead, pair in reversed(steps)]
    smt_tree = _replay(tree, steps, lengths)

    for e in target_topology.edges:
        got = smt_tree.edge_length(e)
        want = plan.length_of(e)
        if abs(got - want) > 1e-9:
            raise ConstructionError(
                "sprouted edge length drifted from its preselected value",
                {"edge": list(e), "want": want, "got": got},
            )
    if n <= 6:
        _verify_unique_smt(smt_tree)

    displaced = _displace_tight(smt_tree, plan, root, order, parent, depth)

    root_edge = _edge(root, order[0])
    for e in target_topology.edges:
        after = displaced.edge_length(e)
        spec = plan.edge_specs[e]
        if not (spec.integer_part - 1.0 < after < spec.integer_part):
            raise ConstructionError(
                "displaced edge left its unit band",
                {"edge": list(e), "length": after, "band": [spec.integer_part - 1, spec.integer_part]},
            )

    gap = bead_count(smt_tree).bead_count - bead_count(displaced).bead_count
    if gap != 2 * n - 4:
        raise ConstructionError(
            "bead gap between the built trees is not 2n-4",
            {"gap": gap, "expected": 2 * n - 4, "rootEdge": list(root_edge)},
        )

    term_labels = sorted(target_topology.terminals)
    return TightInstance(
        terminals=tuple(smt_tree.positions[t] for t in term_labels),
        smt_tree=smt_tree,
        displaced_tree=displaced,
        expected_gap=2 * n - 4,
        plan=plan,
    )


# ---------------------------------------------------------------------------
# Critical three-terminal instances in polygon norms


def non_tessellation_witness(
    norm: Norm,
    terminals: Sequence[Point],
    center: Point,
    *,
    samples: int = 720,
    step: float | None = None,
) -> Point | None:
    """A unit direction along which two of the three edge lengths shrink.

    The balls centered at the terminals through ``center`` fit together
    seamlessly exactly when no direction enters two ball interiors at once;
    finding such a direction therefore witnesses that they do not.  Returns
    ``None`` when no sampled direction qualifies.
    """
    c = Point(center[0], center[1])
    pts = [Point(t[0], t[1]) for t in terminals]
    radii = [gauge(norm, sub(t, c)) for t in pts]
    if min(radii) <= 1e-9:
        raise UsageError("center coincides with a terminal")
    if step is None:
        step = 1e-5 * min(radii)

    angles = [2.0 * math.pi * k / samples for k in range(samples)]
    if norm.kind == "polygon":
        for v in norm.vertices:
            a = math.atan2(v[1], v[0])
            angles.extend((a - 0.013, a, a + 0.013))
    dirs = np.array([[math.cos(a), math.sin(a)] for a in angles])
    probes = np.array([c.x, c.y]) + step * dirs

    shrinks = np.zeros(len(probes), dtype=int)
    for t, r in zip(pts, radii):
        shrinks += (distance_to_many(norm, t, probes) < r - 1e-9).astype(int)
    hits = np.nonzero(shrinks >= 2)[0]
    if len(hits) == 0:
        return None
    k = int(hits[0])
    return Point(dirs[k, 0], dirs[k, 1])


def _dual_gauge(norm: Norm, u) -> float:
    """Support function of the unit ball: the dual norm of a functional."""
    return max(u[0] * vx + u[1] * vy for vx, vy in norm.vertices)


def _dual_boundary(norm: Norm, alpha: float):
    v = (math.cos(alpha), math.sin(alpha))
    return scale(v, 1.0 / _dual_gauge(norm, v))


def _exposed_direction(norm: Norm, u):
    """Unit direction into the ball face on which the functional u peaks."""
    scores = [(u[0] * vx + u[1] * vy, (vx, vy)) for vx, vy in norm.vertices]
    best = max(s for s, _ in scores)
    tied = [v for s, v in scores if s > best - 1e-9]
    if len(tied) == 1:
        return unit(tied[0])
    if len(tied) == 2:
        return unit(((tied[0][0] + tied[1][0]) / 2.0, (tied[0][1] + tied[1][1]) / 2.0))
    return None


def _steiner_direction_triples(norm: Norm, grid: int = 48, scan: int = 192) -> list[tuple]:
    """Ray triples along which three edges can meet at a Steiner point.

    A point is a best meeting point of three rays exactly when some norming
    functionals of the ray directions sum to zero.  We walk the dual ball's
    boundary: for each first functional, root-find the second so the negated
    sum lands back on the dual boundary, then read off the ball faces the
    three functionals expose.
    """
    out: list[tuple] = []
    seen: set[tuple] = set()
    for i in range(grid):
        u1 = _dual_boundary(norm, 2.0 * math.pi * i / grid)

        def balance(a2: float) -> float:
            u2 = _dual_boundary(norm, a2)
            return _dual_gauge(norm, (-(u1[0] + u2[0]), -(u1[1] + u2[1]))) - 1.0

        prev_a = prev_g = None
        for j in range(scan + 1):
            a2 = 2.0 * math.pi * j / scan
            val = balance(a2)
            if prev_g is not None and (prev_g < 0.0) != (val < 0.0):
                lo, hi, flo = prev_a, a2, prev_g
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    fm = balance(mid)
                    if (fm < 0.0) == (flo < 0.0):
                        lo, flo = mid, fm
                    else:
                        hi = mid
                u2 = _dual_boundary(norm, 0.5 * (lo + hi))
                u3 = (-(u1[0] + u2[0]), -(u1[1] + u2[1]))
                ws = [_exposed_direction(norm, u) for u in (u1, u2, u3)]
                if all(w is not None for w in ws):
                    angs = sorted(math.atan2(w[1], w[0]) % (2.0 * math.pi) for w in ws)
                    gaps = (angs[1] - angs[0], angs[2] - angs[1], angs[0] + 2.0 * math.pi - angs[2])
                    key = tuple(round(a, 3) for a in angs)
                    if min(gaps) > 0.09 and key not in seen:
                        seen.add(key)
                        out.append(tuple(ws))
            prev_a, prev_g = a2, val
    return out


def _symmetric_triples(norm: Norm) -> list[tuple]:
    """Euclidean-120-degree ray triples: ball-vertex orientations, then a grid."""
    angles: list[float] = []
    for v in norm.vertices:
        angles.append(math.atan2(v[1], v[0]) % _TWO_THIRDS_PI)
    angles.extend(k * _TWO_THIRDS_PI / 24.0 for k in range(24))
    seen: list[float] = []
    for a in angles:
        if not any(abs(a - b) < 1e-6 for b in seen):
            seen.append(a)
    return [
        tuple((math.cos(a + k * _TWO_THIRDS_PI), math.sin(a + k * _TWO_THIRDS_PI)) for k in range(3))
        for a in seen
    ]


def _star_terminals(norm: Norm, dirs: Sequence, phi: float, radii: Sequence[float]) -> list[Point]:
    """Terminals at the given norm radii along three rays; first ray turned by phi."""
    pts = []
    for k, (w, r) in enumerate(zip(dirs, radii)):
        v = rotate(w, phi) if k == 0 else w
        pts.append(Point(*scale(v, r / gauge(norm, v))))
    return pts


def critical_smt3(norm: Norm, epsilons: Sequence[float]) -> tuple[list[Point], EmbeddedTree]:
    """A three-terminal star whose bead count exceeds the optimum by exactly 2.

    Terminals are placed on three rays from the origin at the prescribed
    lengths ``a_i + eps_i``; the orientation (and, if needed, a small rotation
    of one terminal) is searched until the origin is a best meeting point,
    the balls through it leave a two-ball opening, and the three-terminal
    oracle confirms the gap of 2.
    """
    if norm.kind != "polygon":
        raise UsageError("critical_smt3 needs a polygon norm")
    if classify(norm).tag == PARALLELOGRAM:
        raise UsageError("parallelogram norms always admit a seamless meeting point; no critical instance exists")
    eps = tuple(float(e) for e in epsilons)
    if len(eps) != 3 or not all(0.0 < e < 1.0 for e in eps):
        raise UsageError("epsilons must be three values strictly inside (0, 1)")

    radii = tuple(a + e for a, e in zip(CRITICAL_INTEGER_PARTS, eps))
    star_beads = sum(a + 1 for a in CRITICAL_INTEGER_PARTS) - 2
    origin = Point(0.0, 0.0)

    trials: list[dict] = []
    rng = np.random.default_rng(0xBEAD5EED)

    def candidates():
        triples = _steiner_direction_triples(norm) + _symmetric_triples(norm)
        for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)):
            for ws in triples:
                for phi in _JITTER_ANGLES:
                    yield tuple(ws[k] for k in perm), phi
        while True:
            a = sorted(rng.uniform(0.0, 2.0 * math.pi, size=3))
            yield tuple((math.cos(x), math.sin(x)) for x in a), float(rng.uniform(-0.5, 0.5))

    for dirs, phi in candidates():
        if len(trials) >= CRITICAL_TRIAL_BUDGET:
            break
        angles = [round(math.atan2(w[1], w[0]), 4) for w in dirs]
        trial = {"rayAngles": angles, "phi": phi}
        trials.append(trial)

        terminals = _star_terminals(norm, dirs, phi, radii)
        if min(dist(a, b) for i, a in enumerate(terminals) for b in terminals[i + 1:]) <= 1e-9:
            trial["reason"] = "coincident terminals"
            continue
        fsum = sum(radii)
        ft = norm_fermat_point(norm, *terminals)
        fmin = sum(gauge(norm, sub(t, ft)) for t in terminals)
        if fsum > fmin + 1e-9:
            trial["reason"] = "origin is not a best meeting point"
            continue
        witness = non_tessellation_witness(norm, terminals, origin)
        if witness is None:
            trial["reason"] = "balls fit seamlessly; no two-ball opening"
            continue
        oracle = mspt_exact3(terminals, norm)
        gap = star_beads - oracle.best_beads
        if gap != 2:
            trial["reason"] = f"oracle gap {gap}, want 2"
            continue

        top = Topology(["t0", "t1", "t2"], ["s0"], [("s0", "t0"), ("s0", "t1"), ("s0", "t2")])
        positions = {"t0": terminals[0], "t1": terminals[1], "t2": terminals[2], "s0": origin}
        tree = EmbeddedTree(top, positions, norm)
        for t, r in zip(terminals, radii):
            if abs(gauge(norm, sub(t, origin)) - r) > 1e-9:
                raise ConstructionError("terminal radius drifted", {"want": r})
        return list(terminals), tree

    raise ConstructionError(
        "no critical instance found within the trial budget",
        {"trials": len(trials), "lastTrials": trials[-20:]},
    )


# ---------------------------------------------------------------------------
# Integer-edge canonical form


def _check_step(top: Topology, pos: Mapping[str, Point], base: int, trace: list[dict], what: str) -> None:
    tree = EmbeddedTree(top, pos, EUCLIDEAN)
    got = bead_count(tree).bead_count
    if got != base:
        raise ConstructionError(
            f"bead count changed during {what}",
            {"before": base, "after": got, "trace": list(trace)},
        )
    bonds = steiner_bonds(tree)
    if bonds:
        raise BondEncounteredError(
            f"a Steiner bond appeared during {what}",
            {"bonds": [[list(e1), list(e2)] for e1, e2 in bonds], "trace": list(trace)},
        )


def _corner_step(
    anchors: list[tuple[str, Point]],
    s: Point,
    wanted: set[str],
    diagnostics: dict,
) -> Point:
    """Move a bead to an integer-integer circle crossing, keeping its ceiling sum.

    Candidates are crossings of circles around two anchors whose radii are the
    current ceilings (or one less).  Preference: both wanted edges integer,
    then every individual ceiling preserved, then shortest local star.
    """
    dists = [dist(p, s) for _, p in anchors]
    ceils = [ceil_eps(d) for d in dists]
    total = sum(ceils)

    best_key = None
    best_point = None
    for i in range(3):
        for j in range(i + 1, 3):
            for ri in {ceils[i], ceils[i] - 1}:
                if ri < 1:
                    continue
                for rj in {ceils[j], ceils[j] - 1}:
                    if rj < 1:
                        continue
                    for x in circle_circle(anchors[i][1], float(ri), anchors[j][1], float(rj)):
                        nd = [dist(p, x) for _, p in anchors]
                        if min(nd) <= 1e-9:
                            continue
                        nc = [ceil_eps(d) for d in nd]
                        if sum(nc) != total:
                            continue
                        flags = [is_integer_length(d) for d in nd]
                        if sum(flags) < 2:
                            continue
                        both_wanted = all(
                            flags[k] for k in range(3) if anchors[k][0] in wanted
                        )
                        preserved = nc == ceils
                        key = (
                            0 if both_wanted else 1,
                            0 if preserved else 1,
                            sum(nd),
                            x[0],
                            x[1],
                        )
                        if best_key is None or key < best_key:
                            best_key = key
                            best_point = x
    if best_point is None:
        raise ConstructionError(
            "no ceiling-preserving circle crossing found for a bead",
            {**diagnostics, "dists": dists, "ceilings": ceils},
        )
    return best_point


def _first_crossing(f, lo: float, hi: float, value: float) -> float | None:
    """First argument in (lo, hi] where the monotone piece of f equals value."""
    flo = f(lo) - value
    fhi = f(hi) - value
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        return None
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid) - value
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            a = mid
        else:
            b = mid
        if b - a <= 1e-13:
            break
    return 0.5 * (a + b)


def _crossings_on_arc(f, span: float, breaks: list[float], value: float) -> float | None:
    """Earliest crossing of ``value`` over [0, span], split at the extrema."""
    cuts = [0.0] + sorted(b for b in breaks if 0.0 < b < span) + [span]
    for lo, hi in zip(cuts, cuts[1:]):
        hit = _first_crossing(f, lo, hi, value)
        if hit is not None and hit > 1e-15:
            return hit
    return None


def _rotate_to_integer(
    pivot: Point,
    target: Point,
    free: Point,
    s: Point,
    m_target: int,
    m_free: int,
    diagnostics: dict,
) -> Point:
    """Rotate a bead about an integer edge until the target edge goes integer.

    The bead slides along the circle around ``pivot`` toward the line through
    ``pivot`` and ``free`` (which monotonically shortens the free edge).  It
    must reach the target edge's ceiling before the free edge falls through
    its floor and before the line itself; the first would change the bead
    count, the second is a Steiner bond.
    """
    r = dist(pivot, s)
    psi_s = math.atan2(s[1] - pivot[1], s[0] - pivot[0])
    psi_f = math.atan2(free[1] - pivot[1], free[0] - pivot[0])
    psi_a = math.atan2(target[1] - pivot[1], target[0] - pivot[0])
    delta = wrap_angle(psi_f - psi_s)
    span = abs(delta)
    sgn = 1.0 if delta >= 0.0 else -1.0
    if span <= 1e-12:
        raise BondEncounteredError("bead already sits on the pivot-free line", diagnostics)

    ra = dist(pivot, target)
    rf = dist(pivot, free)

    def d_target(phi: float) -> float:
        ang = psi_s + sgn * phi - psi_a
        return math.sqrt(max(r * r + ra * ra - 2.0 * r * ra * math.cos(ang), 0.0))

    def d_free(phi: float) -> float:
        ang = psi_s + sgn * phi - psi_f
        return math.sqrt(max(r * r + rf * rf - 2.0 * r * rf * math.cos(ang), 0.0))

    # The target distance is monotone between the angles where the bead, the
    # pivot and the target anchor line up; cut the sweep there.
    beta0 = psi_s - psi_a
    breaks = []
    k0 = math.floor((beta0 if sgn > 0 else beta0 - span) / math.pi) - 2
    for k in range(k0, k0 + 6):
        phi = (k * math.pi - beta0) / sgn
        if 0.0 < phi < span:
            breaks.append(phi)

    events: list[tuple[float, str]] = []
    hit = _crossings_on_arc(d_target, span, breaks, float(m_target))
    if hit is not None:
        events.append((hit, "target"))
    if m_target - 1 > 0:
        hit = _crossings_on_arc(d_target, span, breaks, float(m_target - 1))
        if hit is not None:
            events.append((hit, "target-floor"))
    if m_free - 1 > 0:
        hit = _first_crossing(d_free, 0.0, span, float(m_free - 1))
        if hit is not None and hit > 1e-15:
            events.append((hit, "free-floor"))

    if not events:
        raise BondEncounteredError(
            "rotation reached the bond line before any integer crossing", diagnostics
        )
    phi0, kind = min(events)
    if kind != "target":
        raise ConstructionError(
            f"rotation hit a {kind} crossing first; the bead count would change",
            {**diagnostics, "phi": phi0},
        )
    ang = psi_s + sgn * phi0
    return Point(pivot[0] + r * math.cos(ang), pivot[1] + r * math.sin(ang))


def _process_bead(
    top: Topology,
    pos: dict[str, Point],
    s: str,
    wanted: list[str],
    parent: str,
    base: int,
    trace: list[dict],
) -> None:
    def lengths():
        return {w: dist(pos[w], pos[s]) for w in wanted + [parent]}

    d = lengths()
    want_int = [w for w in wanted if is_integer_length(d[w])]
    if len(want_int) == 2:
        trace.append({"bead": s, "action": "skip", "position": [float(pos[s][0]), float(pos[s][1])]})
        return

    info = {"bead": s, "wanted": list(wanted), "freeEdge": [s, parent]}
    if len(want_int) == 0:
        anchors = [(w, pos[w]) for w in wanted] + [(parent, pos[parent])]
        pos[s] = _corner_step(anchors, pos[s], set(wanted), info)
        trace.append({"bead": s, "action": "corner", "position": [float(pos[s][0]), float(pos[s][1])]})
        _check_step(top, pos, base, trace, f"the corner step at {s!r}")
        d = lengths()
        want_int = [w for w in wanted if is_integer_length(d[w])]
        if len(want_int) == 2:
            return
        if not want_int:
            raise ConstructionError(
                "corner step left both outward edges fractional", {**info, "lengths": d}
            )

    pivot = want_int[0]
    (target,) = [w for w in wanted if w != pivot]
    pos[s] = _rotate_to_integer(
        pos[pivot],
        pos[target],
        pos[parent],
        pos[s],
        ceil_eps(d[target]),
        ceil_eps(d[parent]),
        {**info, "pivot": pivot, "target": target},
    )
    trace.append({"bead": s, "action": "rotation", "position": [float(pos[s][0]), float(pos[s][1])]})
    _check_step(top, pos, base, trace, f"the rotation at {s!r}")


def _zpack3(tree: EmbeddedTree, base: int) -> ZPackedTree:
    top = tree.topology
    labels = sorted(top.terminals)
    pts = [tree.positions[lab] for lab in labels]
    (bead,) = top.steiners

    best_key = None
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for ri in range(1, base + 1):
            for rj in range(1, base + 2 - ri):
                for x in circle_circle(pts[i], float(ri), pts[j], float(rj)):
                    nd = [dist(p, x) for p in pts]
                    if min(nd) <= 1e-9:
                        continue
                    if sum(ceil_eps(v) for v in nd) - 2 != base:
                        continue
                    if sum(is_integer_length(v) for v in nd) < 2:
                        continue
                    key = (sum(nd), x[0], x[1])
                    if best_key is None or key < best_key:
                        best_key = key
                        best = x
    if best is None:
        raise ConstructionError(
            "no integer-circle re-embedding preserves the bead count",
            {"beadCount": base, "terminals": [[p.x, p.y] for p in pts]},
        )

    positions = dict(tree.positions)
    positions[bead] = best
    packed = EmbeddedTree(top, positions, EUCLIDEAN)
    bonds = steiner_bonds(packed)
    if bonds:
        raise BondEncounteredError(
            "the shortest integer-circle re-embedding has a Steiner bond",
            {"bonds": [[list(e1), list(e2)] for e1, e2 in bonds]},
        )
    integer = tuple(e for e in top.edges if is_integer_length(packed.edge_length(e)))
    non = tuple(e for e in top.edges if not is_integer_length(packed.edge_length(e)))
    trace = ({"bead": bead, "action": "corner", "position": [float(best[0]), float(best[1])]},)
    return ZPackedTree(packed, integer, non[0] if non else None, trace)


def canonicalize_zpacked(mspt: EmbeddedTree, *, free_edge: Sequence[str] | None = None) -> ZPackedTree:
    """Re-embed a minimum-bead full tree so all but one edge go integer.

    Works inward from the leaves: every Steiner bead is moved to an
    integer-integer circle crossing (and, if needed, rotated about one integer
    edge) so that its two outward edges get integer length while its inward
    edge absorbs the slack.  The single possibly-fractional edge defaults to
    the internal edge at the lexicographically first terminal pair and can be
    overridden with ``free_edge``.  The bead count is asserted unchanged after
    every move; a collinear edge pair at a bead aborts the run.
    """
    if mspt.norm.kind != "euclidean":
        raise UsageError("canonicalization is defined for Euclidean trees only")
    top = mspt.topology
    top.require_full()
    n = top.n
    if n < 3:
        raise StructuralError("need at least one Steiner bead")
    if min(mspt.edge_lengths()) <= 1e-9:
        raise StructuralError("tree has a degenerate (zero-length) edge")
    bonds = steiner_bonds(mspt)
    if bonds:
        raise BondEncounteredError(
            "input tree already has a Steiner bond",
            {"bonds": [[list(e1), list(e2)] for e1, e2 in bonds]},
        )
    base = bead_count(mspt).bead_count

    if n == 3:
        if free_edge is not None:
            raise UsageError("a 3-terminal tree has no internal edge to choose")
        return _zpack3(mspt, base)

    adj = top.adjacency
    if free_edge is None:
        cherries = []
        for s in sorted(top.steiners):
            t_nbrs = sorted(v for v in adj[s] if v in top.terminals)
            if len(t_nbrs) >= 2:
                cherries.append(((t_nbrs[0], t_nbrs[1]), s))
        pair, rbead = min(cherries)
        (partner,) = [v for v in adj[rbead] if v in top.steiners]
        chosen = _edge(rbead, partner)
    else:
        chosen = _edge(str(free_edge[0]), str(free_edge[1]))
        if chosen not in set(top.edges):
            raise UsageError(f"free edge {list(chosen)} is not an edge of the tree")
        if chosen[0] in top.terminals or chosen[1] in top.terminals:
            raise UsageError("the free edge must be internal (between two Steiner beads)")

    a, b = chosen
    parent = {a: b, b: a}
    depth = {a: 0, b: 0}
    queue = deque([a, b])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in top.steiners and w not in depth:
                parent[w] = v
                depth[w] = depth[v] + 1
                queue.append(w)

    order = sorted(top.steiners, key=lambda v: (-depth[v], v))
    pos = dict(mspt.positions)
    trace: list[dict] = []
    for s in order:
        wanted = [w for w in adj[s] if w != parent[s]]
        _process_bead(top, pos, s, wanted, parent[s], base, trace)

    packed = EmbeddedTree(top, pos, EUCLIDEAN)
    report = bead_count(packed)
    if report.bead_count != base:
        raise ConstructionError(
            "bead count drifted during canonicalization",
            {"before": base, "after": report.bead_count},
        )
    integer = tuple(e for e in top.edges if is_integer_length(packed.edge_length(e)))
    non = tuple(e for e in top.edges if not is_integer_length(packed.edge_length(e)))
    if len(non) > 1 or any(e != chosen for e in non):
        raise ConstructionError(
            "a non-chosen edge stayed fractional",
            {"fractional": [list(e) for e in non], "chosen": list(chosen)},
        )
    if len(integer) < 2 * n - 4:
        raise ConstructionError(
            "fewer integer edges than promised",
            {"integer": len(integer), "needed": 2 * n - 4},
        )
    return ZPackedTree(packed, integer, non[0] if non else None, tuple(trace))
