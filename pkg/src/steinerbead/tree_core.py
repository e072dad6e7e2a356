"""Tree topologies, embedded trees, full Steiner form, and bead counting.

An abstract topology lists terminal labels, added-point ("Steiner") labels,
and tree edges; added points must have degree at least three, since a
degree-two added point is just a subdivision point of an edge.  An embedded
tree attaches coordinates and a norm.  Bead counting subdivides each edge of
length L into ceil(L) unit-capped pieces, placing ceil(L)-1 degree-two
points; the count of all added points (subdivision points plus degree-3+
nodes) for a tree with n terminals collapses to

    beads(T) = 1 - n + sum over full-form edges of ceil(length)

where the full form splits high-degree nodes into chains of degree-3 nodes
joined by zero-length edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import StructuralError
from .geometry import Point, angle_between, sub
from .norms import EUCLIDEAN, Norm, distance

EPS_LEN = 1e-9

Edge = tuple[str, str]


def ceil_eps(x: float) -> int:
    """Ceiling with a 1e-9 slack so near-integer lengths do not over-count.

    Lengths within 1e-9 of zero count as zero.
    """
    if x <= EPS_LEN:
        if x < 0.0:
            raise ValueError(f"negative length {x!r}")
        return 0
    return math.ceil(x - EPS_LEN)


def is_integer_length(x: float) -> bool:
    """True when x is within 1e-9 of an integer (zero included)."""
    return abs(x - round(x)) <= EPS_LEN


def _norm_edge(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Topology:
    """A tree on terminal labels and Steiner (added-point) labels.

    Edges are stored as sorted label pairs in sorted order.  Validation
    enforces the tree axioms and the degree >= 3 rule for Steiner labels.
    """

    terminals: tuple[str, ...]
    steiners: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __init__(self, terminals: Iterable[str], steiners: Iterable[str], edges: Iterable[Sequence[str]]):
        object.__setattr__(self, "terminals", tuple(terminals))
        object.__setattr__(self, "steiners", tuple(steiners))
        object.__setattr__(self, "edges", tuple(sorted(_norm_edge(e[0], e[1]) for e in edges)))
        self._validate()

    def _validate(self) -> None:
        terms, steins = set(self.terminals), set(self.steiners)
        if len(terms) != len(self.terminals) or len(steins) != len(self.steiners):
            raise StructuralError("duplicate node labels")
        if terms & steins:
            raise StructuralError(f"labels used as both terminal and Steiner: {sorted(terms & steins)}")
        nodes = terms | steins
        if len(self.edges) != len(set(self.edges)):
            raise StructuralError("duplicate edges")
        for a, b in self.edges:
            if a == b:
                raise StructuralError(f"self-loop at {a!r}")
            if a not in nodes or b not in nodes:
                raise StructuralError(f"edge ({a!r},{b!r}) references unknown labels")
        if len(self.edges) != len(nodes) - 1:
            raise StructuralError(
                f"not a tree: {len(self.edges)} edges on {len(nodes)} nodes"
            )
        if nodes and len(self._component(next(iter(self.terminals or self.steiners)))) != len(nodes):
            raise StructuralError("graph is disconnected")
        for s in self.steiners:
            if len(self.adjacency[s]) < 3:
                raise StructuralError(f"Steiner node {s!r} has degree {len(self.adjacency[s])} < 3")

    @cached_property
    def adjacency(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {v: [] for v in self.terminals + self.steiners}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def _component(self, start: str) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for w in self.adjacency[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def degree(self, label: str) -> int:
        return len(self.adjacency[label])

    @property
    def n(self) -> int:
        return len(self.terminals)

    @property
    def is_full(self) -> bool:
        return all(self.degree(t) == 1 for t in self.terminals) and all(
            self.degree(s) == 3 for s in self.steiners
        )

    def require_full(self) -> None:
        if not self.is_full:
            raise StructuralError("operation requires a full topology (terminal degrees 1, Steiner degrees 3)")


# A full topology is a Topology whose invariants are checked via require_full.
FullTopology = Topology


@dataclass(frozen=True, eq=False)
class EmbeddedTree:
    """A topology with coordinates for every node, under a norm."""

    topology: Topology
    positions: Mapping[str, Point]
    norm: Norm = EUCLIDEAN

    def __post_init__(self):
        pos = {k: Point(p[0], p[1]) for k, p in self.positions.items()}
        object.__setattr__(self, "positions", pos)
        missing = (set(self.topology.terminals) | set(self.topology.steiners)) - set(pos)
        if missing:
            raise StructuralError(f"nodes without positions: {sorted(missing)}")

    def edge_length(self, edge: Sequence[str]) -> float:
        return distance(self.norm, self.positions[edge[0]], self.positions[edge[1]])

    def edge_lengths(self) -> list[float]:
        return [self.edge_length(e) for e in self.topology.edges]

    def total_length(self) -> float:
        return sum(self.edge_lengths())


@dataclass(frozen=True)
class BeadReport:
    """Bead count of a tree together with the per-edge evidence.

    ``per_edge_ceilings`` lists (edge, length, ceiling) over the full-form
    edges; ``integer_edge_count`` (j) counts full-form edges of integer
    length including the zero-length edges that splitting introduces;
    ``full_component_count`` (c) is computed on the original tree as
    1 + sum over terminals of (degree - 1).
    """

    bead_count: int
    per_edge_ceilings: tuple[tuple[Edge, float, int], ...]
    integer_edge_count: int
    full_component_count: int

    def to_dict(self) -> dict:
        return {
            "beadCount": self.bead_count,
            "perEdgeCeilings": [
                {"edge": list(e), "length": ln, "ceiling": c} for e, ln, c in self.per_edge_ceilings
            ],
            "integerEdgeCount": self.integer_edge_count,
            "fullComponentCount": self.full_component_count,
        }


def to_full_form(tree: EmbeddedTree) -> EmbeddedTree:
    """Split high-degree nodes into degree-3 chains joined by zero edges.

    A degree-d terminal gains d-1 zero-length edges; a degree-d Steiner node
    (d >= 4) gains d-3.  New nodes sit at the split node's position and are
    labeled "<orig>#k".  Terminal positions and total length are unchanged.
    """
    top = tree.topology
    if top.is_full:
        return tree

    positions = dict(tree.positions)
    steiners = list(top.steiners)
    chain_edges: list[Edge] = []
    # (node, original neighbor) -> replacement endpoint for that edge
    endpoint: dict[tuple[str, str], str] = {}
    dropped: set[str] = set()

    def split(v: str, k: int, spread) -> None:
        labels = [f"{v}#{i}" for i in range(1, k + 1)]
        for lab in labels:
            if lab in positions:
                raise StructuralError(f"split label {lab!r} collides with an existing node")
            positions[lab] = positions[v]
            steiners.append(lab)
        prev = v if v in set(top.terminals) else None
        if prev is not None:
            chain_edges.append(_norm_edge(prev, labels[0]))
        for a, b in zip(labels, labels[1:]):
            chain_edges.append(_norm_edge(a, b))
        for i, u in enumerate(top.adjacency[v]):
            endpoint[(v, u)] = labels[spread(i, k)]

    for t in top.terminals:
        d = top.degree(t)
        if d >= 2:
            split(t, d - 1, lambda i, k: min(i, k - 1))
    for s in top.steiners:
        d = top.degree(s)
        if d >= 4:
            split(s, d - 2, lambda i, k: max(0, min(i - 1, k - 1)))
            dropped.add(s)

    new_edges = list(chain_edges)
    for a, b in top.edges:
        na = endpoint.get((a, b), a)
        nb = endpoint.get((b, a), b)
        new_edges.append(_norm_edge(na, nb))

    full = Topology(top.terminals, [s for s in steiners if s not in dropped], new_edges)
    full.require_full()
    return EmbeddedTree(full, positions, tree.norm)


def bead_count(tree: EmbeddedTree) -> BeadReport:
    """Bead count of a tree via its full form, with per-edge evidence."""
    full = to_full_form(tree)
    per_edge = []
    total = 0
    j = 0
    for e in full.topology.edges:
        ln = full.edge_length(e)
        c = ceil_eps(ln)
        per_edge.append((e, ln, c))
        total += c
        if is_integer_length(ln):
            j += 1
    top = tree.topology
    comp = 1 + sum(top.degree(t) - 1 for t in top.terminals)
    return BeadReport(
        bead_count=1 - top.n + total,
        per_edge_ceilings=tuple(per_edge),
        integer_edge_count=j,
        full_component_count=comp,
    )


def bead_positions(tree: EmbeddedTree) -> list[Point]:
    """Subdivision points: ceil(length)-1 equally spaced per edge."""
    pts: list[Point] = []
    for a, b in tree.topology.edges:
        pa, pb = tree.positions[a], tree.positions[b]
        m = ceil_eps(tree.edge_length((a, b)))
        for k in range(1, m):
            f = k / m
            pts.append(Point(pa.x + f * (pb.x - pa.x), pa.y + f * (pb.y - pa.y)))
    return pts


def materialize_segments(tree: EmbeddedTree) -> list[tuple[Point, Point]]:
    """Unit-capped segments obtained by subdividing every edge at its beads."""
    segs: list[tuple[Point, Point]] = []
    for a, b in tree.topology.edges:
        pa, pb = tree.positions[a], tree.positions[b]
        m = max(ceil_eps(tree.edge_length((a, b))), 1)
        stops = [
            Point(pa.x + (k / m) * (pb.x - pa.x), pa.y + (k / m) * (pb.y - pa.y))
            for k in range(m + 1)
        ]
        segs.extend(zip(stops, stops[1:]))
    return segs


@dataclass(frozen=True)
class StructureReport:
    """Cherries, caterpillar flag, and maximal junctions of a full topology."""

    cherries: tuple[tuple[str, tuple[str, str]], ...]
    is_caterpillar: bool
    maximal_junctions: tuple[str, ...]
    rooted_at: tuple[str, tuple[str, str]] | None


def _induced_is_caterpillar(nodes: set[str], adjacency: Mapping[str, tuple[str, ...]]) -> bool:
    deg = {v: sum(1 for w in adjacency[v] if w in nodes) for v in nodes}
    spine = [v for v in nodes if deg[v] >= 2]
    return all(sum(1 for w in adjacency[v] if w in spine) <= 2 for v in spine)


def structure(top: Topology) -> StructureReport:
    """Structural queries used by the canonicalization recursion.

    Cherries are (Steiner bead, terminal pair) combinations; junctions exist
    only in non-caterpillar trees and are computed on the tree rooted at the
    cherry bead with the lexicographically smallest terminal pair.
    """
    top.require_full()
    adj = top.adjacency
    terms = set(top.terminals)

    cherries = []
    for s in top.steiners:
        tn = sorted(u for u in adj[s] if u in terms)
        for i in range(len(tn)):
            for jj in range(i + 1, len(tn)):
                cherries.append((s, (tn[i], tn[jj])))
    cherries.sort(key=lambda c: (c[1], c[0]))

    # The topology is a caterpillar iff its non-leaf nodes — exactly the
    # Steiner nodes — form a path: the Steiner subgraph is connected, so
    # that reduces to a degree condition.
    steiner_set = set(top.steiners)
    cat = all(sum(1 for w in adj[s] if w in steiner_set) <= 2 for s in top.steiners)
    if cat or not cherries:
        return StructureReport(tuple(cherries), cat, (), cherries[0] if cherries else None)

    root_cherry = cherries[0]
    root = root_cherry[0]
    parent: dict[str, str | None] = {root: None}
    order = [root]
    stack = [root]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
                stack.append(w)

    desc: dict[str, set[str]] = {v: {v} for v in order}
    for v in reversed(order):
        p = parent[v]
        if p is not None:
            desc[p] |= desc[v]

    junctions = set()
    for s in top.steiners:
        if s == root:
            continue
        children = [w for w in adj[s] if w != parent[s]]
        if all(_induced_is_caterpillar({s} | desc[ch], adj) for ch in children):
            junctions.add(s)
    maximal = sorted(s for s in junctions if parent[s] not in junctions)
    return StructureReport(tuple(cherries), False, tuple(maximal), root_cherry)


def steiner_bonds(tree: EmbeddedTree) -> list[tuple[Edge, Edge]]:
    """Pairs of edges meeting at a Steiner node at an angle within 1e-7 of pi."""
    top = tree.topology
    bonds = []
    for s in top.steiners:
        p = tree.positions[s]
        nbrs = top.adjacency[s]
        for i in range(len(nbrs)):
            u = sub(tree.positions[nbrs[i]], p)
            if math.hypot(*u) < 1e-12:
                continue
            for jj in range(i + 1, len(nbrs)):
                v = sub(tree.positions[nbrs[jj]], p)
                if math.hypot(*v) < 1e-12:
                    continue
                if abs(angle_between(u, v) - math.pi) <= 1e-7:
                    bonds.append((_norm_edge(s, nbrs[i]), _norm_edge(s, nbrs[jj])))
    return bonds


def contract_zero_edges(tree: EmbeddedTree, tol: float = EPS_LEN) -> EmbeddedTree:
    """Contract near-zero edges incident to Steiner nodes.

    A Steiner node coincident with a neighbor merges into it (terminals
    survive merges).  Used to turn solver output with degenerate edges into
    a valid topology.
    """
    top = tree.topology
    terms = set(top.terminals)
    adj: dict[str, set[str]] = {v: set(ns) for v, ns in top.adjacency.items()}
    positions = dict(tree.positions)

    def find_victim():
        for a in sorted(adj):
            for b in adj[a]:
                if a < b and (a not in terms or b not in terms):
                    if distance(tree.norm, positions[a], positions[b]) < tol:
                        return a, b
        return None

    while (pair := find_victim()) is not None:
        a, b = pair
        if b in terms or (a not in terms and b < a):
            a, b = b, a
        # a survives, b dissolves into a
        for w in adj.pop(b):
            adj[w].discard(b)
            if w != a:
                adj[w].add(a)
                adj[a].add(w)
        adj[a].discard(b)
        del positions[b]

    edges = sorted({_norm_edge(a, b) for a, ns in adj.items() for b in ns})
    new_top = Topology(top.terminals, [s for s in top.steiners if s in adj], edges)
    return EmbeddedTree(new_top, positions, tree.norm)


def _centroids(nodes: list[str], adjacency: Mapping[str, tuple[str, ...]]) -> list[str]:
    """The one or two middle nodes left after repeatedly stripping leaves."""
    if len(nodes) <= 2:
        return list(nodes)
    deg = {v: len(adjacency[v]) for v in nodes}
    layer = [v for v in nodes if deg[v] == 1]
    remaining = len(nodes)
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            deg[v] = 0
            for w in adjacency[v]:
                if deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        layer = nxt
    return layer


def canonical_topology_key(top: Topology):
    """Isomorphism key fixing terminal labels, treating Steiner labels as anonymous."""
    adj = top.adjacency

    def encode(v: str, parent: str | None):
        kids = tuple(sorted(encode(w, v) for w in adj[v] if w != parent))
        tag = ("T", v) if v in set(top.terminals) else ("S",)
        return (tag, kids)

    nodes = list(top.terminals + top.steiners)
    return min(encode(c, None) for c in _centroids(nodes, adj))
