"""Bead-count heuristics, desk-scale oracles, and bound reports.

The minimum number of added points for a tree T with n terminals is
1 - n + sum(ceil(edge length)), so minimizing beads for a fixed topology is
a placement problem over the added points.  The three-terminal oracle is
exact: an optimal single added point can always be moved to a terminal or to
an intersection of integer-radius rings around two terminals without raising
any ceiling, so enumerating that finite lattice suffices.  For four
terminals the same lattice is enumerated exhaustively per topology (with a
joint product for the two-bead topologies); whether it always contains an
optimum is unknown, which the result status records.  Larger instances fall
back to multi-start local search and are flagged BestEffort.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, StructuralError, UsageError
from .geometry import Point, circle_circle, dist, segment_intersections
from .norms import EUCLIDEAN, PARALLELOGRAM, Norm, classify, distance, distance_to_many
from .seeding import DEFAULT_SEED, stream
from .smt_solver import (
    _steiner_prefix,
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
    materialize_segments,
)

DEFAULT_BUDGET = 10**6
EUCLIDEAN_SMT_CAP = 8


def _ceil_arr(d: np.ndarray) -> np.ndarray:
    """Vectorized epsilon-ceiling: lengths within 1e-9 of zero count as 0."""
    return np.maximum(np.ceil(d - 1e-9), 0.0)


@dataclass(frozen=True)
class HeuristicResult:
    """A heuristic tree with its beading materialized."""

    tree: EmbeddedTree
    report: BeadReport
    heuristic_name: str
    bead_points: tuple[Point, ...]
    segments: tuple[tuple[Point, Point], ...]

    def to_dict(self) -> dict:
        return {
            "heuristicName": self.heuristic_name,
            "report": self.report.to_dict(),
            "beadPoints": [[p.x, p.y] for p in self.bead_points],
        }


def _heuristic_result(tree: EmbeddedTree, name: str) -> HeuristicResult:
    return HeuristicResult(
        tree=tree,
        report=bead_count(tree),
        heuristic_name=name,
        bead_points=tuple(bead_positions(tree)),
        segments=tuple(materialize_segments(tree)),
    )


def _two_terminal_tree(terminals, norm: Norm) -> EmbeddedTree:
    top = Topology(["t0", "t1"], [], [("t0", "t1")])
    return EmbeddedTree(top, {"t0": terminals[0], "t1": terminals[1]}, norm)


def smt_heuristic(terminals, norm: Norm = EUCLIDEAN) -> HeuristicResult:
    """Build an SMT and bead it.

    Capacity: Euclidean n <= 8, parallelogram-ball norms n = 3 (closed
    form), any norm at n = 2.
    """
    n = len(terminals)
    if n == 2:
        return _heuristic_result(_two_terminal_tree(terminals, norm), "smt")
    if norm.is_euclidean:
        if n > EUCLIDEAN_SMT_CAP:
            raise CapacityError(f"Euclidean SMT heuristic supports n <= {EUCLIDEAN_SMT_CAP}, got {n}")
        result = euclidean_smt(terminals, max_n=EUCLIDEAN_SMT_CAP)
        tree = contract_zero_edges(result.tree, 1e-7)
        return _heuristic_result(tree, "smt")
    if classify(norm).tag == PARALLELOGRAM and n == 3:
        tree, _ = parallelogram_smt3(norm, *terminals)
        return _heuristic_result(contract_zero_edges(tree, 1e-9), "smt")
    raise CapacityError(
        "SMT heuristic limits: Euclidean n <= 8, parallelogram norm n = 3, any norm n = 2; "
        f"got n = {n} with a {classify(norm).tag} ball"
    )


def _mst_edges(terminals, norm: Norm) -> list[tuple[int, int]]:
    n = len(terminals)
    ranked = sorted(
        (distance(norm, terminals[i], terminals[j]), i, j)
        for i in range(n)
        for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for _, i, j in ranked:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            out.append((i, j))
            if len(out) == n - 1:
                break
    return out


def mst_heuristic(terminals, norm: Norm = EUCLIDEAN) -> HeuristicResult:
    """Minimum spanning tree under the norm, beaded."""
    if len(terminals) < 2:
        raise UsageError("need at least 2 terminals")
    labels = [f"t{i}" for i in range(len(terminals))]
    edges = [(labels[i], labels[j]) for i, j in _mst_edges(terminals, norm)]
    top = Topology(labels, [], edges)
    tree = EmbeddedTree(top, dict(zip(labels, terminals)), norm)
    return _heuristic_result(tree, "mst")


def _min_ceiling_spanning_tree(terminals, norm: Norm) -> EmbeddedTree:
    """Spanning tree minimizing the bead count (exact: Kruskal on ceilings)."""
    n = len(terminals)
    ranked = sorted(
        (ceil_eps(distance(norm, terminals[i], terminals[j])), distance(norm, terminals[i], terminals[j]), i, j)
        for i in range(n)
        for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    labels = [f"t{i}" for i in range(n)]
    edges = []
    for _, _, i, j in ranked:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((labels[i], labels[j]))
    top = Topology(labels, [], edges)
    return EmbeddedTree(top, dict(zip(labels, terminals)), norm)


@dataclass(frozen=True)
class OracleResult:
    """Best MSPT found, with an honest exactness status."""

    best_tree: EmbeddedTree
    best_beads: int
    status: str  # ExactN3 | ExhaustiveVerified | BestEffort
    search_trace: dict

    def to_dict(self) -> dict:
        return {
            "bestBeads": self.best_beads,
            "status": self.status,
            "searchTrace": self.search_trace,
        }


def _ring_ring_points(norm: Norm, c0, r0, c1, r1) -> list[tuple[float, float]]:
    """Intersections of norm-spheres of radii r0, r1 around c0, c1."""
    if r0 <= 0:
        return [(c0[0], c0[1])] if abs(distance(norm, c0, c1) - r1) <= 1e-9 else []
    if r1 <= 0:
        return [(c1[0], c1[1])] if abs(distance(norm, c0, c1) - r0) <= 1e-9 else []
    if norm.is_euclidean:
        return [tuple(p) for p in circle_circle(c0, r0, c1, r1)]
    verts = norm.vertices
    m = len(verts)
    a = [(c0[0] + r0 * v.x, c0[1] + r0 * v.y) for v in verts]
    b = [(c1[0] + r1 * v.x, c1[1] + r1 * v.y) for v in verts]
    pts: list[tuple[float, float]] = []
    for i in range(m):
        a0, a1 = a[i], a[(i + 1) % m]
        for j in range(m):
            pts.extend(segment_intersections(a0, a1, b[j], b[(j + 1) % m]))
    out: list[tuple[float, float]] = []
    seen = set()
    for p in pts:
        key = (round(p[0], 9), round(p[1], 9))
        if key not in seen:
            seen.add(key)
            out.append((p[0], p[1]))
    return sorted(out)


def _ball_vertex_points(norm: Norm, center, r: int) -> list[tuple[float, float]]:
    if norm.is_euclidean:
        return []
    return [(center[0] + r * v.x, center[1] + r * v.y) for v in norm.vertices]


def _path_tree(terminals, norm: Norm, mid: int) -> EmbeddedTree:
    labels = [f"t{i}" for i in range(3)]
    others = [i for i in range(3) if i != mid]
    top = Topology(labels, [], [(labels[mid], labels[others[0]]), (labels[mid], labels[others[1]])])
    return EmbeddedTree(top, dict(zip(labels, terminals)), norm)


def _star_tree(terminals, norm: Norm, x) -> EmbeddedTree:
    labels = [f"t{i}" for i in range(3)]
    top = Topology(labels, ["s0"], [(l, "s0") for l in labels])
    pos = dict(zip(labels, terminals))
    pos["s0"] = Point(x[0], x[1])
    return EmbeddedTree(top, pos, norm)


def mspt_exact3(terminals, norm: Norm = EUCLIDEAN) -> OracleResult:
    """Exact three-terminal oracle over the integer-ring candidate lattice.

    Candidates: the three two-edge spanning paths; single added points at
    each terminal, at the (norm) Fermat point, at every pairwise
    intersection of integer-radius rings around two terminals, and (for
    polygonal norms) at ring vertices.  An optimal added point can always be
    displaced to one of these without raising any distance ceiling.
    """
    if len(terminals) != 3:
        raise UsageError(f"mspt_exact3 requires exactly 3 terminals, got {len(terminals)}")
    pts = [Point(p[0], p[1]) for p in terminals]
    d = [[distance(norm, pts[i], pts[j]) for j in range(3)] for i in range(3)]
    rcap = ceil_eps(max(d[0][1], d[0][2], d[1][2])) + 1

    best_beads = None
    best_tree = None

    # spanning paths (no added degree-3 point)
    for mid in range(3):
        others = [i for i in range(3) if i != mid]
        beads = (ceil_eps(d[mid][others[0]]) + ceil_eps(d[mid][others[1]])) - 2
        if best_beads is None or beads < best_beads:
            best_beads, best_tree = beads, _path_tree(pts, norm, mid)

    candidates: list[tuple[float, float]] = [tuple(p) for p in pts]
    try:
        candidates.append(tuple(norm_fermat_point(norm, *pts)))
    except UsageError:
        pass
    for i in range(3):
        for j in range(i + 1, 3):
            for ri in range(1, rcap + 1):
                for rj in range(1, rcap + 1):
                    candidates.extend(_ring_ring_points(norm, pts[i], ri, pts[j], rj))
        for r in range(1, rcap + 1):
            candidates.extend(_ball_vertex_points(norm, pts[i], r))

    arr = np.array(candidates, dtype=float)
    total = np.zeros(len(arr))
    for p in pts:
        total += _ceil_arr(distance_to_many(norm, p, arr))
    g = total - 2.0
    kbest = int(np.lexsort((arr[:, 1], arr[:, 0], g))[0])
    if g[kbest] < best_beads:
        best_beads = int(round(g[kbest]))
        best_tree = _star_tree(pts, norm, arr[kbest])

    trace = {"candidates": int(len(arr)) + 3, "radiusCap": rcap}
    return OracleResult(best_tree, int(best_beads), "ExactN3", trace)


@lru_cache(maxsize=32)
def _steiner_topologies_cached(labels: tuple[str, ...]) -> tuple[Topology, ...]:
    fulls = enumerate_full_topologies(list(labels))
    prefix = _steiner_prefix(labels)
    seen = {}
    for top in fulls:
        edges = top.edges
        for mask in range(1 << len(edges)):
            contracted = _contract_mask(top, edges, mask, prefix)
            if contracted is None:
                continue
            key = canonical_topology_key(contracted)
            if key not in seen:
                seen[key] = contracted
    return tuple(seen[k] for k in sorted(seen))


def _contract_mask(top: Topology, edges, mask: int, prefix: str) -> Topology | None:
    """Contract the masked edges; None when two terminals would merge."""
    nodes = list(top.terminals) + list(top.steiners)
    idx = {v: i for i, v in enumerate(nodes)}
    parent = list(range(len(nodes)))
    nterm = len(top.terminals)
    is_term = [i < nterm for i in range(len(nodes))]

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in range(len(edges)):
        if mask >> b & 1:
            x, y = find(idx[edges[b][0]]), find(idx[edges[b][1]])
            if x == y:
                return None
            if is_term[x] and is_term[y]:
                return None
            if is_term[y]:
                x, y = y, x
            parent[y] = x  # terminal representative survives

    rep_label: dict[int, str] = {}
    steiners: list[str] = []
    for i, v in enumerate(nodes):
        r = find(i)
        if r not in rep_label:
            if is_term[r]:
                rep_label[r] = nodes[r]
            else:
                rep_label[r] = f"{prefix}{len(steiners)}"
                steiners.append(rep_label[r])
    new_edges = set()
    for b, (a, c) in enumerate(edges):
        if mask >> b & 1:
            continue
        u, v = rep_label[find(idx[a])], rep_label[find(idx[c])]
        if u == v:
            return None
        new_edges.add((u, v) if u <= v else (v, u))
    # merged nodes can fall below degree 3 only when the mask was wasteful;
    # those shapes already arise from a smaller mask, so drop them
    try:
        return Topology(top.terminals, steiners, sorted(new_edges))
    except StructuralError:
        return None


def enumerate_steiner_topologies(labels) -> list[Topology]:
    """All topologies spanning the terminals with 0..n-2 added points.

    Generated by contracting edge subsets of every full topology and
    deduplicating up to Steiner-relabeling isomorphism; contractions that
    would merge two terminals are discarded.
    """
    return list(_steiner_topologies_cached(tuple(sorted(str(l) for l in labels))))


class _Budget:
    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    def charge(self, k: int) -> bool:
        """Try to spend k placements; False (and no charge) if over budget."""
        if self.used + k > self.limit:
            return False
        self.used += k
        return True


def _beads_of_positions(top: Topology, pos: dict, norm: Norm) -> int:
    total = 0
    for a, b in top.edges:
        total += ceil_eps(distance(norm, pos[a], pos[b]))
    return 1 - top.n + total


def _eval_candidates(norm: Norm, cand: np.ndarray, anchors) -> np.ndarray:
    """Sum of distance ceilings from each candidate row to each anchor."""
    total = np.zeros(len(cand))
    for p in anchors:
        total += _ceil_arr(distance_to_many(norm, p, cand))
    return total


def _bead_lattice(norm: Norm, anchors: list, rcap: int, extras: list) -> np.ndarray:
    """Candidate positions for one added point anchored at terminal pairs."""
    pts: list[tuple[float, float]] = [tuple(p) for p in anchors]
    pts.extend(tuple(p) for p in extras)
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            for ri in range(1, rcap + 1):
                for rj in range(1, rcap + 1):
                    pts.extend(_ring_ring_points(norm, anchors[i], ri, anchors[j], rj))
        for r in range(1, rcap + 1):
            pts.extend(_ball_vertex_points(norm, anchors[i], r))
    seen = set()
    out = []
    for p in pts:
        key = (round(p[0], 9), round(p[1], 9))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return np.array(out, dtype=float)


def _relax_seed(top: Topology, terminals_by_label: dict, norm: Norm) -> dict:
    """Steiner start positions: Euclidean-relaxed full form collapsed back."""
    beads = sorted(top.steiners)
    pos = dict(terminals_by_label)
    if not beads:
        return pos
    # iterate averaged neighbor positions, then a few Fermat sweeps when deg 3
    for s in beads:
        nb = [terminals_by_label[u] for u in top.adjacency[s] if u in terminals_by_label]
        if nb:
            pos[s] = (sum(p[0] for p in nb) / len(nb), sum(p[1] for p in nb) / len(nb))
        else:
            pos[s] = tuple(next(iter(terminals_by_label.values())))
    for _ in range(60):
        for s in beads:
            nb = [pos[u] for u in top.adjacency[s]]
            if len(nb) == 3:
                f = fermat_point(*nb)
                pos[s] = (f.x, f.y)
            else:
                pos[s] = (sum(p[0] for p in nb) / len(nb), sum(p[1] for p in nb) / len(nb))
    return pos


def _local_search(
    top: Topology,
    terminals_by_label: dict,
    norm: Norm,
    rcap: int,
    budget: _Budget,
    rng,
    n_starts: int = 4,
) -> tuple[dict, int]:
    """Multi-start snap-to-ring descent over added-point positions."""
    beads = sorted(top.steiners)
    base = _relax_seed(top, terminals_by_label, norm)
    diam = max(
        (dist(p, q) for p in terminals_by_label.values() for q in terminals_by_label.values()),
        default=1.0,
    )
    starts = [base]
    cx = sum(p[0] for p in terminals_by_label.values()) / len(terminals_by_label)
    cy = sum(p[1] for p in terminals_by_label.values()) / len(terminals_by_label)
    starts.append({**terminals_by_label, **{s: (cx, cy) for s in beads}})
    for _ in range(max(0, n_starts - 2)):
        jit = {
            s: (base[s][0] + rng.uniform(-0.2, 0.2) * diam, base[s][1] + rng.uniform(-0.2, 0.2) * diam)
            for s in beads
        }
        starts.append({**terminals_by_label, **jit})

    best_pos = None
    best_beads = None
    out_of_budget = False
    for start in starts:
        if out_of_budget:
            break
        pos = dict(start)
        cur = _beads_of_positions(top, pos, norm)
        improved = True
        while improved and not out_of_budget:
            improved = False
            for s in beads:
                nbrs = list(top.adjacency[s])
                anchors = [pos[u] for u in nbrs]
                cand: list[tuple[float, float]] = [tuple(a) for a in anchors]
                if len(anchors) == 3:
                    f = fermat_point(*anchors)
                    cand.append((f.x, f.y))
                for i in range(len(anchors)):
                    ci = ceil_eps(distance(norm, pos[s], anchors[i]))
                    for j in range(i + 1, len(anchors)):
                        cj = ceil_eps(distance(norm, pos[s], anchors[j]))
                        for ri in range(max(1, ci - 3), min(rcap, ci + 3) + 1):
                            for rj in range(max(1, cj - 3), min(rcap, cj + 3) + 1):
                                cand.extend(_ring_ring_points(norm, anchors[i], ri, anchors[j], rj))
                arr = np.array(cand, dtype=float)
                if not budget.charge(len(arr)):
                    out_of_budget = True
                    break
                local = _eval_candidates(norm, arr, anchors)
                # bead count with s's own edges swapped out
                fixed = cur - sum(ceil_eps(distance(norm, pos[s], a)) for a in anchors)
                k = int(np.lexsort((arr[:, 1], arr[:, 0], local))[0])
                if fixed + local[k] < cur:
                    pos[s] = (arr[k, 0], arr[k, 1])
                    cur = fixed + int(round(local[k]))
                    improved = True
        if best_beads is None or cur < best_beads:
            best_beads, best_pos = cur, pos
    return best_pos, int(best_beads)


def _optimize_topology(
    top: Topology,
    terminals_by_label: dict,
    norm: Norm,
    rcap: int,
    budget: _Budget,
    rng,
    allow_lattice: bool,
) -> tuple[dict, int, bool]:
    """Best placement for one topology.

    Returns (positions, beads, lattice_exhausted) where the flag reports
    whether the full candidate lattice was enumerated within budget.
    """
    beads = sorted(top.steiners)
    n = top.n
    if not beads:
        pos = dict(terminals_by_label)
        return pos, _beads_of_positions(top, pos, norm), True

    term_set = set(top.terminals)
    exhausted = False
    best_pos: dict | None = None
    best = None

    if allow_lattice and len(beads) <= 2:
        seed = _relax_seed(top, terminals_by_label, norm)
        if len(beads) == 1:
            s = beads[0]
            anchors = [terminals_by_label[u] for u in top.adjacency[s] if u in term_set]
            cand = _bead_lattice(norm, anchors, rcap, [seed[s]])
            if budget.charge(len(cand)):
                fixed = sum(
                    ceil_eps(distance(norm, terminals_by_label[a], terminals_by_label[b]))
                    for a, b in top.edges
                    if s not in (a, b)
                )
                local = _eval_candidates(norm, cand, anchors)
                k = int(np.lexsort((cand[:, 1], cand[:, 0], local))[0])
                best = 1 - n + fixed + int(round(local[k]))
                best_pos = dict(terminals_by_label)
                best_pos[s] = (cand[k, 0], cand[k, 1])
                exhausted = True
        else:
            s0, s1 = beads
            if (s0, s1) in top.edges or (s1, s0) in top.edges:
                a0 = [terminals_by_label[u] for u in top.adjacency[s0] if u in term_set]
                a1 = [terminals_by_label[u] for u in top.adjacency[s1] if u in term_set]
                c0 = _bead_lattice(norm, a0, rcap, [seed[s0]])
                c1 = _bead_lattice(norm, a1, rcap, [seed[s1]])
                if budget.charge(len(c0) * len(c1)):
                    f0 = _eval_candidates(norm, c0, a0)
                    f1 = _eval_candidates(norm, c1, a1)
                    fixed = sum(
                        ceil_eps(distance(norm, terminals_by_label[a], terminals_by_label[b]))
                        for a, b in top.edges
                        if s0 not in (a, b) and s1 not in (a, b)
                    )
                    best_val = math.inf
                    best_ij = (0, 0)
                    block = max(1, int(2e6 // max(len(c1), 1)))
                    for lo in range(0, len(c0), block):
                        hi = min(lo + block, len(c0))
                        if norm.is_euclidean:
                            dm = np.hypot(
                                c0[lo:hi, 0:1] - c1[None, :, 0],
                                c0[lo:hi, 1:2] - c1[None, :, 1],
                            )
                        else:
                            dm = np.stack(
                                [distance_to_many(norm, c1[jj], c0[lo:hi]) for jj in range(len(c1))],
                                axis=1,
                            )
                        tot = f0[lo:hi, None] + f1[None, :] + _ceil_arr(dm)
                        k = int(np.argmin(tot))
                        i, j = divmod(k, tot.shape[1])
                        if tot[i, j] < best_val:
                            best_val = tot[i, j]
                            best_ij = (lo + i, j)
                    best = 1 - n + fixed + int(round(best_val))
                    best_pos = dict(terminals_by_label)
                    best_pos[s0] = (c0[best_ij[0], 0], c0[best_ij[0], 1])
                    best_pos[s1] = (c1[best_ij[1], 0], c1[best_ij[1], 1])
                    exhausted = True

    ls_pos, ls_beads = _local_search(top, terminals_by_label, norm, rcap, budget, rng)
    if best is None or ls_beads < best:
        best, best_pos = ls_beads, ls_pos
    return best_pos, int(best), exhausted


def mspt_search(
    terminals,
    norm: Norm = EUCLIDEAN,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> OracleResult:
    """General oracle: enumerate added-point topologies, optimize placements.

    n = 3 delegates to the exact lattice oracle.  The zero-added-point case
    is solved exactly by a minimum-ceiling spanning tree.  Status is
    ExhaustiveVerified only when every topology's candidate lattice was
    fully enumerated within budget.
    """
    n = len(terminals)
    if n < 2:
        raise UsageError("need at least 2 terminals")
    pts = [Point(p[0], p[1]) for p in terminals]
    if n == 2:
        tree = _two_terminal_tree(pts, norm)
        beads = bead_count(tree).bead_count
        return OracleResult(tree, beads, "ExhaustiveVerified", {"topologies": 1, "placements": 0})
    if n == 3:
        return mspt_exact3(pts, norm)

    labels = [f"t{i}" for i in range(n)]
    by_label = {lab: (pts[i].x, pts[i].y) for i, lab in enumerate(labels)}
    rcap = ceil_eps(max(distance(norm, p, q) for p in pts for q in pts)) + 1
    bud = _Budget(budget)
    rng = stream(seed, 0)

    best_tree = _min_ceiling_spanning_tree(pts, norm)
    best_beads = bead_count(best_tree).bead_count
    all_exhausted = True  # k=0 handled exactly above

    tops = enumerate_steiner_topologies(labels)
    allow_lattice = n <= 4
    for top in tops:
        if not top.steiners:
            continue  # spanning trees solved exactly by Kruskal
        pos, beads, exhausted = _optimize_topology(top, by_label, norm, rcap, bud, rng, allow_lattice)
        if not exhausted:
            all_exhausted = False
        if beads < best_beads:
            best_beads = beads
            best_tree = EmbeddedTree(top, {k: Point(*v) for k, v in pos.items()}, norm)

    status = "ExhaustiveVerified" if all_exhausted else "BestEffort"
    trace = {"topologies": len(tops), "placements": bud.used, "radiusCap": rcap}
    return OracleResult(best_tree, int(best_beads), status, trace)


def minimize_beads_fixed_topology(
    topology: Topology,
    terminals,
    norm: Norm = EUCLIDEAN,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> EmbeddedTree:
    """Minimize the bead count over added-point positions for one topology."""
    n = len(terminals)
    labels = sorted(topology.terminals)
    if len(labels) != n:
        raise StructuralError(
            f"topology has {len(labels)} terminals but {n} were supplied"
        )
    pts = [Point(p[0], p[1]) for p in terminals]
    by_label = {lab: (pts[i].x, pts[i].y) for i, lab in enumerate(labels)}
    rcap = ceil_eps(max(distance(norm, p, q) for p in pts for q in pts)) + 1 if n >= 2 else 1
    bud = _Budget(budget)
    rng = stream(seed, 0)
    pos, _, _ = _optimize_topology(topology, by_label, norm, rcap, bud, rng, allow_lattice=len(topology.steiners) <= 2)
    return EmbeddedTree(topology, {k: Point(*v) for k, v in pos.items()}, norm)


@dataclass(frozen=True)
class BoundReport:
    """Performance-difference bound check for one instance."""

    n: int
    smt_beads: int
    mst_beads: int
    oracle_beads: int
    oracle_status: str
    gap: int
    j: int
    c: int
    bound_2n4: bool
    bound_c: bool
    eq_corollary: bool
    para_bound: bool | None
    ratio_bound: float | None

    @property
    def violations(self) -> list[str]:
        out = []
        if not self.bound_2n4:
            out.append("bound2n4")
        if not self.bound_c:
            out.append("boundC")
        if not self.eq_corollary:
            out.append("eqCorollary")
        if self.para_bound is False:
            out.append("paraBound")
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "smtBeads": self.smt_beads,
            "mstBeads": self.mst_beads,
            "oracleBeads": self.oracle_beads,
            "oracleStatus": self.oracle_status,
            "gap": self.gap,
            "j": self.j,
            "c": self.c,
            "bound2n4": self.bound_2n4,
            "boundC": self.bound_c,
            "eqCorollary": self.eq_corollary,
            "paraBound": self.para_bound,
            "ratioBound": self.ratio_bound,
            "violations": self.violations,
        }


def bound_report(
    terminals,
    norm: Norm = EUCLIDEAN,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> BoundReport:
    """Run both heuristics and the oracle; evaluate every applicable bound."""
    n = len(terminals)
    smt = smt_heuristic(terminals, norm)
    mst = mst_heuristic(terminals, norm)
    oracle = mspt_search(terminals, norm, budget=budget, seed=seed)

    gap = smt.report.bead_count - oracle.best_beads
    j = smt.report.integer_edge_count
    c = smt.report.full_component_count
    non_integer = len(smt.report.per_edge_ceilings) - j
    para = None
    if not norm.is_euclidean and classify(norm).tag == PARALLELOGRAM and n == 3:
        para = gap <= 1
    ratio = 1.0 + (2 * n - 4) / oracle.best_beads if oracle.best_beads > 0 else None
    return BoundReport(
        n=n,
        smt_beads=smt.report.bead_count,
        mst_beads=mst.report.bead_count,
        oracle_beads=oracle.best_beads,
        oracle_status=oracle.status,
        gap=gap,
        j=j,
        c=c,
        bound_2n4=gap <= max(2 * n - 4 - j, 0),
        bound_c=gap <= 2 * n - c - 3,
        eq_corollary=(non_integer > 1) or (gap == 0),
        para_bound=para,
        ratio_bound=ratio,
    )
