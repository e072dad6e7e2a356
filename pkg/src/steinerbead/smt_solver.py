"""Steiner minimal trees at desk scale.

Euclidean SMTs are found by enumerating all full topologies ((2n-5)!! of
them) and relaxing Steiner positions by repeated Fermat-point re-placement.
A cheap low-tolerance pass ranks the topologies, then the few contenders are
polished to 1e-10.  Degenerate topologies collapse via zero-length edges
rather than being rejected.

Three-terminal SMTs under parallelogram norms use the closed form: the
Steiner point has the median diagonal-coordinates of the terminals, and the
tree length equals half the norm-perimeter of the smallest enclosing
parallelogram with sides parallel to the ball diagonals.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError, UsageError
from .geometry import Point, line_intersect
from .norms import EUCLIDEAN, PARALLELOGRAM, BallClass, Norm, classify, distance, gauge
from .tree_core import EmbeddedTree, Topology

_SQ3_2 = math.sqrt(3.0) / 2.0

QUICK_TOL = 1e-7
QUICK_SWEEPS = 2000
POLISH_TOL = 1e-10
POLISH_SWEEPS = 10**5
DEGENERATE_EDGE = 1e-9


def _fermat_raw(p, q, r):
    """Fermat point of a triangle as a plain float pair (exact construction)."""
    for u, v in ((p, q), (q, r), (r, p)):
        if abs(u[0] - v[0]) < 1e-15 and abs(u[1] - v[1]) < 1e-15:
            return (u[0], u[1])
    pts = (p, q, r)
    for i in range(3):
        a = pts[i]
        b = pts[(i + 1) % 3]
        c = pts[(i + 2) % 3]
        ux, uy = b[0] - a[0], b[1] - a[1]
        vx, vy = c[0] - a[0], c[1] - a[1]
        du = math.hypot(ux, uy)
        dv = math.hypot(vx, vy)
        if ux * vx + uy * vy <= (-0.5 + 1e-12) * du * dv:
            return (a[0], a[1])

    def apex(u, v, w):
        mx, my = (u[0] + v[0]) / 2.0, (u[1] + v[1]) / 2.0
        dx, dy = v[0] - u[0], v[1] - u[1]
        px, py = -dy * _SQ3_2, dx * _SQ3_2
        if dx * (w[1] - u[1]) - dy * (w[0] - u[0]) > 0.0:
            return (mx - px, my - py)
        return (mx + px, my + py)

    ea = apex(q, r, p)
    eb = apex(p, r, q)
    x = line_intersect(p, (ea[0] - p[0], ea[1] - p[1]), q, (eb[0] - q[0], eb[1] - q[1]))
    if x is None:  # ultra-thin triangle: fall back to the best vertex
        return min(
            ((a[0], a[1]) for a in pts),
            key=lambda z: sum(math.hypot(z[0] - b[0], z[1] - b[1]) for b in pts),
        )
    return x


def fermat_point(a, b, c) -> Point:
    """Point minimizing the sum of Euclidean distances to three points."""
    x = _fermat_raw(
        (float(a[0]), float(a[1])), (float(b[0]), float(b[1])), (float(c[0]), float(c[1]))
    )
    return Point(x[0], x[1])


def _geometric_median(points, start):
    """Weiszfeld iteration with vertex handling, for small point sets."""
    x, y = start
    for _ in range(500):
        wx = wy = wsum = 0.0
        vertex = None
        for p in points:
            d = math.hypot(x - p[0], y - p[1])
            if d < 1e-14:
                vertex = p
                continue
            w = 1.0 / d
            wx += p[0] * w
            wy += p[1] * w
            wsum += w
        if vertex is not None:
            gx = gy = 0.0
            for p in points:
                d = math.hypot(vertex[0] - p[0], vertex[1] - p[1])
                if d > 1e-14:
                    gx += (p[0] - vertex[0]) / d
                    gy += (p[1] - vertex[1]) / d
            if math.hypot(gx, gy) <= 1.0 + 1e-12:
                return vertex
            x, y = vertex[0] + gx * 1e-9, vertex[1] + gy * 1e-9
            continue
        nx, ny = wx / wsum, wy / wsum
        if math.hypot(nx - x, ny - y) < 1e-13:
            return (nx, ny)
        x, y = nx, ny
    return (x, y)


def _steiner_prefix(labels) -> str:
    p = "s"
    while any(l.startswith(p) and l[len(p):].isdigit() for l in labels):
        p += "s"
    return p


def enumerate_full_topologies(labels) -> list[Topology]:
    """All full topologies on the given terminal labels, in a fixed order.

    Terminals are taken in sorted order; terminal k >= 3 is attached by
    splitting each existing edge in turn (yielding the (2n-5)!! classic
    count).  The list index is the topology rank used everywhere else.
    """
    labels = sorted(str(l) for l in labels)
    n = len(labels)
    if n < 2:
        raise UsageError("need at least 2 terminals")
    if n == 2:
        return [Topology(labels, [], [tuple(labels)])]
    sp = _steiner_prefix(labels)
    steiners = [f"{sp}{i}" for i in range(n - 2)]
    results: list[Topology] = []

    def grow(k: int, edges: list[tuple[str, str]]):
        if k == n:
            results.append(Topology(labels, steiners, edges))
            return
        s, t = steiners[k - 2], labels[k]
        for i in range(len(edges)):
            a, b = edges[i]
            grow(k + 1, edges[:i] + edges[i + 1 :] + [(a, s), (b, s), (t, s)])

    grow(3, [(labels[0], sp + "0"), (labels[1], sp + "0"), (labels[2], sp + "0")])
    return results


def _compile(top: Topology, pos_of_terminal) -> tuple[list, list, list]:
    """Index-based view of a full topology for the relaxation inner loop."""
    svars = sorted(top.steiners)
    sidx = {s: i for i, s in enumerate(svars)}
    nbrs = []
    for s in svars:
        row = []
        for u in top.adjacency[s]:
            if u in sidx:
                row.append((True, sidx[u]))
            else:
                row.append((False, pos_of_terminal[u]))
        nbrs.append(row)
    edges = []
    for a, b in top.edges:
        ea = (True, sidx[a]) if a in sidx else (False, pos_of_terminal[a])
        eb = (True, sidx[b]) if b in sidx else (False, pos_of_terminal[b])
        edges.append((ea, eb))
    return svars, nbrs, edges


def _total_length(spos, edges) -> float:
    total = 0.0
    for (ka, ia), (kb, ib) in edges:
        pa = spos[ia] if ka else ia  # non-Steiner entries hold the position itself
        pb = spos[ib] if kb else ib
        total += math.hypot(pa[0] - pb[0], pa[1] - pb[1])
    return total


def _relax(tpos, nbrs, edges, tol: float, max_sweeps: int):
    """Gauss-Seidel Fermat re-placement until max movement < tol.

    Falls back to a golden-section step along the Jacobi displacement when
    the movement stops decreasing, and collapses persistently near-fused
    Steiner pairs to the geometric median of their outer neighbors.
    """
    k = len(nbrs)
    if k == 0:
        return [], _total_length([], edges), True, 0
    spos = _average_start(tpos, nbrs)

    prev_move = math.inf
    flat = 0
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        move = 0.0
        for i, row in enumerate(nbrs):
            pts = [(spos[idx] if st else idx) for st, idx in row]
            new = _fermat_raw(pts[0], pts[1], pts[2])
            d = math.hypot(new[0] - spos[i][0], new[1] - spos[i][1])
            if d > move:
                move = d
            spos[i] = new
        if move < tol:
            return spos, _total_length(spos, edges), True, sweeps
        if move >= prev_move - 1e-16:
            flat += 1
            if flat >= 100:
                spos = _golden_step(spos, nbrs, edges)
                flat = 0
        else:
            flat = 0
        prev_move = move
        if sweeps % 300 == 0:
            spos = _collapse_fused(spos, nbrs)
    return spos, _total_length(spos, edges), False, sweeps


def _average_start(tpos, nbrs):
    cx = sum(p[0] for p in tpos) / len(tpos)
    cy = sum(p[1] for p in tpos) / len(tpos)
    spos = [(cx, cy)] * len(nbrs)
    for _ in range(10):
        nxt = []
        for row in nbrs:
            xs = ys = 0.0
            for st, idx in row:
                p = spos[idx] if st else idx
                xs += p[0]
                ys += p[1]
            nxt.append((xs / 3.0, ys / 3.0))
        spos = nxt
    return spos


def _golden_step(spos, nbrs, edges):
    targets = []
    for row in nbrs:
        pts = [(spos[idx] if st else idx) for st, idx in row]
        targets.append(_fermat_raw(pts[0], pts[1], pts[2]))
    d = [(t[0] - s[0], t[1] - s[1]) for t, s in zip(targets, spos)]

    def at(t):
        return [(s[0] + t * dd[0], s[1] + t * dd[1]) for s, dd in zip(spos, d)]

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 2.0
    c = hi - inv_phi * (hi - lo)
    e = lo + inv_phi * (hi - lo)
    fc = _total_length(at(c), edges)
    fe = _total_length(at(e), edges)
    for _ in range(90):
        if fc < fe:
            hi, e, fe = e, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = _total_length(at(c), edges)
        else:
            lo, c, fc = c, e, fe
            e = lo + inv_phi * (hi - lo)
            fe = _total_length(at(e), edges)
    return at((lo + hi) / 2.0)


def _collapse_fused(spos, nbrs):
    """Snap Steiner pairs closer than 1e-5 to their joint geometric median."""
    for i, row in enumerate(nbrs):
        for st, idx in row:
            if st and idx > i and math.hypot(spos[i][0] - spos[idx][0], spos[i][1] - spos[idx][1]) < 1e-5:
                outer = []
                for st2, idx2 in nbrs[i] + nbrs[idx]:
                    if st2 and idx2 in (i, idx):
                        continue
                    outer.append(spos[idx2] if st2 else idx2)
                if len(outer) == 4:
                    med = _geometric_median(outer, spos[i])
                    spos = list(spos)
                    spos[i] = med
                    spos[idx] = med
    return spos


@dataclass(frozen=True)
class SmtResult:
    """Best tree over all enumerated full topologies, plus ranking evidence."""

    tree: EmbeddedTree
    length: float
    topology_rank: int
    degenerate_edges: tuple[tuple[str, str], ...]
    runner_up_gap: float
    topology_lengths: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "topologyRank": self.topology_rank,
            "degenerateEdges": [list(e) for e in self.degenerate_edges],
            "runnerUpGap": self.runner_up_gap,
        }


def solve_full_topology(
    terminals,
    topology: Topology,
    labels=None,
    tol: float = POLISH_TOL,
    max_sweeps: int = POLISH_SWEEPS,
) -> tuple[EmbeddedTree, float, bool]:
    """Relax Steiner positions of one full topology; returns (tree, length, converged)."""
    topology.require_full()
    pts = [(float(p[0]), float(p[1])) for p in terminals]
    if labels is None:
        labels = [f"t{i}" for i in range(len(pts))]
    if set(labels) != set(topology.terminals):
        raise UsageError("topology terminals do not match the supplied labels")
    pos_of = {lab: pts[i] for i, lab in enumerate(labels)}
    svars, nbrs, edges = _compile(topology, pos_of)
    spos, length, converged, _ = _relax(pts, nbrs, edges, tol, max_sweeps)
    positions = {lab: Point(*pos_of[lab]) for lab in topology.terminals}
    positions.update({s: Point(*spos[i]) for i, s in enumerate(svars)})
    return EmbeddedTree(topology, positions, EUCLIDEAN), length, converged


def euclidean_smt(terminals, max_n: int = 8) -> SmtResult:
    """Shortest Steiner tree over all full topologies (Euclidean norm).

    Runs a quick low-tolerance pass on every topology, then polishes the
    leaders to 1e-10.  Ties are broken by the smaller topology rank.
    """
    pts = [(float(p[0]), float(p[1])) for p in terminals]
    uniq: list[tuple[float, float]] = []
    for p in pts:
        if any(math.hypot(p[0] - q[0], p[1] - q[1]) <= 1e-12 for q in uniq):
            warnings.warn("coincident terminals collapsed", stacklevel=2)
            continue
        uniq.append(p)
    pts = uniq
    n = len(pts)
    if n < 2:
        raise UsageError("need at least 2 distinct terminals")
    if n > max_n:
        raise CapacityError(f"euclidean_smt supports n <= {max_n}, got {n}")

    labels = [f"t{i}" for i in range(n)]
    topologies = enumerate_full_topologies(labels)
    pos_of = {lab: pts[i] for i, lab in enumerate(labels)}

    compiled = [_compile(top, pos_of) for top in topologies]
    quick: list[tuple[float, list]] = []
    for svars, nbrs, edges in compiled:
        spos, length, _, _ = _relax(pts, nbrs, edges, QUICK_TOL, QUICK_SWEEPS)
        quick.append((length, spos))

    best_quick = min(ln for ln, _ in quick)
    order = sorted(range(len(topologies)), key=lambda r: (quick[r][0], r))
    polish_set = {r for r in order[:3]} | {r for r in order if quick[r][0] <= best_quick + 1e-3}

    lengths = [ln for ln, _ in quick]
    final_pos: dict[int, list] = {r: quick[r][1] for r in range(len(topologies))}
    for r in sorted(polish_set):
        svars, nbrs, edges = compiled[r]
        spos, length, _, _ = _relax(pts, nbrs, edges, POLISH_TOL, POLISH_SWEEPS)
        lengths[r] = length
        final_pos[r] = spos

    winner = min(range(len(topologies)), key=lambda r: (lengths[r], r))
    top = topologies[winner]
    svars = sorted(top.steiners)
    positions = {lab: Point(*pos_of[lab]) for lab in labels}
    positions.update({s: Point(*final_pos[winner][i]) for i, s in enumerate(svars)})
    tree = EmbeddedTree(top, positions, EUCLIDEAN)
    degenerate = tuple(
        e for e in top.edges if tree.edge_length(e) < DEGENERATE_EDGE
    )
    others = [lengths[r] for r in range(len(topologies)) if r != winner]
    gap = min(others) - lengths[winner] if others else math.inf
    return SmtResult(
        tree=tree,
        length=lengths[winner],
        topology_rank=winner,
        degenerate_edges=degenerate,
        runner_up_gap=gap,
        topology_lengths=tuple(lengths),
    )


def min_steiner_angle(tree: EmbeddedTree, contract_tol: float = 1e-7) -> float:
    """Smallest angle between edges meeting at a Steiner node, in radians.

    Degenerate edges are contracted first; a tree with no Steiner nodes (or
    all angles undefined) reports pi.
    """
    from .tree_core import contract_zero_edges
    from .geometry import angle_between, sub

    t = contract_zero_edges(tree, contract_tol)
    best = math.pi
    for s in t.topology.steiners:
        p = t.positions[s]
        nb = t.topology.adjacency[s]
        for i in range(len(nb)):
            u = sub(t.positions[nb[i]], p)
            for j in range(i + 1, len(nb)):
                v = sub(t.positions[nb[j]], p)
                best = min(best, angle_between(u, v))
    return best


def norm_fermat_point(norm: Norm, a, b, c) -> Point:
    """Point minimizing the summed norm-distance to three points.

    Euclidean norms use the exact construction; polygonal norms solve the
    equivalent linear program over the ball's supporting half-planes.
    """
    if norm.is_euclidean:
        return fermat_point(a, b, c)
    e, cc = norm._edge_arrays
    m = len(cc)
    # variables: x0, x1, z0, z1, z2 ; minimize z0+z1+z2
    # constraint: L_e(x - t_k) <= z_k  =>  L_e(x) - z_k <= L_e(t_k)
    rows = []
    rhs = []
    for k, t in enumerate((a, b, c)):
        for i in range(m):
            lx, ly = e[i, 1] / cc[i], -e[i, 0] / cc[i]
            row = [lx, ly, 0.0, 0.0, 0.0]
            row[2 + k] = -1.0
            rows.append(row)
            rhs.append(lx * t[0] + ly * t[1])
    res = linprog(
        c=[0.0, 0.0, 1.0, 1.0, 1.0],
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None), (None, None), (0, None), (0, None), (0, None)],
        method="highs",
    )
    if not res.success:
        raise UsageError(f"norm Fermat LP failed: {res.message}")
    return Point(res.x[0], res.x[1])


@dataclass(frozen=True)
class TessellationResult:
    """Whether the three norm balls around the terminals tile at the point."""

    point: Point
    radii: tuple[float, float, float]
    is_tessellation: bool


def _diagonal_basis(norm: Norm) -> tuple[BallClass, Point, Point]:
    ball = classify(norm)
    if ball.tag != PARALLELOGRAM:
        raise UsageError("operation requires a parallelogram unit ball")
    v1 = ball.major_diagonal
    v2 = ball.minor_diagonal
    # scale the unit directions out to the ball boundary: true diagonal vertices
    w1 = Point(v1.x / gauge(norm, v1), v1.y / gauge(norm, v1))
    w2 = Point(v2.x / gauge(norm, v2), v2.y / gauge(norm, v2))
    return ball, w1, w2


def _to_basis(w1: Point, w2: Point, p) -> tuple[float, float]:
    det = w1.x * w2.y - w1.y * w2.x
    return ((p[0] * w2.y - p[1] * w2.x) / det, (w1.x * p[1] - w1.y * p[0]) / det)


def parallelogram_smt3(norm: Norm, t1, t2, t3) -> tuple[EmbeddedTree, TessellationResult]:
    """Closed-form three-terminal SMT under a parallelogram norm.

    The Steiner point takes the coordinate-wise median in the ball-diagonal
    basis; the distance sum equals half the perimeter of the enclosing
    diagonalized parallelogram.
    """
    _, w1, w2 = _diagonal_basis(norm)
    pts = [Point(t[0], t[1]) for t in (t1, t2, t3)]
    coords = [_to_basis(w1, w2, p) for p in pts]
    sa = sorted(c[0] for c in coords)[1]
    sb = sorted(c[1] for c in coords)[1]
    s = Point(sa * w1.x + sb * w2.x, sa * w1.y + sb * w2.y)
    labels = ["t0", "t1", "t2"]
    top = Topology(labels, ["s0"], [(l, "s0") for l in labels])
    positions = {lab: p for lab, p in zip(labels, pts)}
    positions["s0"] = s
    tree = EmbeddedTree(top, positions, norm)
    radii = tuple(distance(norm, s, p) for p in pts)
    ok = True
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(radii[i] + radii[j] - distance(norm, pts[i], pts[j])) > 1e-9:
                ok = False
    return tree, TessellationResult(s, radii, ok)


def enclosing_diagonalized_parallelogram(norm: Norm, terminals) -> tuple[tuple[Point, ...], float]:
    """Smallest terminal-enclosing parallelogram with ball-diagonal sides.

    Returns its four corners (counterclockwise in the diagonal basis) and
    half its perimeter measured in the norm.
    """
    if not terminals:
        raise UsageError("need at least one terminal")
    _, w1, w2 = _diagonal_basis(norm)
    coords = [_to_basis(w1, w2, p) for p in terminals]
    amin, amax = min(c[0] for c in coords), max(c[0] for c in coords)
    bmin, bmax = min(c[1] for c in coords), max(c[1] for c in coords)
    corners = tuple(
        Point(a * w1.x + b * w2.x, a * w1.y + b * w2.y)
        for a, b in ((amin, bmin), (amax, bmin), (amax, bmax), (amin, bmax))
    )
    # in the (w1, w2) basis the gauge is |a| + |b|, so the half perimeter is
    # just the coordinate spans
    half = (amax - amin) + (bmax - bmin)
    return corners, half
