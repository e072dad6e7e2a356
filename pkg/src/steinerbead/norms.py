"""Minkowski plane norms with Euclidean or polygonal unit balls.

A polygonal norm is described by its unit ball: a centrally symmetric,
strictly convex polygon listed counterclockwise, whose vertices by definition
lie at distance one.  Distances are Minkowski gauges of the difference
vector.  Balls are classified by shape (parallelogram, hexagon, other
polygon, or smooth) because several constructions branch on the class:
parallelogram norms admit a closed-form three-terminal solution built from
lines parallel to the ball's diagonals.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidNormError, UsageError
from .geometry import Point, cross, dist, sub, unit

_SYM_TOL = 1e-12

SMOOTH = "smooth"
PARALLELOGRAM = "parallelogram"
HEXAGON = "hexagon"
OTHER_POLYGON = "other-polygon"


@dataclass(frozen=True)
class Norm:
    """A plane norm, either Euclidean or given by a polygonal unit ball."""

    kind: str
    vertices: tuple[Point, ...] = ()

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "euclidean"

    @cached_property
    def _fan(self):
        """Vertex ring rolled to start at the smallest polar angle.

        Returns (angles, ring) where ``angles`` is sorted ascending and
        ``ring[i]``/``ring[i+1]`` bound the angular sector starting at
        ``angles[i]``.
        """
        angles = [math.atan2(v[1], v[0]) for v in self.vertices]
        start = min(range(len(angles)), key=angles.__getitem__)
        ring = self.vertices[start:] + self.vertices[:start]
        rolled = angles[start:] + angles[:start]
        return rolled, ring

    @cached_property
    def _edge_arrays(self):
        """Stacked (edge vector, offset) data for vectorized gauge evaluation."""
        v = np.asarray(self.vertices, dtype=float)
        e = np.roll(v, -1, axis=0) - v
        c = v[:, 0] * np.roll(v, -1, axis=0)[:, 1] - v[:, 1] * np.roll(v, -1, axis=0)[:, 0]
        return e, c

    def to_dict(self) -> dict:
        if self.is_euclidean:
            return {"kind": "euclidean"}
        return {"kind": "polygon", "vertices": [[v.x, v.y] for v in self.vertices]}


EUCLIDEAN = Norm("euclidean")


def polygon_norm(vertices: Sequence[Sequence[float]]) -> Norm:
    """Build and validate a polygonal norm from unit-ball vertices.

    The polygon must have an even number (at least four) of counterclockwise,
    strictly convex vertices with v[i + m] == -v[i] for m = len/2.
    """
    pts = tuple(Point(p[0], p[1]) for p in vertices)
    m = len(pts)
    if m < 4 or m % 2 != 0:
        raise InvalidNormError(f"polygon ball needs an even vertex count >= 4, got {m}")
    half = m // 2
    for i in range(half):
        opp = pts[i + half]
        if abs(opp.x + pts[i].x) > _SYM_TOL or abs(opp.y + pts[i].y) > _SYM_TOL:
            raise InvalidNormError(
                f"ball is not centrally symmetric: vertex {i + half} is not the negation of vertex {i}"
            )
    for i in range(m):
        a, b, c = pts[i], pts[(i + 1) % m], pts[(i + 2) % m]
        turn = cross(sub(b, a), sub(c, b))
        if turn <= _SYM_TOL:
            raise InvalidNormError(
                "ball vertices must be strictly convex in counterclockwise order "
                f"(turn at vertex {(i + 1) % m} is {turn:g})"
            )
    for i in range(m):
        if cross(pts[i], pts[(i + 1) % m]) <= _SYM_TOL:
            raise InvalidNormError("origin is not strictly interior to the ball")
    norm = Norm("polygon", pts)
    for i, v in enumerate(pts):
        g = support_gauge(norm, v)
        if abs(g - 1.0) > 1e-9:
            raise InvalidNormError(f"vertex {i} has gauge {g!r}, expected 1")
    return norm


def gauge(norm: Norm, v) -> float:
    """Norm of a vector.

    Polygonal balls are evaluated by locating the angular sector of ``v``
    among the vertices and intersecting the ray with that single edge.
    """
    if norm.is_euclidean:
        return math.hypot(v[0], v[1])
    vx, vy = float(v[0]), float(v[1])
    if vx == 0.0 and vy == 0.0:
        return 0.0
    angles, ring = norm._fan
    a = math.atan2(vy, vx)
    i = bisect.bisect_right(angles, a) - 1
    p = ring[i]          # works for i == -1 too: wraps to the last sector
    q = ring[(i + 1) % len(ring)]
    den = cross(p, q)
    return (vx * (q[1] - p[1]) - vy * (q[0] - p[0])) / den


def support_gauge(norm: Norm, v) -> float:
    """Norm of a vector via the maximum over all supporting half-planes.

    Redundant with :func:`gauge` by construction; kept as an independent
    check used by the test suite.
    """
    if norm.is_euclidean:
        return math.hypot(v[0], v[1])
    vx, vy = float(v[0]), float(v[1])
    best = 0.0
    ring = norm.vertices
    m = len(ring)
    for i in range(m):
        p, q = ring[i], ring[(i + 1) % m]
        val = (vx * (q[1] - p[1]) - vy * (q[0] - p[0])) / cross(p, q)
        if val > best:
            best = val
    return best


def distance(norm: Norm, p, q) -> float:
    """Distance between two points under the norm."""
    if norm.is_euclidean:
        return dist(p, q)
    return gauge(norm, sub(p, q))


def distance_to_many(norm: Norm, q, pts: np.ndarray) -> np.ndarray:
    """Distances from each row of ``pts`` (shape (k, 2)) to the point ``q``."""
    d = pts - np.asarray(q, dtype=float)
    if norm.is_euclidean:
        return np.hypot(d[:, 0], d[:, 1])
    e, c = norm._edge_arrays
    vals = (d[:, 0:1] * e[None, :, 1] - d[:, 1:2] * e[None, :, 0]) / c[None, :]
    return np.maximum(vals.max(axis=1), 0.0)


@dataclass(frozen=True)
class BallClass:
    """Shape class of a unit ball, with diagonal directions when they exist.

    For parallelogram balls ``major_diagonal``/``minor_diagonal`` are unit
    Euclidean direction vectors along the two diagonals, the major one being
    the Euclidean-longer diagonal (ties broken toward the lexicographically
    larger canonical direction).
    """

    tag: str
    major_diagonal: Point | None = None
    minor_diagonal: Point | None = None


def _canonical_direction(v) -> Point:
    u = unit(v)
    if u[1] < 0.0 or (u[1] == 0.0 and u[0] < 0.0):
        u = (-u[0], -u[1])
    return Point(u[0], u[1])


def classify(norm: Norm) -> BallClass:
    """Classify the unit ball of a norm."""
    if norm.is_euclidean:
        return BallClass(SMOOTH)
    m = len(norm.vertices)
    if m == 4:
        v0, v1 = norm.vertices[0], norm.vertices[1]
        d0, d1 = _canonical_direction(v0), _canonical_direction(v1)
        l0, l1 = math.hypot(*v0), math.hypot(*v1)
        if l0 > l1 or (l0 == l1 and (d0.x, d0.y) >= (d1.x, d1.y)):
            return BallClass(PARALLELOGRAM, d0, d1)
        return BallClass(PARALLELOGRAM, d1, d0)
    if m == 6:
        return BallClass(HEXAGON)
    return BallClass(OTHER_POLYGON)


def diagonal_lines(ball: BallClass, t) -> tuple[tuple[Point, Point], tuple[Point, Point]]:
    """Lines through ``t`` parallel to the major and minor ball diagonals.

    Each line is returned as a (point, direction) pair.
    """
    if ball.tag != PARALLELOGRAM:
        raise UsageError("diagonal lines are defined only for parallelogram balls")
    pt = Point(t[0], t[1])
    return (pt, ball.major_diagonal), (pt, ball.minor_diagonal)


def norm_from_dict(spec: dict) -> Norm:
    """Parse a norm from its JSON object form."""
    from .errors import SchemaError

    if not isinstance(spec, dict):
        raise SchemaError(f"norm must be an object, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind == "euclidean":
        extra = set(spec) - {"kind"}
        if extra:
            raise SchemaError(f"unknown norm fields: {sorted(extra)}")
        return EUCLIDEAN
    if kind == "polygon":
        extra = set(spec) - {"kind", "vertices"}
        if extra:
            raise SchemaError(f"unknown norm fields: {sorted(extra)}")
        verts = spec.get("vertices")
        if not isinstance(verts, list):
            raise SchemaError("polygon norm requires a 'vertices' list")
        try:
            return polygon_norm(verts)
        except (InvalidNormError, ValueError, TypeError, IndexError) as exc:
            raise SchemaError(f"invalid polygon ball: {exc}") from exc
    raise SchemaError(f"unknown norm kind: {kind!r}")
