"""Plane geometry kernels on plain float pairs.

Points are ``(x, y)`` tuples.  The public :class:`Point` type is a NamedTuple,
so user-facing values flow through these helpers unchanged.  Everything here
is allocation-light on purpose: the solvers call these functions in tight
loops.
"""
from __future__ import annotations

import math
from collections import namedtuple


class Point(namedtuple("Point", ["x", "y"])):
    """An immutable finite point in the plane."""

    __slots__ = ()

    def __new__(cls, x: float, y: float):
        fx, fy = float(x), float(y)
        if not (math.isfinite(fx) and math.isfinite(fy)):
            raise ValueError(f"point coordinates must be finite, got ({x!r}, {y!r})")
        return super().__new__(cls, fx, fy)


Vec = "tuple[float, float]"


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def scale(v, k):
    return (v[0] * k, v[1] * k)


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def norm2(v):
    return math.hypot(v[0], v[1])


def unit(v):
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise ZeroDivisionError("cannot normalize the zero vector")
    return (v[0] / n, v[1] / n)


def perp(v):
    """Counterclockwise quarter turn."""
    return (-v[1], v[0])


def midpoint(a, b):
    return ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)


def rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def wrap_angle(a):
    """Map an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def angle_between(u, v):
    """Unsigned angle in [0, pi] between two nonzero vectors."""
    return math.atan2(abs(cross(u, v)), dot(u, v))


def line_intersect(p, dp, q, dq):
    """Intersection of lines p + t*dp and q + s*dq, or None if parallel."""
    den = cross(dp, dq)
    if abs(den) < 1e-14 * (norm2(dp) * norm2(dq) + 1e-30):
        return None
    t = cross(sub(q, p), dq) / den
    return (p[0] + t * dp[0], p[1] + t * dp[1])


def circle_circle(c0, r0, c1, r1, tangent_tol=1e-9):
    """Intersection points of two circles.

    Near-tangent configurations (squared chord offset within ``tangent_tol``
    of zero, relatively) are snapped to a single touching point so that
    exact-contact geometry built from integer radii is not lost to rounding.
    """
    dx, dy = c1[0] - c0[0], c1[1] - c0[1]
    d = math.hypot(dx, dy)
    if d <= 1e-12 * max(r0, r1, 1.0):
        return []
    a = (d * d + r0 * r0 - r1 * r1) / (2.0 * d)
    h2 = r0 * r0 - a * a
    tol = tangent_tol * max(1.0, r0 * r0, r1 * r1, d * d)
    if h2 < -tol:
        return []
    ux, uy = dx / d, dy / d
    px, py = c0[0] + a * ux, c0[1] + a * uy
    if h2 <= tol:
        return [(px, py)]
    h = math.sqrt(h2)
    return [(px - h * uy, py + h * ux), (px + h * uy, py - h * ux)]


def segment_intersections(a0, a1, b0, b1, eps=1e-12):
    """Intersection points of two closed segments.

    Returns up to two points; collinear overlaps contribute the two endpoints
    of the shared sub-segment.
    """
    da = sub(a1, a0)
    db = sub(b1, b0)
    den = cross(da, db)
    scale_ref = max(norm2(da), norm2(db), 1e-30)
    if abs(den) > eps * scale_ref * scale_ref:
        t = cross(sub(b0, a0), db) / den
        s = cross(sub(b0, a0), da) / den
        slack = eps * 10.0
        if -slack <= t <= 1.0 + slack and -slack <= s <= 1.0 + slack:
            t = min(1.0, max(0.0, t))
            return [(a0[0] + t * da[0], a0[1] + t * da[1])]
        return []
    # Parallel: accept only genuinely collinear overlaps.
    if abs(cross(da, sub(b0, a0))) > eps * scale_ref * (norm2(sub(b0, a0)) + scale_ref):
        return []
    la = dot(da, da)
    if la <= eps * eps:
        return []
    t0 = dot(sub(b0, a0), da) / la
    t1 = dot(sub(b1, a0), da) / la
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    if lo > hi + eps:
        return []
    pts = [(a0[0] + lo * da[0], a0[1] + lo * da[1])]
    if hi - lo > eps:
        pts.append((a0[0] + hi * da[0], a0[1] + hi * da[1]))
    return pts
