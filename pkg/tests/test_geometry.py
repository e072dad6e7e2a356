from __future__ import annotations

import math

import numpy as np
import pytest

from steinerbead.geometry import (
    Point,
    angle_between,
    circle_circle,
    line_intersect,
    rotate,
    segment_intersections,
    unit,
    wrap_angle,
)


def test_point_is_a_plain_pair():
    p = Point(1.5, -2.0)
    assert p.x == p[0] == 1.5
    assert p.y == p[1] == -2.0
    assert tuple(p) == (1.5, -2.0)


def test_rotate_quarter_turn():
    q = rotate((1.0, 0.0), math.pi / 2)
    assert q[0] == pytest.approx(0.0, abs=1e-15)
    assert q[1] == pytest.approx(1.0, abs=1e-15)


def test_unit_has_length_one():
    u = unit((3.0, -4.0))
    assert math.hypot(*u) == pytest.approx(1.0, abs=1e-15)
    assert u[0] == pytest.approx(0.6)


def test_wrap_angle_range():
    for a in (-10.0, -math.pi, 0.0, 3.0, 12.0):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi + 1e-15
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-12)


def test_angle_between_is_symmetric_and_unsigned():
    assert angle_between((1, 0), (0, 2)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert angle_between((1, 0), (-1, 1e-9)) == pytest.approx(math.pi, abs=1e-6)


class TestCircleCircle:
    def test_classic_two_point_case(self):
        pts = circle_circle((0, 0), 5, (6, 0), 5)
        assert len(pts) == 2
        for p in pts:
            assert math.hypot(p[0], p[1]) == pytest.approx(5.0, abs=1e-12)
            assert math.hypot(p[0] - 6, p[1]) == pytest.approx(5.0, abs=1e-12)
        # symmetric about the center line
        assert pts[0][0] == pytest.approx(3.0, abs=1e-12)

    def test_tangent_single_point(self):
        pts = circle_circle((0, 0), 2, (5, 0), 3)
        assert len(pts) == 1
        assert pts[0][0] == pytest.approx(2.0, abs=1e-9)

    def test_disjoint_none(self):
        assert circle_circle((0, 0), 1, (5, 0), 1) == []
        # one disc strictly inside the other
        assert circle_circle((0, 0), 5, (1, 0), 1) == []

    def test_random_solutions_satisfy_both_equations(self):
        rng = np.random.default_rng(3)
        hits = 0
        for _ in range(200):
            c0 = rng.uniform(-5, 5, 2)
            c1 = rng.uniform(-5, 5, 2)
            r0 = rng.uniform(0.5, 6)
            r1 = rng.uniform(0.5, 6)
            for p in circle_circle(tuple(c0), r0, tuple(c1), r1):
                hits += 1
                assert math.hypot(p[0] - c0[0], p[1] - c0[1]) == pytest.approx(r0, abs=1e-8)
                assert math.hypot(p[0] - c1[0], p[1] - c1[1]) == pytest.approx(r1, abs=1e-8)
        assert hits > 100  # the draw ranges make intersections common


def test_line_intersect():
    p = line_intersect((0, 0), (1, 1), (0, 2), (1, -1))
    assert p[0] == pytest.approx(1.0)
    assert p[1] == pytest.approx(1.0)
    assert line_intersect((0, 0), (1, 0), (0, 1), (2, 0)) is None  # parallel


def test_segment_intersections_endpoint_touch():
    hits = segment_intersections((0, 0), (2, 0), (1, 0), (1, 5))
    assert len(hits) == 1
    assert hits[0][0] == pytest.approx(1.0)
    assert segment_intersections((0, 0), (1, 0), (3, 0), (4, 1)) == []
