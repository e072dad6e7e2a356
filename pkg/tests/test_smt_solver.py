from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinerbead.errors import UsageError
from steinerbead.geometry import dist, rotate
from steinerbead.norms import EUCLIDEAN, distance, gauge
from steinerbead.smt_solver import (
    enclosing_diagonalized_parallelogram,
    enumerate_full_topologies,
    euclidean_smt,
    fermat_point,
    min_steiner_angle,
    norm_fermat_point,
    parallelogram_smt3,
    solve_full_topology,
)

from conftest import random_parallelogram_norm, regular_ball

SQ3 = math.sqrt(3.0)


def mst_length(pts) -> float:
    """Prim's algorithm on the complete terminal graph — reference upper bound."""
    n = len(pts)
    seen = {0}
    total = 0.0
    while len(seen) < n:
        best = min(
            (dist(pts[i], pts[j]), j)
            for i in seen
            for j in range(n)
            if j not in seen
        )
        total += best[0]
        seen.add(best[1])
    return total


def grid_min_sum(fn, lo, hi, steps=251):
    xs = np.linspace(lo[0], hi[0], steps)
    ys = np.linspace(lo[1], hi[1], steps)
    best = math.inf
    arg = None
    for x in xs:
        for y in ys:
            v = fn((x, y))
            if v < best:
                best, arg = v, (x, y)
    return best, arg


class TestFermatPoint:
    def test_equilateral_center(self):
        pts = [(0, 0), (1, 0), (0.5, SQ3 / 2)]
        f = fermat_point(*pts)
        assert f.x == pytest.approx(0.5, abs=1e-12)
        assert f.y == pytest.approx(SQ3 / 6, abs=1e-12)

    def test_wide_angle_collapses_to_vertex(self):
        # angle at the middle point is far beyond 120 degrees
        f = fermat_point((-5, 0), (0, 0.1), (5, 0))
        assert f.x == pytest.approx(0.0, abs=1e-9)
        assert f.y == pytest.approx(0.1, abs=1e-9)

    def test_against_grid_scan(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            pts = [tuple(rng.uniform(-3, 3, 2)) for _ in range(3)]
            f = fermat_point(*pts)
            got = sum(math.dist(f, p) for p in pts)
            ref, _ = grid_min_sum(
                lambda x: sum(math.dist(x, p) for p in pts), (-3.5, -3.5), (3.5, 3.5)
            )
            assert got <= ref + 1e-4

    def test_120_degree_property_inside(self):
        pts = [(0, 0), (4, 0), (1, 3)]
        f = fermat_point(*pts)
        angles = []
        for a, b in itertools.combinations(pts, 2):
            u = (a[0] - f.x, a[1] - f.y)
            v = (b[0] - f.x, b[1] - f.y)
            cosv = (u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))
            angles.append(math.degrees(math.acos(max(-1, min(1, cosv)))))
        assert all(a == pytest.approx(120.0, abs=1e-6) for a in angles)


class TestTopologyEnumeration:
    @pytest.mark.parametrize("n,count", [(3, 1), (4, 3), (5, 15), (6, 105)])
    def test_double_factorial_counts(self, n, count):
        tops = enumerate_full_topologies([f"t{i}" for i in range(n)])
        assert len(tops) == count
        for top in tops:
            assert top.is_full
            assert len(top.steiners) == n - 2
            assert len(top.edges) == 2 * n - 3

    def test_pairwise_distinct(self):
        from steinerbead.tree_core import canonical_topology_key

        tops = enumerate_full_topologies([f"t{i}" for i in range(5)])
        assert len({canonical_topology_key(t) for t in tops}) == 15

    def test_two_labels_give_the_single_edge(self):
        tops = enumerate_full_topologies(["a", "b"])
        assert len(tops) == 1
        assert tops[0].edges == (("a", "b"),)
        assert tops[0].steiners == ()


class TestEuclideanSmt:
    def test_equilateral_triangle(self):
        r = euclidean_smt([(0, 0), (1, 0), (0.5, SQ3 / 2)])
        assert r.length == pytest.approx(SQ3, abs=1e-9)

    def test_unit_square(self):
        r = euclidean_smt([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert r.length == pytest.approx(1 + SQ3, abs=1e-9)
        assert len(r.tree.topology.steiners) == 2

    def test_four_terminal_cross(self):
        # the two Steiner points sit on the long axis at (+-1/2, 0)
        pts = [(1, SQ3 / 2), (1, -SQ3 / 2), (-1, SQ3 / 2), (-1, -SQ3 / 2)]
        r = euclidean_smt(pts)
        assert r.length == pytest.approx(5.0, abs=1e-9)  # five unit edges
        got = sorted((round(p.x, 6), round(p.y, 6)) for lab, p in r.tree.positions.items()
                     if lab in r.tree.topology.steiners)
        assert got[0][0] == pytest.approx(-0.5, abs=1e-8)
        assert got[1][0] == pytest.approx(0.5, abs=1e-8)
        assert abs(got[0][1]) < 1e-8 and abs(got[1][1]) < 1e-8

    def test_forced_alternate_topology_is_longer(self):
        pts = [(1, SQ3 / 2), (1, -SQ3 / 2), (-1, SQ3 / 2), (-1, -SQ3 / 2)]
        best = euclidean_smt(pts)
        labels = [f"t{i}" for i in range(4)]
        lengths = []
        for top in enumerate_full_topologies(labels):
            _, ln, _ = solve_full_topology(pts, top, labels)
            lengths.append(ln)
        lengths.sort()
        assert lengths[0] == pytest.approx(best.length, abs=1e-9)
        # the vertical pairing costs 3*sqrt(3)
        assert lengths[1] == pytest.approx(3 * SQ3, abs=1e-9)
        assert best.runner_up_gap == pytest.approx(lengths[1] - lengths[0], abs=1e-8)

    def test_never_longer_than_mst(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            n = int(rng.integers(3, 6))
            pts = [tuple(rng.uniform(0, 4, 2)) for _ in range(n)]
            r = euclidean_smt(pts)
            assert r.length <= mst_length(pts) + 1e-9

    def test_steiner_ratio_lower_bound(self):
        # SMT is never shorter than (sqrt(3)/2) * MST in the plane
        rng = np.random.default_rng(29)
        for _ in range(25):
            n = int(rng.integers(3, 6))
            pts = [tuple(rng.uniform(0, 4, 2)) for _ in range(n)]
            r = euclidean_smt(pts)
            assert r.length >= SQ3 / 2 * mst_length(pts) - 1e-9

    @given(
        theta=st.floats(min_value=0, max_value=2 * math.pi, allow_nan=False),
        dx=st.floats(min_value=-20, max_value=20, allow_nan=False),
        dy=st.floats(min_value=-20, max_value=20, allow_nan=False),
    )
    @settings(max_examples=40, deadline=None)
    def test_rigid_motion_invariance(self, theta, dx, dy):
        pts = [(0, 0), (3, 0.5), (1, 2.5), (4, 3)]
        base = euclidean_smt(pts).length
        moved = []
        for p in pts:
            q = rotate(p, theta)
            moved.append((q[0] + dx, q[1] + dy))
        assert euclidean_smt(moved).length == pytest.approx(base, rel=1e-9, abs=1e-8)

    def test_scaling_homogeneity(self):
        pts = [(0, 0), (3, 0.5), (1, 2.5)]
        base = euclidean_smt(pts).length
        scaled = euclidean_smt([(7 * x, 7 * y) for x, y in pts]).length
        assert scaled == pytest.approx(7 * base, rel=1e-10)

    def test_steiner_angles_are_wide(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            pts = [tuple(rng.uniform(0, 5, 2)) for _ in range(5)]
            r = euclidean_smt(pts)
            assert min_steiner_angle(r.tree) >= 2 * math.pi / 3 - 1e-5

    def test_capacity(self):
        from steinerbead.errors import CapacityError

        pts = [(i, i % 3) for i in range(9)]
        with pytest.raises(CapacityError):
            euclidean_smt(pts, max_n=8)


class TestNormFermat:
    def test_euclidean_delegates(self):
        pts = [(0, 0), (4, 0), (1, 3)]
        a = norm_fermat_point(EUCLIDEAN, *pts)
        b = fermat_point(*pts)
        assert math.dist(a, b) < 1e-9

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_lp_matches_grid_scan(self, k):
        norm = regular_ball(k, phase=0.2)
        rng = np.random.default_rng(40 + k)
        for _ in range(5):
            pts = [tuple(rng.uniform(-2, 2, 2)) for _ in range(3)]
            f = norm_fermat_point(norm, *pts)
            got = sum(distance(norm, f, p) for p in pts)
            ref, _ = grid_min_sum(
                lambda x: sum(distance(norm, x, p) for p in pts), (-2.5, -2.5), (2.5, 2.5), steps=161
            )
            assert got <= ref + 1e-6


class TestParallelogramNorm:
    def test_l1_median_construction(self, l1_norm):
        pts = [(0, 0), (4, 1), (2, 3)]
        tree, tess = parallelogram_smt3(l1_norm, *pts)
        s = tree.positions["s0"]
        # L1 Fermat point is the coordinatewise median
        assert s.x == pytest.approx(2.0, abs=1e-12)
        assert s.y == pytest.approx(1.0, abs=1e-12)
        assert tess.is_tessellation

    def test_length_equals_half_enclosing_perimeter(self, l1_norm):
        rng = np.random.default_rng(53)
        for _ in range(50):
            pts = [tuple(rng.uniform(-4, 4, 2)) for _ in range(3)]
            tree, _ = parallelogram_smt3(l1_norm, *pts)
            _, half = enclosing_diagonalized_parallelogram(l1_norm, pts)
            assert tree.total_length() == pytest.approx(half, abs=1e-9)

    def test_random_balls_grid_optimality(self):
        rng = np.random.default_rng(59)
        for trial in range(5):
            norm = random_parallelogram_norm(rng)
            pts = [tuple(rng.uniform(-3, 3, 2)) for _ in range(3)]
            tree, _ = parallelogram_smt3(norm, *pts)
            got = tree.total_length()
            ref, _ = grid_min_sum(
                lambda x: sum(distance(norm, x, p) for p in pts), (-3.5, -3.5), (3.5, 3.5), steps=161
            )
            assert got <= ref + 1e-6

    def test_enclosing_contains_terminals(self, l1_norm):
        pts = [(0.0, 0.0), (3.0, 0.5), (1.0, 2.0), (-1.0, 1.0)]
        corners, half = enclosing_diagonalized_parallelogram(l1_norm, pts)
        assert half > 0
        # verify the half-perimeter against the norm lengths of two sides
        side_a = (corners[1].x - corners[0].x, corners[1].y - corners[0].y)
        side_b = (corners[3].x - corners[0].x, corners[3].y - corners[0].y)
        assert gauge(l1_norm, side_a) + gauge(l1_norm, side_b) == pytest.approx(half, abs=1e-9)

    def test_rejects_non_parallelogram(self, hexagon_norm):
        with pytest.raises(UsageError):
            parallelogram_smt3(hexagon_norm, (0, 0), (1, 0), (0, 1))
