from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from steinerbead.errors import CapacityError, StructuralError, UsageError
from steinerbead.mspt_oracle import (
    bound_report,
    minimize_beads_fixed_topology,
    mspt_exact3,
    mspt_search,
    mst_heuristic,
    smt_heuristic,
)
from steinerbead.tree_core import Topology, bead_count, ceil_eps

from conftest import regular_ball
from oracles import FIG9, grid_oracle3


class TestHeuristics:
    def test_figure_nine_counts(self):
        smt = smt_heuristic(FIG9)
        mst = mst_heuristic(FIG9)
        assert smt.report.bead_count == 10
        assert mst.report.bead_count == 10
        assert smt.heuristic_name == "smt"
        assert mst.heuristic_name == "mst"

    def test_two_terminals(self):
        r = smt_heuristic([(0, 0), (3.5, 0)])
        assert r.report.bead_count == 3
        assert mst_heuristic([(0, 0), (3.5, 0)]).report.bead_count == 3

    def test_mst_tree_touches_only_terminals(self):
        r = mst_heuristic([(0, 0), (4, 0), (0, 4), (4, 4)])
        assert r.tree.topology.steiners == ()
        assert len(r.tree.topology.edges) == 3

    def test_bead_points_count_matches_report(self):
        r = smt_heuristic(FIG9)
        assert len(r.bead_points) == r.report.bead_count

    def test_euclidean_capacity(self):
        with pytest.raises(CapacityError):
            smt_heuristic([(i, i % 2) for i in range(9)])

    def test_polygon_norm_three_terminals_needs_parallelogram(self, hexagon_norm, l1_norm):
        pts = [(0, 0), (2, 0), (0, 2)]
        assert smt_heuristic(pts, l1_norm).report.bead_count >= 1
        with pytest.raises(CapacityError):
            smt_heuristic(pts, hexagon_norm)


class TestExact3:
    def test_figure_nine_optimum(self):
        r = mspt_exact3(FIG9)
        assert r.best_beads == 9
        assert r.status == "ExactN3"
        assert bead_count(r.best_tree).bead_count == 9

    def test_never_beaten_by_grid(self):
        rng = np.random.default_rng(61)
        for _ in range(12):
            pts = [tuple(rng.uniform(0, 5, 2)) for _ in range(3)]
            r = mspt_exact3(pts)
            g = grid_oracle3(pts)
            assert r.best_beads <= g
            assert bead_count(r.best_tree).bead_count == r.best_beads

    def test_grid_agreement_on_polygon_norm(self):
        norm = regular_ball(3)
        rng = np.random.default_rng(67)
        for _ in range(6):
            pts = [tuple(rng.uniform(0, 4, 2)) for _ in range(3)]
            r = mspt_exact3(pts, norm)
            assert r.best_beads <= grid_oracle3(pts, norm)

    def test_collinear_needs_no_steiner(self):
        r = mspt_exact3([(0, 0), (2.0, 0), (4.0, 0)])
        assert r.best_beads == 2
        assert r.best_tree.topology.steiners == ()


def spanning_tree_beads(pts, edges_subset) -> int:
    total = 0
    for i, j in edges_subset:
        total += max(ceil_eps(math.dist(pts[i], pts[j])) - 1, 0)
    return total


class TestSearch:
    def test_k0_matches_spanning_tree_brute_force(self):
        # with a huge square spread, added points cannot help pairs at
        # integer-multiple positions; compare against all spanning trees
        rng = np.random.default_rng(71)
        for _ in range(6):
            pts = [tuple(rng.uniform(0, 3, 2)) for _ in range(4)]
            res = mspt_search(pts)
            best_spanning = math.inf
            for subset in itertools.combinations(itertools.combinations(range(4), 2), 3):
                try:
                    Topology([f"t{i}" for i in range(4)], [],
                             [(f"t{a}", f"t{b}") for a, b in subset])
                except StructuralError:
                    continue
                best_spanning = min(best_spanning, spanning_tree_beads(pts, subset))
            assert res.best_beads <= best_spanning
            assert bead_count(res.best_tree).bead_count == res.best_beads

    def test_small_instances_verify(self):
        pts = [(0, 0), (3.2, 0), (0, 3.2), (3.2, 3.2)]
        res = mspt_search(pts)
        assert res.status == "ExhaustiveVerified"
        assert res.best_beads <= smt_heuristic(pts).report.bead_count
        assert res.best_beads <= mst_heuristic(pts).report.bead_count

    def test_tiny_budget_degrades_honestly(self):
        pts = [(0, 0), (4.7, 0.3), (1.1, 3.9), (4.0, 4.2)]
        full = mspt_search(pts, budget=2_000_000)
        starved = mspt_search(pts, budget=50)
        assert starved.status == "BestEffort"
        assert starved.best_beads >= full.best_beads

    def test_two_terminals(self):
        res = mspt_search([(0, 0), (2.5, 0)])
        assert res.best_beads == 2
        assert res.status == "ExhaustiveVerified"

    def test_requires_two(self):
        with pytest.raises(UsageError):
            mspt_search([(0, 0)])

    def test_search_trace_reports_topologies(self):
        res = mspt_search([(0, 0), (3, 0), (0, 3), (3, 3)])
        assert res.search_trace["topologies"] >= 3


class TestFixedTopology:
    def test_star_matches_exact3_when_star_wins(self):
        pts = [(0, 0), (4, 0), (2, 3.4)]
        exact = mspt_exact3(pts)
        star = Topology(["t0", "t1", "t2"], ["s0"], [(f"t{i}", "s0") for i in range(3)])
        tree = minimize_beads_fixed_topology(star, pts)
        assert bead_count(tree).bead_count >= exact.best_beads
        if exact.best_tree.topology.steiners:
            assert bead_count(tree).bead_count == exact.best_beads

    def test_terminal_count_mismatch(self):
        star = Topology(["t0", "t1", "t2"], ["s0"], [(f"t{i}", "s0") for i in range(3)])
        with pytest.raises(StructuralError):
            minimize_beads_fixed_topology(star, [(0, 0), (1, 1)])


class TestBoundReport:
    def test_figure_nine(self):
        rep = bound_report(FIG9)
        assert rep.gap == 1
        assert rep.bound_2n4 and rep.bound_c and rep.eq_corollary
        assert rep.violations == []
        assert rep.oracle_status == "ExactN3"

    def test_flags_recompute_from_fields(self):
        rng = np.random.default_rng(73)
        for _ in range(8):
            n = int(rng.integers(3, 5))
            pts = [tuple(rng.uniform(0, 4, 2)) for _ in range(n)]
            rep = bound_report(pts)
            assert rep.bound_2n4 == (rep.gap <= max(2 * rep.n - 4 - rep.j, 0))
            assert rep.bound_c == (rep.gap <= 2 * rep.n - rep.c - 3)
            assert rep.gap == rep.smt_beads - rep.oracle_beads

    def test_all_integer_instance_equalizes(self):
        # 120-degree star with integer legs: the SMT is already optimal,
        # so the two bead counts coincide and beads = L - n + 1
        legs = (2.0, 3.0, 4.0)
        pts = []
        for i, r in enumerate(legs):
            a = math.pi / 2 + i * 2 * math.pi / 3
            pts.append((r * math.cos(a), r * math.sin(a)))
        rep = bound_report(pts)
        assert rep.gap == 0
        assert rep.smt_beads == rep.oracle_beads == int(sum(legs)) - 3 + 1

    def test_parallelogram_flag_only_for_parallelogram_n3(self, l1_norm):
        rep = bound_report([(0, 0), (2.2, 0.3), (0.4, 2.9)], l1_norm)
        assert rep.para_bound is True
        rep2 = bound_report([(0, 0), (2.2, 0.3), (0.4, 2.9)])
        assert rep2.para_bound is None

    def test_ratio_bound_value(self):
        rep = bound_report(FIG9)
        assert rep.ratio_bound == pytest.approx(1 + 2 / rep.oracle_beads)
