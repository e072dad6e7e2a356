from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinerbead.errors import StructuralError
from steinerbead.norms import EUCLIDEAN
from steinerbead.smt_solver import enumerate_full_topologies
from steinerbead.tree_core import (
    EmbeddedTree,
    Topology,
    bead_count,
    bead_positions,
    canonical_topology_key,
    ceil_eps,
    contract_zero_edges,
    is_integer_length,
    materialize_segments,
    steiner_bonds,
    structure,
    to_full_form,
)


def star4(lengths=(1.0, 1.0, 1.0, 1.0)):
    """Degree-4 Steiner star: needs a node split to reach full form."""
    top = Topology(["t0", "t1", "t2", "t3"], ["s0"], [(f"t{i}", "s0") for i in range(4)])
    pos = {"s0": (0.0, 0.0)}
    for i, ln in enumerate(lengths):
        a = math.pi / 2 * i
        pos[f"t{i}"] = (ln * math.cos(a), ln * math.sin(a))
    return EmbeddedTree(top, pos, EUCLIDEAN)


def path3(d01=1.0, d12=1.0):
    top = Topology(["t0", "t1", "t2"], [], [("t0", "t1"), ("t1", "t2")])
    return EmbeddedTree(top, {"t0": (0, 0), "t1": (d01, 0), "t2": (d01 + d12, 0)})


class TestCeil:
    def test_plain_values(self):
        assert ceil_eps(0.2) == 1
        assert ceil_eps(1.0) == 1
        assert ceil_eps(1.0001) == 2
        assert ceil_eps(5.9) == 6

    def test_epsilon_window(self):
        # values within 1e-9 above an integer round down to it
        assert ceil_eps(3.0 + 5e-10) == 3
        assert ceil_eps(3.0 + 2e-9) == 4
        assert ceil_eps(5e-10) == 0
        assert ceil_eps(0.0) == 0

    @given(num=st.integers(min_value=0, max_value=10_000), den=st.integers(min_value=1, max_value=997))
    @settings(max_examples=300, deadline=None)
    def test_matches_exact_rational_ceiling(self, num, den):
        q = Fraction(num, den)
        x = float(q)
        # exclude floats that landed inside the snapping window of the
        # integer below (conversion error is ~1e-16, well inside 1e-9)
        if abs(x - round(x)) > 1e-8 or q.denominator == 1:
            assert ceil_eps(x) == math.ceil(q)

    def test_is_integer_length(self):
        assert is_integer_length(4.0)
        assert is_integer_length(4.0 - 5e-10)
        assert not is_integer_length(4.0001)
        assert is_integer_length(0.0)


class TestTopologyValidation:
    def test_rejects_low_degree_steiner(self):
        with pytest.raises(StructuralError):
            Topology(["a", "b"], ["s"], [("a", "s"), ("s", "b")])

    def test_rejects_cycle(self):
        with pytest.raises(StructuralError):
            Topology(["a", "b", "c"], [], [("a", "b"), ("b", "c"), ("c", "a")])

    def test_rejects_disconnected(self):
        with pytest.raises(StructuralError):
            Topology(["a", "b", "c", "d"], [], [("a", "b"), ("c", "d"), ("a", "b")])

    def test_rejects_unknown_label(self):
        with pytest.raises(StructuralError):
            Topology(["a", "b"], [], [("a", "zz")])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(StructuralError):
            Topology(["a", "a", "b"], [], [("a", "b")])

    def test_edges_are_normalized(self):
        t = Topology(["b", "a"], [], [("b", "a")])
        assert t.edges == (("a", "b"),)

    def test_full_flag(self):
        full = enumerate_full_topologies(["t0", "t1", "t2"])[0]
        assert full.is_full
        assert not path3().topology.is_full


class TestFullForm:
    def test_high_degree_steiner_splits(self):
        t = star4()
        f = to_full_form(t)
        assert f.topology.is_full
        assert len(f.topology.steiners) == 2  # n - 2
        # splitting inserts a zero-length edge, total length unchanged
        assert f.total_length() == pytest.approx(t.total_length(), abs=1e-12)
        assert min(f.edge_lengths()) == pytest.approx(0.0, abs=1e-12)

    def test_high_degree_terminal_splits(self):
        # MST star centered at a terminal: t0 joined to three others
        top = Topology(["t0", "t1", "t2", "t3"], [], [("t0", f"t{i}") for i in (1, 2, 3)])
        pos = {"t0": (0, 0), "t1": (1.2, 0), "t2": (0, 1.7), "t3": (-2.1, 0)}
        f = to_full_form(EmbeddedTree(top, pos))
        assert f.topology.is_full
        assert f.total_length() == pytest.approx(1.2 + 1.7 + 2.1, abs=1e-12)

    def test_full_tree_is_untouched(self):
        top = enumerate_full_topologies(["t0", "t1", "t2"])[0]
        pos = {"t0": (0, 0), "t1": (2, 0), "t2": (1, 2), top.steiners[0]: (1, 0.7)}
        t = EmbeddedTree(top, pos)
        f = to_full_form(t)
        assert canonical_topology_key(f.topology) == canonical_topology_key(top)


def independent_bead_count(tree: EmbeddedTree) -> int:
    """Second route: bead every original edge, then add the Steiner nodes."""
    total = 0
    for ln in tree.edge_lengths():
        total += max(ceil_eps(ln) - 1, 0)
    return total + len(tree.topology.steiners)


class TestBeadCount:
    def test_path_hand_count(self):
        # 5.1-length leg needs 5 added points; two legs of 5.1 need 10
        t = path3(5.1, 5.1)
        assert bead_count(t).bead_count == 10
        assert independent_bead_count(t) == 10

    def test_integer_edges_need_one_less(self):
        assert bead_count(path3(5.0, 5.0)).bead_count == 8

    def test_degree_four_star_formula(self):
        t = star4((1.0, 1.0, 1.0, 1.0))
        # four unit edges plus one zero split edge: 1 - 4 + 4 = 1
        rep = bead_count(t)
        assert rep.bead_count == 1
        assert independent_bead_count(t) == 1
        # the zero-length split edge is integer, so it counts toward j
        assert rep.integer_edge_count == 5

    def test_full_component_count(self):
        # c = 1 + sum over terminals of (degree - 1), on the original tree
        assert bead_count(path3()).full_component_count == 2
        assert bead_count(star4()).full_component_count == 1
        top = Topology(["t0", "t1", "t2", "t3"], [], [("t0", f"t{i}") for i in (1, 2, 3)])
        pos = {"t0": (0, 0), "t1": (1.2, 0), "t2": (0, 1.7), "t3": (-2.1, 0)}
        assert bead_count(EmbeddedTree(top, pos)).full_component_count == 3

    def test_report_reconciles_with_ceilings(self):
        t = path3(2.5, 3.0)
        rep = bead_count(t)
        n = len(t.topology.terminals)
        assert rep.bead_count == 1 - n + sum(c for _, _, c in rep.per_edge_ceilings)
        assert rep.integer_edge_count == sum(
            1 for _, ln, _ in rep.per_edge_ceilings if is_integer_length(ln)
        )

    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_independent_count_on_random_trees(self, data):
        n = data.draw(st.integers(min_value=3, max_value=5))
        tops = enumerate_full_topologies([f"t{i}" for i in range(n)])
        top = tops[data.draw(st.integers(min_value=0, max_value=len(tops) - 1))]
        coord = st.floats(min_value=-9, max_value=9, allow_nan=False)
        pos = {lab: (data.draw(coord), data.draw(coord)) for lab in top.terminals + top.steiners}
        t = EmbeddedTree(top, pos)
        if min(t.edge_lengths()) <= 1e-9:
            return  # a Steiner point sitting on its neighbour is not an added point
        assert bead_count(t).bead_count == independent_bead_count(t)

    def test_bead_positions_spacing(self):
        t = path3(3.5, 1.0)
        pts = bead_positions(t)
        assert len(pts) == 3
        segs = materialize_segments(t)
        # materialized segments cover the tree length in unit-or-less pieces
        assert sum(math.dist(a, b) for a, b in segs) == pytest.approx(4.5, abs=1e-12)
        assert max(math.dist(a, b) for a, b in segs) <= 1 + 1e-9


class TestBondsAndContraction:
    def test_collinear_edges_form_bond(self):
        top = Topology(["t0", "t1", "t2"], ["s0"], [("t0", "s0"), ("t1", "s0"), ("t2", "s0")])
        pos = {"s0": (0, 0), "t0": (-2, 0), "t1": (2, 0), "t2": (0, 3)}
        bonds = steiner_bonds(EmbeddedTree(top, pos))
        assert bonds == [(("s0", "t0"), ("s0", "t1"))]

    def test_near_collinear_within_tolerance(self):
        top = Topology(["t0", "t1", "t2"], ["s0"], [("t0", "s0"), ("t1", "s0"), ("t2", "s0")])
        pos = {"s0": (0, 0), "t0": (-2, 0), "t1": (2, 2e-8), "t2": (0, 3)}
        assert steiner_bonds(EmbeddedTree(top, pos))

    def test_bend_is_not_a_bond(self):
        top = Topology(["t0", "t1", "t2"], ["s0"], [("t0", "s0"), ("t1", "s0"), ("t2", "s0")])
        pos = {"s0": (0, 0), "t0": (-2, 0), "t1": (2, 0.01), "t2": (0, 3)}
        assert steiner_bonds(EmbeddedTree(top, pos)) == []

    def test_terminals_cannot_bond(self):
        # degree-2 terminal with collinear edges is not a Steiner bond
        t = path3(1.0, 1.0)
        assert steiner_bonds(t) == []

    def test_contract_zero_edges(self):
        top = Topology(["t0", "t1", "t2", "t3"], ["s0", "s1"], [
            ("t0", "s0"), ("t1", "s0"), ("s0", "s1"), ("t2", "s1"), ("t3", "s1"),
        ])
        pos = {"t0": (0, 1), "t1": (0, -1), "s0": (0.5, 0), "s1": (0.5, 1e-12),
               "t2": (1, 1), "t3": (1, -1)}
        c = contract_zero_edges(EmbeddedTree(top, pos))
        assert len(c.topology.steiners) == 1
        assert c.topology.degree(c.topology.steiners[0]) == 4


class TestCanonicalKey:
    def test_invariant_under_steiner_relabeling(self):
        a = Topology(["t0", "t1", "t2"], ["s0"], [("t0", "s0"), ("t1", "s0"), ("t2", "s0")])
        b = Topology(["t0", "t1", "t2"], ["hub"], [("t0", "hub"), ("t1", "hub"), ("t2", "hub")])
        assert canonical_topology_key(a) == canonical_topology_key(b)

    def test_distinguishes_pairings(self):
        tops = enumerate_full_topologies(["t0", "t1", "t2", "t3"])
        keys = {canonical_topology_key(t) for t in tops}
        assert len(keys) == len(tops) == 3

    def test_star_differs_from_path(self):
        star = Topology(["t0", "t1", "t2"], ["s0"], [("t0", "s0"), ("t1", "s0"), ("t2", "s0")])
        assert canonical_topology_key(star) != canonical_topology_key(path3().topology)


class TestStructure:
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_every_full_topology_has_two_cherries(self, n):
        for top in enumerate_full_topologies([f"t{i}" for i in range(n)]):
            rep = structure(top)
            # count distinct beads that carry a cherry
            beads = {s for s, _ in rep.cherries}
            assert len(beads) >= 2 or n == 3

    def test_three_terminal_star_structure(self):
        top = enumerate_full_topologies(["t0", "t1", "t2"])[0]
        rep = structure(top)
        assert rep.is_caterpillar
        assert rep.rooted_at is not None
        assert rep.maximal_junctions == ()

    def test_caterpillar_detection(self):
        # the n=5 'double cherry off a spine' shapes are all caterpillars
        tops = enumerate_full_topologies([f"t{i}" for i in range(5)])
        assert any(structure(t).is_caterpillar for t in tops)

    def test_requires_full(self):
        with pytest.raises(StructuralError):
            structure(path3().topology)

    def test_junctions_in_balanced_six_terminal_tree(self):
        # a Steiner node whose three neighbours are Steiner nodes heads
        # three caterpillar branches: it is the unique maximal junction
        top = Topology(
            [f"t{i}" for i in range(6)],
            ["hub", "a", "b", "c"],
            [
                ("hub", "a"), ("hub", "b"), ("hub", "c"),
                ("a", "t0"), ("a", "t1"), ("b", "t2"), ("b", "t3"), ("c", "t4"), ("c", "t5"),
            ],
        )
        rep = structure(top)
        assert not rep.is_caterpillar
        assert "hub" in rep.maximal_junctions
