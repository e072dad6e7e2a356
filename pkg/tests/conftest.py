from __future__ import annotations

import math

import numpy as np
import pytest

from steinerbead.constructions import _embed_base, _reduction_steps, sprout
from steinerbead.geometry import Point, rotate
from steinerbead.norms import polygon_norm
from steinerbead.seeding import stream
from steinerbead.smt_solver import enumerate_full_topologies


def regular_ball(k: int, phase: float = 0.0):
    """Unit ball = regular 2k-gon (centrally symmetric by construction)."""
    m = 2 * k
    return polygon_norm(
        [[math.cos(phase + 2 * math.pi * i / m), math.sin(phase + 2 * math.pi * i / m)] for i in range(m)]
    )


@pytest.fixture(scope="session")
def hexagon_norm():
    return regular_ball(3)


@pytest.fixture(scope="session")
def octagon_norm():
    return regular_ball(4)


@pytest.fixture(scope="session")
def l1_norm():
    return polygon_norm([[1, 0], [0, 1], [-1, 0], [0, -1]])


def random_parallelogram_norm(rng: np.random.Generator):
    """A random centrally symmetric quadrilateral ball."""
    for _ in range(50):
        a1 = rng.uniform(0, math.pi)
        a2 = a1 + rng.uniform(0.35, math.pi - 0.35)
        r1 = rng.uniform(0.5, 2.0)
        r2 = rng.uniform(0.5, 2.0)
        v1 = (r1 * math.cos(a1), r1 * math.sin(a1))
        v2 = (r2 * math.cos(a2), r2 * math.sin(a2))
        try:
            return polygon_norm([v1, v2, (-v1[0], -v1[1]), (-v2[0], -v2[1])])
        except Exception:
            continue
    raise RuntimeError("could not draw a parallelogram ball")


def spread_full_tree(n: int, rng: np.random.Generator):
    """A random full tree with well-separated nodes (edges a few units long).

    Built by embedding a random full topology through the same
    base-plus-sprout replay the generators use, then jittering.  Long edges
    keep the replayed tree full and bond-free with high probability; callers
    still have to verify minimality for their purpose.
    """
    labels = [f"t{i}" for i in range(n)]
    tops = enumerate_full_topologies(labels)
    top = tops[int(rng.integers(len(tops)))]
    base, steps = _reduction_steps(top)
    tree = _embed_base(base, {t: float(rng.uniform(4.0, 8.0)) for t in base.terminals})
    for (bead, pair) in reversed(steps):
        tree = sprout(tree, bead, float(rng.uniform(4.0, 8.0)), new_labels=pair)
    theta = float(rng.uniform(0.0, 2 * math.pi))
    shift = rng.uniform(0.0, 10.0, size=2)
    pos = {}
    for lab, p in tree.positions.items():
        q = rotate(p, theta)
        pos[lab] = Point(q[0] + shift[0], q[1] + shift[1])
    for lab in tree.topology.terminals:
        pos[lab] = Point(
            pos[lab].x + float(rng.uniform(-0.3, 0.3)),
            pos[lab].y + float(rng.uniform(-0.3, 0.3)),
        )
    return type(tree)(tree.topology, pos, tree.norm)


def rng_for(test_name: str, index: int = 0) -> np.random.Generator:
    # zlib.crc32 is stable across processes, unlike hash()
    import zlib

    return stream(zlib.crc32(test_name.encode()), index)
