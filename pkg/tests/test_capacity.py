import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wsobolev import capacity as cap_mod
from wsobolev.capacity import (CapacityError, CapacityProblem, Convention, canonical_pattern,
                               capacity, capacity_of_cube, cell_set_capacity, embed_obstacle,
                               pattern_capacity)
from wsobolev.grid import CellSet, GridDomain, ball_cells


def _fixed_ambient(mask, n=2):
    dom = GridDomain(n, (0.0,) * n, 1.0, mask.shape[0] + 1)
    return dom, CapacityProblem(dom, CellSet(dom, mask), Convention.SQUARE_2D)


def test_empty_obstacle_has_zero_capacity():
    dom = GridDomain(2, (0, 0), 1, 9)
    res = capacity(CapacityProblem(dom, CellSet(dom, np.zeros((8, 8), bool)), Convention.SQUARE_2D))
    assert res.value == 0.0
    assert cell_set_capacity(CellSet(dom, np.zeros((8, 8), bool))) == 0.0


def test_unit_ball_3d_coarse():
    dom = GridDomain(3, (0, 0, 0), 8.0, 33)
    res = capacity(CapacityProblem(dom, ball_cells(dom, (0, 0, 0), 1.0), Convention.WHOLE_SPACE))
    assert res.value == pytest.approx(4 * math.pi, rel=0.10)
    assert len(res.box_values) == 2 and res.box_values[0] > res.box_values[1] > res.value
    u = res.potential.values
    assert u.min() >= 0.0 and u.max() <= 1.0


def test_maximum_principle_2d():
    dom = GridDomain(2, (0, 0), 4.0, 41)
    rng = np.random.default_rng(0)
    mask = np.zeros(dom.cell_shape, bool)
    mask[rng.integers(5, 35, 20), rng.integers(5, 35, 20)] = True
    res = capacity(CapacityProblem(dom, CellSet(dom, mask), Convention.SQUARE_2D))
    assert 0.0 <= res.potential.values.min() and res.potential.values.max() <= 1.0
    assert np.all(res.potential.values[CellSet(dom, mask).node_mask()] == 1.0)


def test_square_in_double_square_is_scale_invariant():
    values = [capacity_of_cube(GridDomain(2, (0, 0), d, 5)) for d in (0.25, 1.0, 3.0)]
    assert max(values) == pytest.approx(min(values), rel=1e-12)
    fine = capacity_of_cube(GridDomain(2, (0, 0), 1.0, 9))
    assert fine == pytest.approx(values[0], rel=0.02)


def test_cube_capacity_3d_linear_in_side():
    c1 = capacity_of_cube(GridDomain(3, (0, 0, 0), 1.0, 3))
    c2 = capacity_of_cube(GridDomain(3, (0, 0, 0), 2.0, 3))
    assert c1 > 0 and math.isfinite(c1)
    assert c2 / c1 == pytest.approx(2.0, rel=0.02)


def test_n1_capacity_is_rejected():
    with pytest.raises(ValueError):
        Convention.for_dimension(1)


def test_whole_space_truncation_reported():
    dom = GridDomain(3, (0, 0, 0), 1.0, 3)
    prob = embed_obstacle(CellSet(dom, np.ones((2, 2, 2), bool)), Convention.WHOLE_SPACE, 1, 4)
    res = capacity(prob)
    assert res.truncation == pytest.approx(abs(res.value - res.box_values[1]))


def test_symmetric_patterns_share_capacity():
    p = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 0]], bool)
    images = [p, p.T, p[::-1], p[:, ::-1], np.rot90(p)]
    keys = {canonical_pattern(q[np.ix_(q.any(1), q.any(0))]).tobytes() for q in images}
    assert len(keys) == 1
    vals = [pattern_capacity(q, Convention.SQUARE_2D) for q in images]
    assert max(vals) == min(vals)


def test_cache_matches_fresh_solve():
    p = np.array([[1, 0, 1], [0, 0, 0], [0, 1, 0]], bool)
    cached = pattern_capacity(p, Convention.SQUARE_2D)
    cap_mod._PATTERN_CACHE.clear()
    rotated = pattern_capacity(np.rot90(p), Convention.SQUARE_2D)
    assert rotated == pytest.approx(cached, rel=1e-7)


def test_cg_failure_raises():
    dom = GridDomain(2, (0, 0), 1, 33)
    mask = np.zeros(dom.cell_shape, bool)
    mask[10:20, 10:20] = True
    with pytest.raises(CapacityError):
        capacity(CapacityProblem(dom, CellSet(dom, mask), Convention.SQUARE_2D), tol=1e-300)


_masks = st.lists(st.booleans(), min_size=36, max_size=36).map(
    lambda b: np.array(b, bool).reshape(6, 6))


@settings(max_examples=30, deadline=None)
@given(_masks, _masks)
def test_monotone_and_subadditive_with_fixed_ambient(a, b):
    # pad so obstacles never touch the held-at-zero boundary
    a = np.pad(a, 1)
    b = np.pad(b, 1)
    _, pa = _fixed_ambient(a)
    _, pb = _fixed_ambient(b)
    _, pab = _fixed_ambient(a | b)
    ca, cb, cab = capacity(pa).value, capacity(pb).value, capacity(pab).value
    slack = 1e-6 * max(1.0, cab)
    assert ca <= cab + slack and cb <= cab + slack
    assert cab <= ca + cb + slack
