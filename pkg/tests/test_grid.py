import math

import numpy as np
import pytest

from wsobolev.grid import (CellSet, GridDomain, GridField, GridTooLarge, ball_cells,
                           cell_integrals, integrate_ball, integrate_cube, sample_field)
from wsobolev.potential import PotentialField, build_potential
from wsobolev.weight import parse_weight


def _field(func, n):
    return PotentialField.from_callable(func, n)


def test_domain_geometry():
    dom = GridDomain(2, (1.0, -1.0), 2.0, 5)
    assert dom.h == 0.5 and dom.shape == (5, 5) and dom.cell_shape == (4, 4)
    pts = dom.points()
    assert pts.shape == (25, 2)
    np.testing.assert_array_equal(pts[0], [0.0, -2.0])
    np.testing.assert_array_equal(pts[-1], [2.0, 0.0])
    assert dom.interior_mask().sum() == 9


def test_domain_validation():
    with pytest.raises(ValueError):
        GridDomain(2, (0.0, 0.0), 1.0, 2)
    with pytest.raises(ValueError):
        GridDomain(2, (0.0,), 1.0, 5)
    with pytest.raises(GridTooLarge):
        GridDomain(3, (0.0,) * 3, 1.0, 400)


def test_sample_field_hand_values():
    V = build_potential(parse_weight("|x|^2", 2), "V1")
    f = sample_field(V, GridDomain(2, (0.0, 0.0), 2.0, 3))
    assert f.values[0, 0] == 0.0 and f.values[1, 1] == -2.0
    const = sample_field(build_potential(parse_weight("x1", 2), "V1"), GridDomain(2, (3, 3), 1, 4))
    assert np.all(const.values == 0.25)
    assert np.all(sample_field(build_potential(parse_weight("0", 3), "V1"),
                               GridDomain(3, (0,) * 3, 1, 3)).values == 0)


def test_field_is_read_only():
    dom = GridDomain(1, (0.0,), 1.0, 3)
    f = GridField(dom, np.zeros(3))
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        GridField(dom, np.array([0.0, np.nan, 0.0]))


def test_integrate_cube():
    dom = GridDomain(3, (0.5, 0, 0), 1.5, 7)
    assert integrate_cube(GridField(dom, np.ones(dom.shape))) == pytest.approx(1.5**3, abs=1e-14)
    odd = sample_field(_field(lambda x: x[:, 0], 2), GridDomain(2, (0, 0), 2, 41))
    assert abs(integrate_cube(odd)) < 1e-14
    r2 = _field(lambda x: (x**2).sum(axis=1), 2)
    # trapezoid error on x^2 over [-1, 1] is h^2/3, so the square gives 8/3 + 4h^2/3
    for m in (41, 81):
        h = 2 / (m - 1)
        value = integrate_cube(sample_field(r2, GridDomain(2, (0, 0), 2, m)))
        assert value == pytest.approx(8 / 3 + 4 * h**2 / 3, abs=1e-12)
    assert value == pytest.approx(8 / 3, abs=1e-3)


def test_integrate_cube_linear_and_monotone():
    dom = GridDomain(2, (0, 0), 1, 9)
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=dom.shape), rng.normal(size=dom.shape)
    fa, fb = GridField(dom, a), GridField(dom, b)
    assert integrate_cube(GridField(dom, 2 * a + b)) == pytest.approx(
        2 * integrate_cube(fa) + integrate_cube(fb), rel=1e-12)
    assert integrate_cube(GridField(dom, np.abs(a))) >= integrate_cube(fa)


def test_cell_integrals_sum_to_cube_integral():
    dom = GridDomain(2, (0, 0), 2, 11)
    f = sample_field(_field(lambda x: np.exp(x[:, 0]) * x[:, 1] ** 2, 2), dom)
    assert cell_integrals(f).sum() == pytest.approx(integrate_cube(f), rel=1e-12)


def test_ball_integrals():
    one = _field(lambda x: np.ones(len(x)), 2)
    assert integrate_ball(one, (0, 0), 1.0, 101) == pytest.approx(math.pi, rel=0.02)
    odd = _field(lambda x: x[:, 0], 2)
    assert abs(integrate_ball(odd, (0, 0), 1.0, 101)) <= 1e-10
    r2 = _field(lambda x: (x**2).sum(axis=1), 3)
    assert integrate_ball(r2, (0, 0, 0), 1.0, 101) == pytest.approx(4 * math.pi / 5, rel=0.03)


def test_ball_translation_equivariance():
    V = _field(lambda x: np.cos(x[:, 0]) + x[:, 1] ** 2, 2)
    t = np.array([0.37, -1.2])
    Vt = _field(lambda x: np.cos(x[:, 0] - t[0]) + (x[:, 1] - t[1]) ** 2, 2)
    a = integrate_ball(V, (0, 0), 1.0, 81)
    b = integrate_ball(Vt, tuple(t), 1.0, 81)
    assert abs(a - b) < 1e-10 * abs(a) + 1e-12


def test_refinement_reuses_nodes():
    V = _field(lambda x: np.sin(3 * x[:, 0]) * x[:, 1], 2)
    dom = GridDomain(2, (0.3, -0.1), 1.7, 9)
    coarse = sample_field(V, dom).values
    fine = sample_field(V, dom.refined()).values
    assert np.array_equal(fine[::2, ::2], coarse)


def test_ball_cells_membership():
    dom = GridDomain(2, (0, 0), 2, 21)
    cells = ball_cells(dom, (0, 0), 1.0)
    assert isinstance(cells, CellSet)
    assert cells.measure == pytest.approx(math.pi, rel=0.03)
    assert cells.node_mask().shape == dom.shape


def test_csv_export(tmp_path):
    dom = GridDomain(2, (0, 0), 1, 3)
    f = GridField(dom, np.arange(9.0).reshape(3, 3))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split(",")[:2] == ["i1", "i2"] and len(lines) == 10
