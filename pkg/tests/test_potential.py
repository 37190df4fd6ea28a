import math

import numpy as np
import pytest

from wsobolev.potential import (HypothesisViolation, PotentialField, PotentialKind,
                                build_potential, eval_potential, probe_semibounded, probed,
                                require_semibounded)
from wsobolev.weight import parse_weight


@pytest.mark.parametrize("n", [1, 2, 3])
def test_harmonic_weight_potentials(n):
    w = parse_weight("|x|^2", n)
    x = np.random.default_rng(n).normal(size=(25, n))
    r2 = (x**2).sum(axis=1)
    np.testing.assert_allclose(build_potential(w, "V1").value(x), r2 - n, atol=1e-12)
    np.testing.assert_allclose(build_potential(w, "V2").value(x), r2 + n, atol=1e-12)


def test_point_values():
    assert eval_potential(build_potential(parse_weight("|x|^2", 2), "V1"), (1, 1)) == 0.0
    assert eval_potential(build_potential(parse_weight("x1", 2), "V2"), (3, -7)) == 0.25
    V0 = build_potential(parse_weight("0", 2), "V1")
    assert eval_potential(V0, (4, 5)) == 0.0
    assert eval_potential(build_potential(parse_weight("11", 2), "V2"), (4, 5)) == 0.0


def test_v2_minus_v1_is_laplacian():
    for src in ["x1^3 * x2 - x2^4", "exp(x1) * (1 + x2^2)"]:
        w = parse_weight(src, 2)
        x = np.random.default_rng(1).uniform(-2, 2, size=(40, 2))
        diff = build_potential(w, "V2").value(x) - build_potential(w, "V1").value(x)
        np.testing.assert_allclose(diff, w.lap(x), rtol=1e-6, atol=1e-6)


def test_constant_shift_is_exact():
    x = np.random.default_rng(2).normal(size=(50, 2)) * 3
    for src in ["x1^4 - 3*x1*x2 + x2^2", "exp(x1 / 3) * sqrt(1 + x2^2)"]:
        a, b = parse_weight(src, 2), parse_weight(f"{src} + 17", 2)
        for kind in PotentialKind:
            assert np.array_equal(build_potential(a, kind).value(x), build_potential(b, kind).value(x))


def test_polynomial_degree_bookkeeping():
    w = parse_weight("x1^3*x2 + x2^2", 2)
    V = build_potential(w, "V1").polynomial
    grad_sq, lap = w.grad_sq_poly, w.laplacian_poly
    assert grad_sq.degree == 2 * w.degree - 2 > lap.degree == w.degree - 2
    assert V.degree == grad_sq.degree


def test_probe_harmonic():
    p = probe_semibounded(build_potential(parse_weight("|x|^2", 2), "V1"), 10.0)
    assert p.certified and p.semibounded
    assert abs(p.sampled_min + 2.0) < 1e-6
    assert -2.2 < p.bound <= -2.0


def test_probe_zero():
    bound, certified = probe_semibounded(build_potential(parse_weight("0", 2), "V1"), 5.0)
    assert bound == 0.0 and certified


def test_probe_quartic_degenerate_leading_form():
    # V1 = 4 x1^6 - 6 x1^2, min -2 sqrt 2 at x1 = 2^(-1/4)
    p = probe_semibounded(build_potential(parse_weight("x1^4", 2), "V1"), 10.0)
    assert not p.certified and p.semibounded
    assert abs(p.sampled_min + 2 * math.sqrt(2)) < 1e-6
    assert abs(abs(p.argmin[0]) - 2 ** -0.25) < 1e-4


def test_probe_rejects_unbounded_potential():
    V = build_potential(parse_weight("x1^2 * x2", 2), "V1")
    assert not probe_semibounded(V, 10.0).semibounded
    with pytest.raises(HypothesisViolation):
        require_semibounded(V, 10.0)


def test_probed_copy_carries_shift():
    V = probed(build_potential(parse_weight("|x|^2", 2), "V1"), 10.0)
    assert V.semibounded and V.certified
    assert V.shift == -V.lower_bound_estimate > 0


def test_from_callable():
    V = PotentialField.from_callable(lambda x: np.sum(x**2, axis=1), 3)
    assert V.n == 3
    assert eval_potential(V, (1, 2, 2)) == 9.0
