import itertools
import math

import numpy as np
import pytest

from wsobolev import criteria
from wsobolev.criteria import (Direction, Outcome, CriterionVerdict, aggregate, ball_moment,
                               measure_knapsack, necessary_integral, pointwise_growth,
                               polynomial_ball_integral, polynomial_characterization,
                               sufficient_measure)
from wsobolev.grid import integrate_ball
from wsobolev.molcanov import CriterionSweep
from wsobolev.potential import PotentialField, build_potential, probed
from wsobolev import trend
from wsobolev.weight import parse_weight


def _V(src, kind="V1", n=2):
    return build_potential(parse_weight(src, n), kind)


def test_necessary_harmonic_matches_closed_form():
    v = necessary_integral(_V("|x|^2"), m=41)
    R = np.array(v.evidence["abscissa"])
    # integral of |y|^2 - 2 over B(x, 1) in the plane
    exact = math.pi * (R**2 - 1.5)
    np.testing.assert_allclose(v.evidence["values"], exact, rtol=0.03)
    assert v.outcome is Outcome.PASSES and v.direction is Direction.NECESSARY


def test_necessary_fails_for_zero_and_cylinder():
    assert necessary_integral(_V("0")).outcome is Outcome.FAILS
    v = necessary_integral(_V("x1^2"))
    assert v.outcome is Outcome.FAILS and v.vote == criteria.LIKELY_NOT_COMPACT


def test_v2_minus_v1_ball_integral_is_laplacian_integral():
    w = parse_weight("x1^4 + x2^4 + x1*x2", 2)
    a = necessary_integral(build_potential(w, "V1"), R_max=4.0, m=21)
    b = necessary_integral(build_potential(w, "V2"), R_max=4.0, m=21)
    lap = PotentialField.from_callable(w.lap, 2)
    for ray, direction in [("+x1", (1, 0)), ("diag(+-)", (1, -1))]:
        u = np.array(direction) / np.linalg.norm(direction)
        for R, va, vb in zip(a.evidence["abscissa"], a.evidence["per_ray"][ray],
                             b.evidence["per_ray"][ray]):
            assert vb - va == pytest.approx(integrate_ball(lap, u * R, 1.0, 21), abs=1e-6)


def test_knapsack_matches_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.normal(size=8) ** 2
        k = int(rng.integers(0, 9))
        best = min(v[[i for i in range(8) if i not in drop]].sum()
                   for j in range(k + 1) for drop in itertools.combinations(range(8), j))
        value, removed = measure_knapsack(v, k)
        assert value == pytest.approx(best, abs=1e-12) and removed.sum() == k


def test_sufficient_brackets_ball_integral():
    V = probed(_V("|x|^2"), 9.0)
    v = sufficient_measure(V, m=21)
    assert v.outcome is Outcome.PASSES and v.vote == criteria.LIKELY_COMPACT
    for R, val in zip(v.evidence["abscissa"], v.evidence["values"]):
        total = math.pi * (R**2 - 1.5) + V.shift * math.pi
        # at most gamma_m * r^n of measure is removed, worst on the far side of the ball
        assert total * 1.03 >= val >= total - 0.5 * ((R + 1) ** 2 - 2 + V.shift) - 0.1 * total
    assert "limitation" in v.evidence


def test_sufficient_removes_a_spike():
    # a narrow tall bump fits inside the removable measure and is discarded
    spike = PotentialField.from_callable(
        lambda x: 1e4 * np.exp(-200 * ((x - np.round(x)) ** 2).sum(axis=1)), 2)
    v = sufficient_measure(probed(spike, 9.0), m=21)
    assert max(v.evidence["values"]) < 1e4 * math.pi / 200
    assert v.outcome is not Outcome.PASSES


def test_pointwise_growth():
    v = pointwise_growth(_V("|x|^2", "V2"))
    R = np.array(v.evidence["abscissa"])
    np.testing.assert_allclose(v.evidence["values"], R**2 + 2, rtol=1e-12)
    assert v.outcome is Outcome.PASSES
    flat = pointwise_growth(_V("x1^2"))
    np.testing.assert_allclose(flat.evidence["values"], -1.0, atol=1e-12)
    assert flat.outcome is Outcome.INCONCLUSIVE and flat.vote is None


def test_ball_moments():
    assert ball_moment((0, 0), 2) == pytest.approx(math.pi)
    assert ball_moment((0, 0, 0), 3) == pytest.approx(4 * math.pi / 3)
    assert ball_moment((1, 0), 2) == pytest.approx(math.pi / 4)


def test_polynomial_ball_integral_closed_form():
    g = parse_weight("|x|^2", 2).grad_sq_poly
    x = np.random.default_rng(0).normal(size=(6, 2)) * 3
    np.testing.assert_allclose(polynomial_ball_integral(g, x),
                               4 * math.pi * ((x**2).sum(axis=1) + 0.5), rtol=1e-12)
    odd = parse_weight("x1^3 * x2", 2)
    assert abs(polynomial_ball_integral(odd, [[0.0, 0.0]])[0]) < 1e-15


def test_characterization_oracles():
    v = polynomial_characterization(parse_weight("|x|^2", 2))
    assert v.outcome is Outcome.PASSES and v.evidence["equivalence_agrees"]
    for src in ("0", "x1^2"):
        v = polynomial_characterization(parse_weight(src, 2))
        assert v.outcome is Outcome.FAILS and v.vote == criteria.LIKELY_NOT_COMPACT
    with pytest.raises(TypeError):
        polynomial_characterization(parse_weight("exp(x1)", 2))


def _cv(name, direction, outcome):
    return CriterionVerdict(name, Direction(direction), Outcome(outcome))


def _sweep(label):
    t = trend.Trend(label, 0.0, 0.0, False)
    return CriterionSweep(1.0, "d", 1.0, 0.5, 0.5, 0.0, [], [], [], verdict=t)


def test_aggregation_rules():
    nec_fail = _cv("a", "necessary", "fails")
    suf_pass = _cv("b", "sufficient", "passes")
    suf_inc = _cv("c", "sufficient", "inconclusive")
    assert aggregate([suf_pass]).overall == criteria.LIKELY_COMPACT
    assert aggregate([nec_fail, suf_inc]).overall == criteria.LIKELY_NOT_COMPACT
    assert aggregate([suf_inc]).overall == criteria.INCONCLUSIVE
    rep = aggregate([nec_fail, suf_pass])
    assert rep.overall == criteria.INCONCLUSIVE and len(rep.conflicts) == 2
    assert aggregate([suf_inc], _sweep(trend.DIVERGING)).overall == criteria.LIKELY_COMPACT
    assert aggregate([suf_inc], _sweep(trend.BOUNDED)).overall == criteria.LIKELY_NOT_COMPACT
    # the polynomial characterization overrides the Molchanov sweep
    char = _cv("polynomial_characterization", "characterization", "passes")
    assert aggregate([char], _sweep(trend.BOUNDED)).overall == criteria.LIKELY_COMPACT
    with pytest.raises(ValueError):
        aggregate([])
