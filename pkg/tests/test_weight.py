import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wsobolev.weight import (ExpressionWeight, PolynomialWeight, WeightDomainError,
                             WeightSyntaxError, evaluate, gradient, laplacian, parse_tree,
                             parse_weight, pretty)


def test_parse_polynomial_forms():
    w = parse_weight("x1^2 + x2^2", 2)
    assert isinstance(w, PolynomialWeight)
    assert w.terms == {(2, 0): 1.0, (0, 2): 1.0}
    assert parse_weight("x1^2 * x2 - 3", 2).terms == {(2, 1): 1.0, (0, 0): -3.0}


def test_non_polynomial_falls_through():
    assert isinstance(parse_weight("exp(x1)", 1), ExpressionWeight)
    assert isinstance(parse_weight("sqrt(1 + |x|^2)", 2), ExpressionWeight)


def test_norm_squared_expands():
    assert parse_weight("|x|^2", 3).terms == {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}
    assert parse_weight("|x|^4", 2).terms == {(4, 0): 1.0, (2, 2): 2.0, (0, 4): 1.0}


def test_expansion_matches_tree_at_random_points():
    src = "(x1 - 2*x2)^3 * (1 + x1) - 3"
    w = parse_weight(src, 2)
    tree = ExpressionWeight(2, parse_tree(src, 2))
    x = np.random.default_rng(0).normal(size=(10, 2))
    np.testing.assert_allclose(w.value(x), tree.value(x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("src,x,expected", [
    ("x1^2 + x2^2", (1, 2), 5.0),
    ("x1^2 * x2 - 3", (2, 1), 1.0),
])
def test_evaluate(src, x, expected):
    assert evaluate(parse_weight(src, 2), x) == expected


def test_evaluate_norm_at_origin():
    assert evaluate(parse_weight("|x|^2", 3), (0, 0, 0)) == 0.0


def test_gradient_and_laplacian_oracles():
    w = parse_weight("|x|^2", 2)
    np.testing.assert_array_equal(gradient(w, (1, 2)), [2.0, 4.0])
    assert np.all(gradient(parse_weight("7", 3), (1, -2, 3)) == 0)
    assert abs(gradient(parse_weight("exp(x1)", 1), (0.0,))[0] - 1.0) < 1e-8
    for n in (1, 2, 3):
        x = np.random.default_rng(n).normal(size=(5, n))
        np.testing.assert_array_equal(laplacian(parse_weight("|x|^2", n), x), 2.0 * n)
    assert laplacian(parse_weight("x1^3", 1), (2.0,)) == 12.0
    assert abs(laplacian(parse_weight("exp(x1 + x2)", 2), (0.0, 0.0)) - 2.0) < 1e-6


def test_laplacian_is_linear_exactly():
    a = parse_weight("x1^3 * x2 - x2^4", 2)
    b = parse_weight("2*x1^2 + x1*x2^3", 2)
    lap_sum = (a + b).laplacian_poly.terms
    assert lap_sum == (a.laplacian_poly + b.laplacian_poly).terms
    # integer probes keep every float operation exact
    x = np.random.default_rng(3).integers(-5, 6, size=(20, 2)).astype(float)
    np.testing.assert_array_equal((a + b).lap(x), a.lap(x) + b.lap(x))


def test_fd_gradient_matches_exact():
    src = "x1^3 * x2 - 2*x2^2 + x1"
    exact = parse_weight(src, 2)
    fd = ExpressionWeight(2, parse_tree(src, 2))
    x = np.random.default_rng(4).uniform(-3, 3, size=(50, 2))
    g0, g1 = exact.grad(x), fd.grad(x)
    np.testing.assert_allclose(g1, g0, rtol=1e-6, atol=1e-6 * np.abs(g0).max())


def test_additive_constant_leaves_fd_derivatives_bitwise():
    a = parse_weight("exp(x1) * sqrt(1 + x2^2)", 2)
    b = parse_weight("exp(x1) * sqrt(1 + x2^2) + 17", 2)
    x = np.random.default_rng(5).normal(size=(30, 2))
    assert np.array_equal(a.grad(x), b.grad(x))
    assert np.array_equal(a.lap(x), b.lap(x))


@pytest.mark.parametrize("src", ["x1^", "x3", "x1 +* 2", "foo(x1)", "x1^0.5", "(x1", "x0"])
def test_syntax_errors(src):
    with pytest.raises(WeightSyntaxError):
        parse_weight(src, 2)


def test_domain_errors():
    with pytest.raises(WeightDomainError):
        evaluate(parse_weight("log(x1)", 1), (-1.0,))
    with pytest.raises(WeightDomainError):
        evaluate(parse_weight("sqrt(x1)", 1), (-1.0,))


def test_term_cap_falls_back_to_expression():
    w = parse_weight("(1 + x1 + x2 + x3)^60", 3)
    assert isinstance(w, ExpressionWeight)


_leaf = st.one_of(st.integers(0, 9).map(str), st.sampled_from(["x1", "x2", "|x|"]))


def _compound(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/"), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(-3, 4)).map(lambda t: f"({t[0]})^{t[1]}"),
        st.tuples(st.sampled_from(["exp", "log", "sqrt"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda s: f"-{s}"),
    )


@settings(max_examples=200, deadline=None)
@given(st.recursive(_leaf, _compound, max_leaves=12))
def test_pretty_round_trip(src):
    tree = parse_tree(src, 2)
    assert parse_tree(pretty(tree), 2) == tree
