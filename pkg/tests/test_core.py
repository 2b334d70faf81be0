import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonmoments import autodiff as ad
from canonmoments.core import (
    CanonicalChart,
    ChartFunction,
    gradient,
    hamiltonian_vector_field,
    iterated_bracket,
    poisson_bracket,
)
from canonmoments.errors import NonFinite

CHART = CanonicalChart((("s1", "p1"), ("s2", "p2")), ("U",))
coord = st.floats(0.3, 2.0)
mom = st.floats(-1.0, 1.0)


def _fns():
    f = ChartFunction(CHART, lambda x: x["s1"] * x["p2"] + x["U"] / (x["s1"] * x["s1"]), "f")
    g = ChartFunction(CHART, lambda x: x["p1"] * x["p1"] + ad.sin(x["s2"]) * x["s1"], "g")
    h = ChartFunction(CHART, lambda x: x["s2"] * x["p1"] * x["p2"] + x["U"] * x["s2"], "h")
    return f, g, h


def _point(a, b, c, d, u):
    return CHART.point(s1=a, p1=b, s2=c, p2=d, U=u)


points = st.builds(_point, coord, mom, coord, mom, st.floats(0.25, 2.0))


@settings(max_examples=30, deadline=None)
@given(points)
def test_antisymmetry(x):
    f, g, _ = _fns()
    assert poisson_bracket(f, g)(x) == pytest.approx(-poisson_bracket(g, f)(x), rel=1e-12, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(points)
def test_jacobi_identity(x):
    f, g, h = _fns()
    pb = poisson_bracket
    total = pb(f, pb(g, h))(x) + pb(g, pb(h, f))(x) + pb(h, pb(f, g))(x)
    assert abs(total) < 1e-10


@settings(max_examples=30, deadline=None)
@given(points)
def test_leibniz_rule(x):
    f, g, h = _fns()
    lhs = poisson_bracket(f, g * h)(x)
    rhs = poisson_bracket(f, g)(x) * h(x) + g(x) * poisson_bracket(f, h)(x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(points)
def test_casimir_brackets_vanish(x):
    f, _, _ = _fns()
    U = ChartFunction.variable(CHART, "U")
    assert poisson_bracket(U, f)(x) == 0.0


def test_canonical_pairs():
    x = _point(1.0, 0.2, 0.5, -0.3, 1.0)
    s1, p1, s2 = (ChartFunction.variable(CHART, n) for n in ("s1", "p1", "s2"))
    assert poisson_bracket(s1, p1)(x) == 1.0
    assert poisson_bracket(s1, s2)(x) == 0.0


def test_gradient_matches_finite_differences():
    f, _, _ = _fns()
    x = _point(1.1, 0.2, 0.7, -0.4, 0.9)
    g = gradient(f, x)
    arr = x.array()
    for i in range(len(arr)):
        e = np.zeros_like(arr)
        e[i] = 1e-6
        fd = (f(CHART.from_array(arr + e)) - f(CHART.from_array(arr - e))) / 2e-6
        assert g[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_vector_field_leaves_casimirs_fixed():
    f, _, _ = _fns()
    v = hamiltonian_vector_field(f, _point(1.0, 0.1, 0.5, 0.2, 0.7))
    assert v[-1] == 0.0


def test_iterated_bracket_matches_nested_brackets():
    f, g, _ = _fns()
    x = _point(1.2, 0.3, 0.8, -0.2, 0.6)
    nested = g
    for k in range(1, 4):
        nested = poisson_bracket(f, nested)
        assert iterated_bracket(f, g, k, x) == pytest.approx(nested(x), rel=1e-9, abs=1e-10)


def test_singular_evaluation_raises_nonfinite():
    f, _, _ = _fns()
    with pytest.raises(NonFinite):
        gradient(f, _point(0.0, 0.1, 0.5, 0.2, 0.7))


def test_chart_rejects_duplicates():
    with pytest.raises(ValueError):
        CanonicalChart((("s", "p"), ("s", "r")))
