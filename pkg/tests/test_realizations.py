import math

import numpy as np
import pytest

from canonmoments import autodiff as ad
from canonmoments.core import iterated_bracket, poisson_bracket
from canonmoments.errors import SingularChart
from canonmoments.moments import MomentIndex, uncertainty_check
from canonmoments.realizations import (
    closure_certificate,
    generate_moment,
    get_realization,
    moment_casimir_u1,
    moment_function,
    order3_systematic_pi3_long,
    realization_names,
    realize_order2,
    realize_twodof,
)


def test_catalog():
    names = realization_names()
    for n in ("order2", "order3_systematic", "order3_ansatz", "order4_ansatz", "twodof_order2"):
        assert n in names
    with pytest.raises(KeyError):
        get_realization("order9")


def test_order2_values():
    st = realize_order2(s=2.0, p=0.5, U=1.0)
    assert st["q2"] == 4.0
    assert st["qpi"] == 1.0
    assert st["pi2"] == pytest.approx(0.25 + 0.25)


def test_order2_uncertainty_relation_is_U():
    st = realize_order2(s=1.3, p=-0.7, U=0.4)
    assert st["q2"] * st["pi2"] - st["qpi"] ** 2 == pytest.approx(0.4)


def test_order2_minimal_U_saturates_uncertainty():
    assert uncertainty_check(realize_order2(s=0.8, p=0.1, U=0.25)) == []
    assert uncertainty_check(realize_order2(s=0.8, p=0.1, U=0.2)) != []


def test_singular_point_rejected():
    with pytest.raises(SingularChart):
        realize_order2(s=0.0, p=0.0, U=1.0)


@pytest.mark.parametrize("name", ["order2", "order3_systematic", "twodof_order2"])
def test_closure_certificate(name):
    rep = closure_certificate(get_realization(name), n_points=10, seed=1)
    assert rep.passed(1e-9), rep.worst


def test_order3_ansatz_second_order_closure():
    R = get_realization("order3_ansatz")
    idx = [i for i in R.moments if i.order == 2]
    assert closure_certificate(R, n_points=5, seed=2, indices=idx).passed(1e-9)


def test_twodof_second_order_values():
    R = get_realization("twodof_order2")
    x = R.random_point(np.random.default_rng(3))
    st = R.state(x)
    assert st[R.index("q1^2")] == pytest.approx(x["s1"] ** 2)
    assert st[R.index("q1q2")] == pytest.approx(x["s1"] * x["s2"] * math.cos(x["beta"]))


def test_twodof_physical_casimirs_respect_uncertainty():
    R = get_realization("twodof_order2")
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = R.random_point(rng).replace(U1=0.5, U2=0.0, palpha=0.0)
        assert uncertainty_check(R.state(x), tol=1e-9) == []


def test_realize_twodof_needs_all_coordinates():
    with pytest.raises(KeyError):
        realize_twodof(s1=1.0)


def test_generated_moments_follow_brackets():
    R = get_realization("order2")
    f = moment_function(R, "q2")
    g = moment_function(R, "pi2")
    x = R.point(s=1.1, p=0.3, U=0.5)
    assert poisson_bracket(f, g)(x) == pytest.approx(4 * moment_function(R, "qpi")(x))


def test_order3_systematic_compact_matches_long_form():
    R = get_realization("order3_systematic")
    rng = np.random.default_rng(5)
    f = moment_function(R, "pi3")
    for _ in range(20):
        x = R.random_point(rng)
        assert f(x) == pytest.approx(order3_systematic_pi3_long(x.as_dict()), rel=1e-12)


def test_order3_ansatz_second_third_brackets_close():
    R = get_realization("order3_ansatz")
    rng = np.random.default_rng(6)
    q2, pi2 = moment_function(R, "q2"), moment_function(R, "pi2")
    pi3, qpi2 = moment_function(R, "pi3"), moment_function(R, "qpi2")
    for _ in range(5):
        x = R.random_point(rng)
        assert poisson_bracket(q2, pi3)(x) == pytest.approx(6 * qpi2(x), rel=1e-10)
        assert poisson_bracket(pi2, qpi2)(x) == pytest.approx(-2 * pi3(x), rel=1e-10)


def test_second_order_bracket_identity():
    R = get_realization("order2")
    x = R.point(s=1.0, p=2.0, U=0.25)
    qpi, pi2 = moment_function(R, "qpi"), moment_function(R, "pi2")
    assert poisson_bracket(qpi, pi2)(x) == pytest.approx(2 * pi2(x)) == pytest.approx(8.5)
    assert poisson_bracket(pi2, qpi)(x) == pytest.approx(-8.5)


# --- consistency conditions of the ansatz realizations -----------------------


def _pair_repulsion(U):
    return lambda s: U * (1 / (s[0] - s[1]) ** 2 + 1 / (s[0] - s[2]) ** 2 + 1 / (s[1] - s[2]) ** 2)


def _derivatives(F, s):
    _, g, h = ad.hessian_values(F, list(s))
    third = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            third[i, j] = np.asarray(ad.value_and_gradient(lambda v: ad.hessian_values(F, v)[2][i][j], list(s))[1], dtype=float)
    return np.asarray(g, dtype=float), np.asarray(h, dtype=float), third


def _fourth_bracket_condition(F, s, p):
    """Right-hand side of the four-fold bracket condition on the third-order moments."""
    g, h, t = _derivatives(F, s)
    terms = np.array(
        [
            6 * np.sum(p * p * g),
            4 * np.einsum("i,i,j,ij->", p, s, p, h),
            0.5 * np.einsum("i,j,k,ijk->", s * s, p, p, t),
            -1.5 * np.sum(s * g * g),
            -0.25 * np.einsum("i,j,ij->", s * s, g, h),
        ]
    )
    return terms.sum(), np.abs(terms).sum()


def test_repulsion_is_homogeneous_of_degree_minus_two():
    rng = np.random.default_rng(8)
    F = _pair_repulsion(0.7)
    for _ in range(10):
        s = rng.uniform(0.1, 3.0, 3)
        g, _, _ = _derivatives(F, s)
        assert np.dot(s, g) == pytest.approx(-2 * F(s), rel=1e-12)


def test_pair_repulsion_satisfies_fourth_bracket_condition():
    rng = np.random.default_rng(9)
    F = _pair_repulsion(0.4)
    for _ in range(10):
        s, p = rng.uniform(0.1, 3.0, 3), rng.uniform(-1, 1, 3)
        value, scale = _fourth_bracket_condition(F, s, p)
        assert abs(value) < 1e-12 * scale


def test_inverse_square_potential_violates_fourth_bracket_condition():
    rng = np.random.default_rng(10)
    F = lambda s: 0.4 * (1 / s[0] ** 2 + 1 / s[1] ** 2 + 1 / s[2] ** 2)  # noqa: E731
    s, p = rng.uniform(0.5, 2.0, 3), rng.uniform(-1, 1, 3)
    value, scale = _fourth_bracket_condition(F, s, p)
    assert abs(value) > 1e-2 * scale


def _nested_residual(name, target, depth, n_points, seed):
    R = get_realization(name)
    H, f = moment_function(R, "pi2"), moment_function(R, target)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        x = R.random_point(rng)
        values = [iterated_bracket(H, f, k, x) for k in range(depth + 1)]
        worst = max(worst, abs(values[-1]) / max(abs(v) for v in values[:-1]))
    return worst


def test_four_fold_bracket_of_q3_vanishes_in_order3_ansatz():
    assert _nested_residual("order3_ansatz", "q3", 4, 10, 11) < 1e-10


def test_five_fold_bracket_of_q4_vanishes_in_order4_ansatz():
    assert _nested_residual("order4_ansatz", "q4", 5, 10, 12) < 1e-8


def test_order4_ansatz_generating_bracket():
    R = get_realization("order4_ansatz")
    x = R.random_point(np.random.default_rng(13))
    lhs = poisson_bracket(moment_function(R, "q2pi"), moment_function(R, "q3"))(x)
    assert lhs == pytest.approx(3 * moment_function(R, "q2")(x) ** 2 - 3 * moment_function(R, "q4")(x), rel=1e-10)


def test_order4_ansatz_gaussian_limit():
    R = get_realization("order4_ansatz")
    x = R.random_point(np.random.default_rng(14)).replace(C=0.0)
    st = R.state(x)
    assert st["q3"] == 0.0
    assert st["q4"] == pytest.approx(st["q2"] ** 2)


def test_order3_ansatz_example_point():
    st = get_realization("order3_ansatz").state(dict(s1=1.0, s2=2.0, s3=3.0, p1=0.0, p2=0.0, p3=0.0, U=0.25))
    assert st["q2"] == 14.0
    assert st["pi2"] == pytest.approx(0.5625)
    assert st["q3"] == 36.0
    assert st["q2pi"] == 0.0


def test_generated_moments_match_displays():
    R = get_realization("order3_ansatz")
    rng = np.random.default_rng(15)
    for _ in range(5):
        x = R.random_point(rng)
        for label in ("q2pi", "qpi2", "pi3"):
            gen = generate_moment(R, MomentIndex.parse(label))
            assert gen(x) == pytest.approx(R.moments[MomentIndex.parse(label)](x), rel=1e-10)


def test_order4_generated_moment_against_algebra():
    R = get_realization("order4_ansatz")
    x = R.random_point(np.random.default_rng(16))
    q3pi = generate_moment(R, MomentIndex.parse("q3pi"))
    expected = -poisson_bracket(moment_function(R, "pi2"), moment_function(R, "q4"))(x) / 8
    assert q3pi(x) == pytest.approx(expected, rel=1e-12)


def test_order3_systematic_casimir_commutes_with_every_moment():
    R = get_realization("order3_systematic")
    u1 = moment_casimir_u1(R)
    rng = np.random.default_rng(17)
    for _ in range(10):
        x = R.random_point(rng)
        assert u1(x) == pytest.approx(x["U1"], rel=1e-12)
        for f in R.moments.values():
            assert abs(poisson_bracket(f, u1)(x)) < 1e-10 * max(1.0, abs(f(x)))
