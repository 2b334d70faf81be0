import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from canonmoments.errors import DensityFloorHit, SeriesDiverging
from canonmoments.reconstruction import (
    MomentInput,
    density_from_moments,
    gaussian_moments,
    hermite_coefficients,
    impurity_candidates,
    phase_from_moments,
)

Q = np.linspace(-4, 4, 801)


def test_hermite_table():
    h = hermite_coefficients(4)
    assert h[2] == [-2, 0, 4]
    assert h[3] == [0, -12, 0, 8]
    assert h[4] == [12, 0, -48, 0, 16]


def test_gaussian_moments():
    mi = gaussian_moments(0.0, 0.0, 6)
    assert mi.a == (1.0, 0.0, 0.5, 0.0, 0.75, 0.0, 1.875)
    assert all(b == 0.0 for b in mi.b)
    boosted = gaussian_moments(0.0, 2.0, 4)
    np.testing.assert_allclose(boosted.b, 2.0 * np.array(boosted.a))


def test_from_central_shift():
    mi = MomentInput.from_central(0.5, 0.0, {2: 0.5}, n_max=2)
    assert mi.a == pytest.approx((1.0, 0.5, 0.75))


def test_density_of_weight_gaussian_is_exact():
    res = density_from_moments(gaussian_moments(), 10, Q)
    np.testing.assert_allclose(res.density, np.exp(-Q * Q) / math.sqrt(math.pi), atol=1e-8)
    assert res.hankel_ok
    assert trapezoid(res.density, Q) == pytest.approx(1.0, abs=1e-12)


def test_raw_normalization_differs_by_root_pi():
    res = density_from_moments(gaussian_moments(), 10, Q)
    assert res.norm == pytest.approx(1 / math.sqrt(math.pi), rel=1e-6)


def test_shifted_gaussian():
    res = density_from_moments(gaussian_moments(0.5, 0.0, 16), 16, Q)
    np.testing.assert_allclose(res.density, np.exp(-((Q - 0.5) ** 2)) / math.sqrt(math.pi), atol=1e-5)


def test_exact_for_polynomial_times_weight():
    # |psi|^2 proportional to exp(-q^2) (1 + q^2): a_n = (G_n + G_{n+2}) / (1 + 1/2)
    g = [0.0 if n % 2 else math.prod(range(1, n, 2)) / 2 ** (n // 2) for n in range(12)]
    a = [(g[n] + g[n + 2]) / 1.5 for n in range(9)]
    res = density_from_moments(a, 8, Q)
    exact = np.exp(-Q * Q) * (1 + Q * Q) / (1.5 * math.sqrt(math.pi))
    # the raw series is exact; the grid renormalization adds the trapezoid error only
    np.testing.assert_allclose(res.raw * math.sqrt(math.pi), exact, atol=1e-12)
    np.testing.assert_allclose(res.density, exact, atol=1e-6)


def test_constant_phase_gradient():
    k = 1.3
    mi = gaussian_moments(0.0, k, 12)
    dens = density_from_moments(mi, 12, Q)
    ph = phase_from_moments(mi, dens, 12)
    np.testing.assert_allclose(ph.dalpha_dq, k, atol=1e-9)
    assert ph.alpha[400] == 0.0
    np.testing.assert_allclose(ph.alpha, k * Q, atol=1e-8)


def test_real_state_has_zero_phase():
    mi = gaussian_moments(0.0, 0.0, 10)
    dens = density_from_moments(mi, 10, Q)
    assert np.max(np.abs(phase_from_moments(mi, dens, 10).alpha)) == 0.0


def test_boost_shifts_gradient_linearly():
    base = gaussian_moments(0.0, 0.4, 10)
    dens = density_from_moments(base, 10, Q)
    shifted = MomentInput(base.a, tuple(b + 0.7 * a for a, b in zip(base.a, base.b)))
    d0 = phase_from_moments(base, dens, 10).dalpha_dq
    d1 = phase_from_moments(shifted, dens, 10).dalpha_dq
    np.testing.assert_allclose(d1 - d0, 0.7, atol=1e-12)


def test_density_floor():
    mi = gaussian_moments(0.0, 1.0, 10)
    dens = density_from_moments(mi, 10, np.linspace(-6, 6, 101))
    with pytest.raises(DensityFloorHit):
        phase_from_moments(mi, dens, 10)


def test_guards():
    with pytest.raises(ValueError):
        MomentInput((0.5, 0.0))
    with pytest.raises(ValueError):
        density_from_moments(gaussian_moments(0.0, 0.0, 30), 25, Q)
    with pytest.raises(ValueError):
        density_from_moments(gaussian_moments(0.0, 0.0, 4), 8, Q)
    with pytest.raises(SeriesDiverging):
        density_from_moments(gaussian_moments(3.0, 0.0, 6), 6, Q)


@pytest.mark.parametrize(
    "name,expected",
    [("order2", ["U"]), ("order3_systematic", ["s3"]), ("order3_ansatz", ["U"])],
)
def test_impurity_candidates(name, expected):
    assert impurity_candidates(name, n_points=20) == expected


def test_impurity_scan_is_stable_across_seeds():
    assert impurity_candidates("twodof_order2", n_points=20, seed=1) == impurity_candidates(
        "twodof_order2", n_points=20, seed=2
    )
