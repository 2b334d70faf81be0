"""Thermal ensembles of free-field modes in the order-2 moment realization.

Each mode contributes the classical weight exp(-beta H) with
H = p^2/2 + lambda U/(2 s^2) + omega^2 s^2/8 over s > 0, p real, U > U_min.
Closed forms below are checked against direct quadrature of that weight.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import CutoffTooSmall


@dataclass(frozen=True)
class ModeSpec:
    m: float
    k: float
    beta: float
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.beta > 0):
            raise ValueError("ModeSpec needs m > 0 and beta > 0")

    @property
    def omega(self):
        return math.hypot(self.m, self.k)

    @property
    def U_min(self):
        return self.hbar**2 / 4


def _check(beta, omega, lam=1.0):
    if not (beta > 0 and omega > 0 and lam > 0):
        raise ValueError("beta, omega and lambda must be positive")


def partition_function(beta, omega, lam=1.0, U_min=0.25):
    """Z = 8 pi (2 + x) exp(-x/2) / (lam beta^3 omega^3), x = beta omega sqrt(lam U_min)."""
    _check(beta, omega, lam)
    x = beta * omega * math.sqrt(lam * U_min)
    return 8 * math.pi * (2 + x) * math.exp(-x / 2) / (lam * beta**3 * omega**3)


def log_partition_function(beta, omega, lam=1.0, U_min=0.25):
    _check(beta, omega, lam)
    x = beta * omega * math.sqrt(lam * U_min)
    return math.log(8 * math.pi) + math.log(2 + x) - x / 2 - math.log(lam) - 3 * math.log(beta * omega)


@dataclass(frozen=True)
class EnsembleAverages:
    s2: float
    E: float
    U: float


def ensemble_averages(beta, omega, U_min=0.25) -> EnsembleAverages:
    """Closed-form <s^2>, <E>, <U> at lambda = 1.

    <s^2> = 12/(beta omega^2) + 2 U_min beta/(2 + x)
    <E>   = (12 + 6x + x^2) / (2 beta (2 + x))
    <U>   = U_min + (2/beta) <s^2>
    """
    _check(beta, omega)
    x = beta * omega * math.sqrt(U_min)
    s2 = 12 / (beta * omega**2) + 2 * U_min * beta / (2 + x)
    E = (12 + 6 * x + x * x) / (2 * beta * (2 + x))
    return EnsembleAverages(s2, E, U_min + 2 * s2 / beta)


def _weight_integral(beta, omega, lam, U_min, f):
    """Integral of f(s, U) exp(-beta(lam U/(2 s^2) + omega^2 s^2/8)) over s > 0, U > U_min,
    times the Gaussian p-integral sqrt(2 pi/beta).

    Variables are rescaled (s = s_* t, U = U_min + 2 s^2 w/(beta lam)) so the
    integrand peaks at t = 1 with unit width in w; the minimum energy is factored out.
    Returns (log of the exponential prefactor, remaining integral).
    """
    s_star = (4 * lam * U_min / omega**2) ** 0.25
    e_min = omega * math.sqrt(lam * U_min) / 2
    x = beta * e_min * 2
    width = 8.0 / math.sqrt(x) if x > 1 else 8.0

    def inner(t):
        s = s_star * t
        a = beta * (lam * U_min / (2 * s * s) + omega**2 * s * s / 8) - beta * e_min
        scale = 2 * s * s / (beta * lam)
        val, _ = quad(lambda w: f(s, U_min + scale * w) * math.exp(-w), 0, math.inf, epsabs=0, epsrel=1e-12)
        return s_star * scale * math.exp(-a) * val

    pieces = [(0.0, max(1 - width, 0.0)), (max(1 - width, 0.0), 1.0), (1.0, 1 + width), (1 + width, math.inf)]
    total = 0.0
    for lo, hi in pieces:
        if hi > lo:
            val, _ = quad(inner, lo, hi, epsabs=0, epsrel=1e-12, limit=200)
            total += val
    return -beta * e_min, total * math.sqrt(2 * math.pi / beta)


def partition_function_quadrature(beta, omega, lam=1.0, U_min=0.25):
    _check(beta, omega, lam)
    logpre, val = _weight_integral(beta, omega, lam, U_min, lambda s, U: 1.0)
    return math.exp(logpre) * val


def log_partition_function_quadrature(beta, omega, lam=1.0, U_min=0.25):
    _check(beta, omega, lam)
    logpre, val = _weight_integral(beta, omega, lam, U_min, lambda s, U: 1.0)
    return logpre + math.log(val)


def quadrature_averages(beta, omega, lam=1.0, U_min=0.25) -> EnsembleAverages:
    """<s^2>, <E>, <U> from direct quadrature of the Boltzmann weight."""
    _check(beta, omega, lam)
    _, z = _weight_integral(beta, omega, lam, U_min, lambda s, U: 1.0)
    _, s2 = _weight_integral(beta, omega, lam, U_min, lambda s, U: s * s)
    _, u = _weight_integral(beta, omega, lam, U_min, lambda s, U: U)
    _, pot = _weight_integral(beta, omega, lam, U_min, lambda s, U: lam * U / (2 * s * s) + omega**2 * s * s / 8)
    return EnsembleAverages(s2 / z, 1 / (2 * beta) + pot / z, u / z)


def energy_from_partition(beta, omega, U_min=0.25, h=1e-5):
    """-d ln Z / d beta by a central difference in log beta."""
    b1, b2 = beta * math.exp(-h), beta * math.exp(h)
    d = log_partition_function(b2, omega, 1.0, U_min) - log_partition_function(b1, omega, 1.0, U_min)
    return -d / (b2 - b1)


# --- two-point functions ---------------------------------------------------


def mode_variance(k, m, beta, U_min=0.25):
    """<s_k^2> for omega_k = sqrt(m^2 + k^2) (accepts arrays)."""
    w = np.hypot(m, k)
    return 12 / (beta * w * w) + 2 * U_min * beta / (2 + beta * w * math.sqrt(U_min))


def bessel_k0(z):
    """K_0(z) = int_0^inf exp(-z cosh t) dt."""
    if not z > 0:
        raise ValueError("K0 needs z > 0")
    t_max = math.acosh(1 + 60.0 / z) if z < 1e300 else 1.0
    val, _ = quad(lambda t: math.exp(-z * math.cosh(t)), 0, t_max, epsabs=0, epsrel=1e-13, limit=200)
    return val


def two_point_function(r, m, beta, k_cutoff=None, U_min=0.25, tol=1e-8):
    """(1/2 pi) int_0^inf <s_k^2> cos(k r) dk on the line.

    With ``k_cutoff=None`` the oscillatory integral runs to infinity (QAWF).  With a
    finite cutoff the tail is bounded by 2 <s^2>(k_cutoff)/|r| (the integrand
    envelope is decreasing); CutoffTooSmall is raised if that exceeds ``tol``.
    """
    r = abs(float(r))
    if not r > 0:
        raise ValueError("|x - y| must be positive")
    if not m > 0:
        raise ValueError("mass must be positive")
    f = lambda k: float(mode_variance(k, m, beta, U_min))  # noqa: E731
    if k_cutoff is None:
        val, _ = quad(f, 0, math.inf, weight="cos", wvar=r, limlst=200)
    else:
        tail = 2 * f(k_cutoff) / r / (2 * math.pi)
        if tail > tol:
            raise CutoffTooSmall(f"tail bound {tail:.3g} exceeds {tol:.3g} at k_cutoff={k_cutoff}")
        val, _ = quad(f, 0, k_cutoff, weight="cos", wvar=r, limit=10000)
    return val / (2 * math.pi)


def zero_temperature_two_point(r, m, hbar=1.0):
    """(hbar / 2 pi) K_0(m |r|)."""
    return hbar / (2 * math.pi) * bessel_k0(m * abs(r))


def thermal_correction(r, m, beta):
    """Leading low-temperature correction to the line two-point function, (2/(beta m)) e^{-m|r|}."""
    return 2 / (beta * m) * math.exp(-m * abs(r))


def circle_two_point(r, m, beta, k_max, U_min=0.25):
    """(1/2 pi) * (1/2) sum_{|k| <= k_max} <s_k^2> cos(k r) on the unit circle.

    For r not a multiple of 2 pi the 1/k and 1/k^2 tails of <s_k^2> are summed in
    closed form (sum cos(kr)/k = -ln(2 sin(r/2)), sum cos(kr)/k^2 =
    pi^2/6 - pi r/2 + r^2/4), leaving an O(k^-3) remainder.
    """
    if k_max < 10 * max(1.0, m):
        raise ValueError("k_max must be at least 10 max(1, m)")
    k = np.arange(1, int(k_max) + 1, dtype=float)
    v = mode_variance(k, m, beta, U_min)
    v0 = float(mode_variance(0.0, m, beta, U_min))
    rr = math.fmod(abs(float(r)), 2 * math.pi)
    if rr == 0.0:
        return (0.5 * v0 + float(np.sum(v))) / (2 * math.pi)
    a = 2 * math.sqrt(U_min)
    b = 8 / beta
    rest = v - a / k - b / (k * k)
    s1 = -math.log(2 * math.sin(rr / 2))
    s2 = math.pi**2 / 6 - math.pi * rr / 2 + rr * rr / 4
    total = 0.5 * v0 + float(np.sum(rest * np.cos(k * rr))) + a * s1 + b * s2
    return total / (2 * math.pi)


@dataclass(frozen=True)
class CoefficientReport:
    """Thermal coefficients from the defining integrals next to commonly quoted alternatives."""

    high_temperature: float  # lim_{beta -> 0} beta omega^2 <s^2>
    first_order_low_temperature: float  # lim beta omega^2 (<s^2> - hbar/omega)
    two_point_linear_T: float  # lim beta m e^{m r} (G(beta) - G(inf))
    alternatives: dict


def coefficient_report(m=1.0, r=1.0, U_min=0.25):
    omega = 1.0
    hi = 1e-6 * omega**2 * ensemble_averages(1e-6, omega, U_min).s2
    b = 1e6
    lo = b * omega**2 * (ensemble_averages(b, omega, U_min).s2 - 2 * math.sqrt(U_min) / omega)
    b2 = 1e4
    g = two_point_function(r, m, b2, U_min=U_min)
    g0 = 2 * math.sqrt(U_min) / (2 * math.pi) * bessel_k0(m * r)
    lin = b2 * m * math.exp(m * r) * (g - g0)
    return CoefficientReport(hi, lo, lin, {"high_temperature": 12.0, "first_order": 8.0, "two_point_linear_T": 9 / 4})
