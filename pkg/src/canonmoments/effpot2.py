"""Two-DOF second-order effective potential and its ground-state moment sector."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import autodiff as ad
from .errors import ComplexFrequency, NotPositiveDefinite, SingularChart
from .potentials import ClassicalPotential, Hessian2
from .realizations import twodof_phi_gamma


def effective_potential_2dof(q1, q2, s1, s2, alpha, beta, U1, U2, V: ClassicalPotential):
    """V + [(U1 - sqrt(U2) sin(a+b))/s1^2 + (U1 - sqrt(U2) sin(a-b))/s2^2] / (4 sin^2 b)
    + V11 s1^2/2 + V12 s1 s2 cos b + V22 s2^2/2."""
    if not (s1 > 0 and s2 > 0):
        raise SingularChart("s1 and s2 must be positive")
    sb = ad.sin(beta)
    if sb == 0:
        raise SingularChart("sin(beta) = 0")
    if U2 < 0:
        raise SingularChart("U2 must be non-negative")
    v11, v22, v12 = V.hessian2(q1, q2)
    r = ad.sqrt(U2)
    moment = ((U1 - r * ad.sin(alpha + beta)) / (s1 * s1) + (U1 - r * ad.sin(alpha - beta)) / (s2 * s2)) / (4 * sb * sb)
    return V(q1, q2) + moment + 0.5 * v11 * s1 * s1 + v12 * s1 * s2 * ad.cos(beta) + 0.5 * v22 * s2 * s2


def saturated_moment_energy(h: Hessian2, s1, s2, beta, hbar=1.0):
    """Moment part at U2 = 0, U1 = hbar^2/2 (the alpha dependence has dropped out)."""
    sb = ad.sin(beta)
    return (
        hbar**2 / (8 * sb * sb) * (1 / (s1 * s1) + 1 / (s2 * s2))
        + 0.5 * h.V11 * s1 * s1
        + h.V12 * s1 * s2 * ad.cos(beta)
        + 0.5 * h.V22 * s2 * s2
    )


def stationarity_residuals(h: Hessian2, s1, s2, beta, hbar=1.0):
    """(dV/ds1, dV/ds2, dV/dbeta) of the saturated moment energy, written out by hand."""
    sb, cb = math.sin(beta), math.cos(beta)
    d1 = -(hbar**2) / (4 * s1**3 * sb**2) + h.V11 * s1 + h.V12 * s2 * cb
    d2 = -(hbar**2) / (4 * s2**3 * sb**2) + h.V22 * s2 + h.V12 * s1 * cb
    db = -(hbar**2) * (s1**2 + s2**2) * cb / (4 * s1**2 * s2**2 * sb**3) - h.V12 * s1 * s2 * sb
    return np.array([d1, d2, db])


@dataclass(frozen=True)
class MomentSector:
    s1: float
    s2: float
    beta: float
    energy: float  # minimized moment part (V excluded)
    method: str  # "closed_form" or "numeric"

    @property
    def covariance(self):
        return self.s1 * self.s2 * math.cos(self.beta)


def _require_pd(h: Hessian2):
    if not h.is_positive_definite():
        raise NotPositiveDefinite(f"Hessian {h} is not positive definite")


def closed_form_sector(h: Hessian2, hbar=1.0):
    """s1^4, s2^4 from the closed forms (s1^4 = s2^4 with V11 <-> V22), sin^2 beta from
    sin^2 b = hbar^2 (s2^2 - s1^2) / (4 s1^2 s2^2 (V11 s1^2 - V22 s2^2)), and
    cos b from the closed-form covariance.  Requires V11 != V22."""
    _require_pd(h)
    a, b, c = h.V11, h.V22, h.V12
    if a == b:
        raise ZeroDivisionError("closed form needs V11 != V22")
    D = a * b - c * c
    sD = math.sqrt(D)

    def fourth(x, y):
        return hbar**2 / 4 * (D - x * x) / D * (x + sD) / ((y - x) * sD + x * y - x * x - 2 * c * c)

    s24 = fourth(a, b)
    s14 = fourth(b, a)
    if not (s14 > 0 and s24 > 0):
        raise ArithmeticError("closed-form s^4 not positive")
    s1, s2 = s14**0.25, s24**0.25
    if c == 0:
        return MomentSector(s1, s2, math.pi / 2, float(saturated_moment_energy(h, s1, s2, math.pi / 2, hbar)), "closed_form")
    sin2 = hbar**2 * (s2 * s2 - s1 * s1) / (4 * s1 * s1 * s2 * s2 * (a * s1 * s1 - b * s2 * s2))
    sin2 = min(max(sin2, 0.0), 1.0)
    # cos b from the Gaussian covariance s1 s2 cos b = -hbar c / (2 sqrt(D) sqrt(tr + 2 sqrt(D)));
    # sqrt(1 - sin^2) loses half the digits when the coupling is weak
    cos_b = -hbar * c / (2 * sD * math.sqrt(a + b + 2 * sD)) / (s1 * s2)
    beta = math.atan2(math.sqrt(sin2), cos_b)
    return MomentSector(s1, s2, beta, float(saturated_moment_energy(h, s1, s2, beta, hbar)), "closed_form")


def ratio_branches(h: Hessian2):
    """Both roots of the quadratic for s1^2/s2^2 (either may be the physical one)."""
    a, b, c = h.V11, h.V22, h.V12
    sD = math.sqrt(a * b - c * c)
    den = a * (b - a) - c * c
    return [((b - a) * sg * sD - c * c) / den for sg in (1.0, -1.0)]


def numeric_sector(h: Hessian2, hbar=1.0, x0=None):
    """BFGS on (log s1, log s2, beta) with exact gradients."""
    _require_pd(h)

    def fun(x):
        return saturated_moment_energy(h, ad.exp(x[0]), ad.exp(x[1]), x[2], hbar)

    def f_and_g(x):
        if not 0 < x[2] < math.pi:
            return math.inf, np.zeros(3)
        v, g = ad.value_and_gradient(fun, list(x))
        return float(v), np.asarray(g, dtype=float)

    if x0 is None:
        x0 = [math.log(math.sqrt(hbar / (2 * math.sqrt(h.V11)))), math.log(math.sqrt(hbar / (2 * math.sqrt(h.V22)))), math.pi / 2]
    res = minimize(f_and_g, x0, jac=True, method="BFGS", options={"gtol": 1e-13, "maxiter": 10000})
    s1, s2, beta = math.exp(res.x[0]), math.exp(res.x[1]), float(res.x[2])
    return MomentSector(s1, s2, beta, float(res.fun), "numeric")


def minimize_moment_sector(h: Hessian2, hbar=1.0, rel_degenerate=1e-6):
    """Ground-state (s1, s2, beta) of the saturated two-DOF moment energy.

    Uses the closed forms unless V11 and V22 agree to ``rel_degenerate`` (relative),
    where the closed forms divide by V11 - V22; then BFGS is used instead.
    """
    _require_pd(h)
    if abs(h.V11 - h.V22) <= rel_degenerate * max(abs(h.V11), abs(h.V22)):
        return numeric_sector(h, hbar)
    return closed_form_sector(h, hbar)


def normal_mode_frequencies(h: Hessian2):
    root = math.sqrt((h.V11 - h.V22) ** 2 + 4 * h.V12**2)
    lo, hi = 0.5 * (h.V11 + h.V22 - root), 0.5 * (h.V11 + h.V22 + root)
    if lo < 0:
        raise ComplexFrequency(f"negative normal-mode radicand {lo}")
    return math.sqrt(hi), math.sqrt(lo)


def low_energy_potential(q1, q2, V: ClassicalPotential, hbar=1.0):
    """V + (hbar/2)(w_+ + w_-), with w_pm^2 the eigenvalues of the Hessian of V."""
    w_hi, w_lo = normal_mode_frequencies(V.hessian(q1, q2))
    return float(V(q1, q2)) + 0.5 * hbar * (w_hi + w_lo)


def small_coupling_beta(h: Hessian2):
    """pi/2 + V12 / ((V11 V22)^(1/4) (sqrt V11 + sqrt V22))."""
    return math.pi / 2 + h.V12 / ((h.V11 * h.V22) ** 0.25 * (math.sqrt(h.V11) + math.sqrt(h.V22)))


def ground_state_covariance(h: Hessian2, hbar=1.0):
    """(hbar/2) V^(-1/2) for unit masses: exact Gaussian ground-state position covariance."""
    M = np.array([[h.V11, h.V12], [h.V12, h.V22]])
    w, P = np.linalg.eigh(M)
    if np.any(w <= 0):
        raise NotPositiveDefinite("Hessian not positive definite")
    return 0.5 * hbar * (P / np.sqrt(w)) @ P.T


@dataclass(frozen=True)
class LowEnergyRow:
    q1: float
    q2: float
    V: float
    V_low: float
    s1: float
    s2: float
    beta: float


def low_energy_grid(V: ClassicalPotential, q1s, q2s, hbar=1.0):
    rows = []
    for a in q1s:
        for b in q2s:
            h = V.hessian(a, b)
            sec = minimize_moment_sector(h, hbar)
            rows.append(LowEnergyRow(float(a), float(b), float(V(a, b)), low_energy_potential(a, b, V, hbar), sec.s1, sec.s2, sec.beta))
    return rows


# --- uncertainty saturation ------------------------------------------------


@dataclass
class SaturationReport:
    phi: float
    gamma: float
    bound: float
    phi_ok: bool
    gamma_ok: bool
    saturated: bool
    difference: float  # phi - gamma
    difference_closed_form: float  # -sqrt(U2) cos(alpha) / sin(beta)
    difference_half: float  # variant with an extra factor 1/2, kept for comparison
    beta_violations: np.ndarray  # sampled betas where a bound fails at these U1, U2, alpha
    u2_term_slope: float  # d V_U2 / d sqrt(U2) on the cos(alpha) = 0 branch
    u2_unbounded: bool


def u2_term(U2, beta, s1, s2):
    """-sqrt(U2) cos(b) / (4 sin^2 b) (1/s1^2 + 1/s2^2): U2 part of V_eff at alpha = pi/2."""
    return -math.sqrt(U2) * math.cos(beta) / (4 * math.sin(beta) ** 2) * (1 / s1**2 + 1 / s2**2)


def saturation_analysis(U1, U2, alpha, beta, hbar=1.0, s1=1.0, s2=1.0, n_beta=721, tol=1e-12):
    """Zero-momentum uncertainty functions and the argument fixing U2 = 0, U1 = hbar^2/2."""
    sb = math.sin(beta)
    if sb == 0:
        raise SingularChart("sin(beta) = 0")
    phi, gam = twodof_phi_gamma(beta, 0.0, alpha, 0.0, U1, U2)
    bound = hbar**2 / 4
    phi_ok, gam_ok = phi >= bound - tol, gam >= bound - tol
    sat = abs(phi - bound) <= tol and abs(gam - bound) <= tol
    diff_cf = -math.sqrt(U2) * math.cos(alpha) / sb
    betas = np.linspace(0, math.pi, n_beta)[1:-1]
    bad = []
    for b in betas:
        p, g = twodof_phi_gamma(b, 0.0, alpha, 0.0, U1, U2)
        if p < bound - tol or g < bound - tol:
            bad.append(b)
    # slope of the U2 term in sqrt(U2) on the cos(alpha) = 0 branch (alpha = pi/2)
    roots = np.array([0.0, 1.0, 10.0, 100.0])
    vals = np.array([u2_term(r * r, beta, s1, s2) for r in roots])
    slope = float(np.polyfit(roots, vals, 1)[0])
    unbounded = bool(np.all(np.diff(vals) < 0)) and slope < -1e-12
    return SaturationReport(
        phi, gam, bound, phi_ok, gam_ok, sat, phi - gam, diff_cf, 0.5 * diff_cf, np.array(bad), slope, unbounded
    )
