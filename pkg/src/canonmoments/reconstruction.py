"""Position density and phase of a pure state from its moments (Hermite series),
and a structural scan for impurity parameters of a realization."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .core import gradient
from .errors import DensityFloorHit, SeriesDiverging
from .moments import moments_up_to
from .realizations import get_realization, moment_function

MAX_TERMS = 20


def hermite_coefficients(n_max):
    """Exact integer table h[n][l] with H_n(q) = sum_l h[n][l] q^l (physicists' convention)."""
    h = [[1], [0, 2]]
    for n in range(1, n_max):
        prev, cur = h[n - 1], h[n]
        nxt = [0] * (n + 2)
        for l, c in enumerate(cur):
            nxt[l + 1] += 2 * c
        for l, c in enumerate(prev):
            nxt[l] -= 2 * n * c
        h.append(nxt)
    return h[: n_max + 1]


def _hermite_values(q, n_max):
    q = np.asarray(q, dtype=float)
    H = np.zeros((n_max + 1,) + q.shape)
    H[0] = 1.0
    if n_max >= 1:
        H[1] = 2 * q
    for n in range(1, n_max):
        H[n + 1] = 2 * q * H[n] - 2 * n * H[n - 1]
    return H


@dataclass(frozen=True)
class MomentInput:
    """Raw moments a_n = <q^n> and Re b_n = Re <q^n pi>, n = 0..len-1."""

    a: tuple
    b: tuple = ()
    hbar: float = 1.0

    def __post_init__(self):
        if abs(self.a[0] - 1.0) > 1e-12:
            raise ValueError(f"a_0 must be 1, got {self.a[0]}")

    @classmethod
    def from_central(cls, q_mean, pi_mean, position, mixed=None, hbar=1.0, n_max=None):
        """Raw moments from expectation values and central moments.

        ``position[j]`` = Delta(q^j) and ``mixed[j]`` = Delta(q^j pi) (Weyl-ordered),
        for j >= 2; lower orders are filled in (Delta(1) = 1, first order = 0).
        """
        n_max = n_max if n_max is not None else max(position)
        d = {0: 1.0, 1: 0.0, **{int(k): float(v) for k, v in position.items()}}
        dm = {0: 0.0, 1: 0.0, **{int(k): float(v) for k, v in (mixed or {}).items()}}
        a = [sum(math.comb(n, j) * q_mean ** (n - j) * d[j] for j in range(n + 1)) for n in range(n_max + 1)]
        b = []
        for n in range(n_max + 1):
            if n not in dm:
                break
            b.append(sum(math.comb(n, j) * q_mean ** (n - j) * (dm[j] + pi_mean * d[j]) for j in range(n + 1)))
        return cls(tuple(a), tuple(b), hbar)


def gaussian_moments(mean=0.0, k=0.0, n_max=16, hbar=1.0):
    """Moments of psi = pi^(-1/4) exp(-(q-mean)^2/2 + i k q): the weight-matched Gaussian,
    shifted and boosted.  Delta(q^2j) = (2j-1)!! / 2^j, odd orders vanish, Delta(q^j pi) = 0."""
    position = {}
    for j in range(2, n_max + 1):
        position[j] = 0.0 if j % 2 else math.prod(range(1, j, 2)) / 2 ** (j // 2)
    mixed = {j: 0.0 for j in range(2, n_max + 1)}
    return MomentInput.from_central(mean, hbar * k, position, mixed, hbar, n_max)


@dataclass
class DensityResult:
    q: np.ndarray
    density: np.ndarray  # renormalized to unit integral on the grid
    raw: np.ndarray  # series with the 1/(2^n pi n!) normalization (norm 1/sqrt(pi) off unit)
    norm: float  # grid integral of ``raw``
    c: np.ndarray
    residual: float  # max |last term| on the grid
    hankel_ok: bool


def _series_terms(coeffs, q, n_terms):
    """exp(-q^2) coeffs[n] H_n(q)/(2^n n!) for n < n_terms (rows)."""
    H = _hermite_values(q, n_terms - 1)
    scale = np.array([1.0 / (2.0**n * math.factorial(n)) for n in range(n_terms)])
    return (np.asarray(coeffs[:n_terms], dtype=float) * scale)[:, None] * H * np.exp(-np.asarray(q) ** 2)


def _hankel_ok(a):
    m = (len(a) - 1) // 2
    M = np.array([[a[i + j] for j in range(m + 1)] for i in range(m + 1)])
    return bool(np.min(np.linalg.eigvalsh(M)) >= -1e-10 * max(1.0, np.max(np.abs(M))))


def density_from_moments(a, N, q, diverge_tol=0.1):
    """|psi(q)|^2 from c_n = sum_l h_{n,l} a_l, n <= N.

    The raw series uses the normalization 1/(2^n pi n!); the density is
    then renormalized on the grid.  SeriesDiverging if the last term exceeds
    ``diverge_tol`` times the peak density.
    """
    a = tuple(a.a) if isinstance(a, MomentInput) else tuple(a)
    if abs(a[0] - 1.0) > 1e-12:
        raise ValueError(f"a_0 must be 1, got {a[0]}")
    if N > MAX_TERMS:
        raise ValueError(f"N must not exceed {MAX_TERMS}")
    if len(a) < N + 1:
        raise ValueError(f"need moments up to order {N}, got {len(a) - 1}")
    h = hermite_coefficients(N)
    c = np.array([float(sum(h[n][l] * a[l] for l in range(n + 1))) for n in range(N + 1)])
    q = np.asarray(q, dtype=float)
    terms = _series_terms(c, q, N + 1) / math.pi
    raw = terms.sum(axis=0)
    norm = float(trapezoid(raw, q))
    if not norm > 0:
        raise SeriesDiverging("reconstructed density has non-positive integral")
    density = raw / norm
    residual = float(np.max(np.abs(terms[-1]))) / norm
    if residual > diverge_tol * float(np.max(np.abs(density))):
        raise SeriesDiverging(f"last series term {residual:.3g} is not small")
    return DensityResult(q, density, raw, norm, c, residual, _hankel_ok(a[: N + 1]))


@dataclass
class PhaseResult:
    q: np.ndarray
    dalpha_dq: np.ndarray
    alpha: np.ndarray
    d: np.ndarray


def phase_from_moments(b, dens: DensityResult, N, hbar=1.0, floor=1e-8):
    """dalpha/dq from d_n = sum_l h_{n,l} Re b_l, divided by hbar times the density.

    Numerator and raw density share the same series normalization, which cancels.
    alpha is the cumulative trapezoid integral with alpha = 0 at the grid point
    nearest q = 0.
    """
    if isinstance(b, MomentInput):
        hbar = b.hbar
        b = b.b
    b = tuple(b)
    if len(b) < N + 1:
        raise ValueError(f"need Re b_n up to order {N}")
    q = dens.q
    low = dens.density < floor
    if np.any(low):
        raise DensityFloorHit(f"density below {floor} at q = {q[low][0]:.4g} (phase undefined)")
    h = hermite_coefficients(N)
    d = np.array([float(sum(h[n][l] * b[l] for l in range(n + 1))) for n in range(N + 1)])
    H = _hermite_values(q, N)
    scale = np.array([1.0 / (2.0**n * math.factorial(n)) for n in range(N + 1)])
    num = ((d * scale)[:, None] * H).sum(axis=0)
    den = ((dens.c * scale)[:, None] * H).sum(axis=0)
    dalpha = num / (hbar * den)
    alpha = np.concatenate([[0.0], np.cumsum(0.5 * (dalpha[1:] + dalpha[:-1]) * np.diff(q))])
    alpha -= alpha[int(np.argmin(np.abs(q)))]
    return PhaseResult(q, dalpha, alpha, d)


# --- impurity scan -----------------------------------------------------------


def impurity_candidates(realization_name, n_points=100, seed=0, tol=1e-12):
    """Chart parameters whose derivative vanishes on every moment with at most one momentum factor.

    Covers the realized moments and those the generating recursion can produce up
    to the realization's order.  The sparsity pattern is sampled at ``n_points``
    random regular points.
    """
    R = get_realization(realization_name)
    targets = [i for i in moments_up_to(R.order, R.dof) if i.order >= 2 and i.momentum_degree <= 1]
    funcs = []
    for idx in targets:
        try:
            funcs.append(moment_function(R, idx))
        except KeyError:
            continue
    rng = np.random.default_rng(seed)
    used = np.zeros(R.chart.dim, dtype=bool)
    for _ in range(n_points):
        x = R.random_point(rng)
        for f in funcs:
            g = gradient(f, x)
            used |= np.abs(g) > tol * max(1.0, float(np.max(np.abs(g))))
    return [n for n, u in zip(R.chart.names, used) if not u]


__all__ = [
    "MomentInput",
    "gaussian_moments",
    "density_from_moments",
    "phase_from_moments",
    "hermite_coefficients",
    "impurity_candidates",
    "DensityResult",
    "PhaseResult",
]
